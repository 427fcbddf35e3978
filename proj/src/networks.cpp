#include "dascn/networks.hpp"

#include "dascn/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dascn {

std::string to_string(OutputActivation a) { return a == OutputActivation::relu ? "relu" : "none"; }

OutputActivation parse_output_activation(const std::string& name) {
    if (name == "relu") return OutputActivation::relu;
    if (name == "none") return OutputActivation::none;
    throw ValidationError("unknown output activation '" + name + "' (expected relu|none)");
}

Mlp Mlp::zeros(const NetworkShape& shape) {
    require(shape.input_dim >= 1 && shape.hidden_dim >= 1 && shape.output_dim >= 1,
            "network dimensions must be >= 1");
    Mlp net;
    net.shape = shape;
    net.w1 = Matrix::Zero(shape.input_dim, shape.hidden_dim);
    net.b1 = Matrix::Zero(1, shape.hidden_dim);
    net.w2 = Matrix::Zero(shape.hidden_dim, shape.output_dim);
    net.b2 = Matrix::Zero(1, shape.output_dim);
    return net;
}

bool Mlp::all_finite() const {
    return std::ranges::all_of(tensors(), [](const Matrix* t) { return t->allFinite(); });
}

double Mlp::squared_norm() const {
    double s = 0.0;
    for (const Matrix* t : tensors()) s += t->squaredNorm();
    return s;
}

bool operator==(const Mlp& a, const Mlp& b) {
    return a.shape == b.shape && a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
}

namespace {

Matrix leaky(const Matrix& x, double slope) {
    return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix leaky_slope_mask(const Matrix& x, double slope) {
    return x.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

} // namespace

Matrix mlp_forward(const Mlp& net, const Matrix& input, MlpCache* cache) {
    require(input.cols() == net.shape.input_dim,
            "mlp_forward: input has " + std::to_string(input.cols()) + " columns, network expects " +
                std::to_string(net.shape.input_dim));
    Matrix pre_hidden = input * net.w1;
    pre_hidden.rowwise() += net.b1.row(0);
    Matrix hidden = leaky(pre_hidden, net.shape.leaky_slope);
    Matrix pre_output = hidden * net.w2;
    pre_output.rowwise() += net.b2.row(0);
    Matrix output = net.shape.output_activation == OutputActivation::relu
                        ? Matrix(pre_output.cwiseMax(0.0))
                        : pre_output;
    if (cache) {
        cache->input = input;
        cache->pre_hidden = std::move(pre_hidden);
        cache->hidden = std::move(hidden);
        cache->pre_output = std::move(pre_output);
    }
    return output;
}

Matrix mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& d_output, Mlp* grad) {
    require(d_output.rows() == cache.input.rows() && d_output.cols() == net.shape.output_dim,
            "mlp_backward: d_output shape mismatch");
    Matrix d_pre_output = d_output;
    if (net.shape.output_activation == OutputActivation::relu)
        d_pre_output = d_output.cwiseProduct(
            cache.pre_output.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    const Matrix d_hidden = d_pre_output * net.w2.transpose();
    const Matrix d_pre_hidden =
        d_hidden.cwiseProduct(leaky_slope_mask(cache.pre_hidden, net.shape.leaky_slope));
    if (grad) {
        grad->w2.noalias() += cache.hidden.transpose() * d_pre_output;
        grad->b2 += d_pre_output.colwise().sum();
        grad->w1.noalias() += cache.input.transpose() * d_pre_hidden;
        grad->b1 += d_pre_hidden.colwise().sum();
    }
    return d_pre_hidden * net.w1.transpose();
}

Matrix critic_input_gradient(const Mlp& critic, const Matrix& input) {
    require(critic.shape.output_dim == 1 && critic.shape.output_activation == OutputActivation::none,
            "critic must have a single linear output");
    MlpCache cache;
    mlp_forward(critic, input, &cache);
    const Matrix slopes = leaky_slope_mask(cache.pre_hidden, critic.shape.leaky_slope);
    const Matrix q = (slopes.array().rowwise() * critic.w2.col(0).transpose().array()).matrix();
    return q * critic.w1.transpose();
}

double critic_gradient_penalty(const Mlp& critic, const Matrix& input, int col_begin,
                               int col_count, Mlp* grad, double scale) {
    require(critic.shape.output_dim == 1 && critic.shape.output_activation == OutputActivation::none,
            "critic must have a single linear output");
    require(col_begin >= 0 && col_count >= 1 && col_begin + col_count <= critic.shape.input_dim,
            "gradient penalty column range out of bounds");
    const auto batch = input.rows();
    require(batch >= 1, "gradient penalty over an empty batch");

    MlpCache cache;
    mlp_forward(critic, input, &cache);
    // For a one-hidden-layer leaky critic the input gradient is
    // W1 diag(s) w2 with s the (piecewise constant) activation slopes.
    const Matrix slopes = leaky_slope_mask(cache.pre_hidden, critic.shape.leaky_slope);
    const Matrix q = (slopes.array().rowwise() * critic.w2.col(0).transpose().array()).matrix();
    const auto w1_cols = critic.w1.middleRows(col_begin, col_count);
    const Matrix g = q * w1_cols.transpose(); // [B x col_count]

    double penalty = 0.0;
    Matrix u(batch, col_count);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const double norm = g.row(i).norm();
        penalty += (norm - 1.0) * (norm - 1.0);
        if (norm > 0.0)
            u.row(i) = (2.0 / static_cast<double>(batch)) * (norm - 1.0) / norm * g.row(i);
        else
            u.row(i).setZero();
    }
    penalty /= static_cast<double>(batch);

    if (grad) {
        grad->w1.middleRows(col_begin, col_count).noalias() += scale * (u.transpose() * q);
        const Matrix dq = u * w1_cols; // [B x H]
        grad->w2.col(0) += scale * dq.cwiseProduct(slopes).colwise().sum().transpose();
    }
    return penalty;
}

SoftmaxClassifier SoftmaxClassifier::zeros(int feature_dim, std::vector<int> classes) {
    require(feature_dim >= 1 && !classes.empty(), "classifier needs K >= 1 and >= 1 class");
    SoftmaxClassifier cls;
    cls.weight = Matrix::Zero(feature_dim, static_cast<Eigen::Index>(classes.size()));
    cls.bias = Matrix::Zero(1, static_cast<Eigen::Index>(classes.size()));
    cls.classes = std::move(classes);
    return cls;
}

int SoftmaxClassifier::index_of(int class_id) const {
    const auto it = std::ranges::find(classes, class_id);
    return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
}

bool SoftmaxClassifier::operator==(const SoftmaxClassifier& other) const {
    return classes == other.classes && weight == other.weight && bias == other.bias;
}

Matrix classifier_logits(const SoftmaxClassifier& cls, const Matrix& visual) {
    require(visual.cols() == cls.weight.rows(), "classifier: feature dimension mismatch");
    Matrix logits = visual * cls.weight;
    logits.rowwise() += cls.bias.row(0);
    return logits;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - m).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    // Saturated rows underflow into subnormals, which stall later products.
    return p.unaryExpr([](double v) { return v < std::numeric_limits<double>::min() ? 0.0 : v; });
}

Matrix classifier_forward(const SoftmaxClassifier& cls, const Matrix& visual) {
    return softmax_rows(classifier_logits(cls, visual));
}

bool ModelParams::all_finite() const {
    return g_sv.all_finite() && g_vs.all_finite() && d_v.all_finite() && d_s.all_finite() &&
           cls_seen.weight.allFinite() && cls_seen.bias.allFinite();
}

void ModelParams::check_consistent() const {
    const int k = g_sv.shape.output_dim;
    const int l = g_vs.shape.output_dim;
    require(g_sv.shape.input_dim == 2 * l, "g_sv must map L+L -> K");
    require(g_vs.shape.input_dim == k, "g_vs must map K -> L");
    require(d_v.shape.input_dim == k + l && d_v.shape.output_dim == 1, "d_v must map K+L -> 1");
    require(d_s.shape.input_dim == l && d_s.shape.output_dim == 1, "d_s must map L -> 1");
    require(cls_seen.weight.rows() == k, "cls_seen must map K -> |seen|");
}

namespace {

Mlp init_mlp(const NetworkShape& shape, Rng& rng) {
    Mlp net = Mlp::zeros(shape);
    net.w1 = rng.gaussian_matrix(shape.input_dim, shape.hidden_dim,
                                 1.0 / std::sqrt(static_cast<double>(shape.input_dim)));
    net.w2 = rng.gaussian_matrix(shape.hidden_dim, shape.output_dim,
                                 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim)));
    return net;
}

} // namespace

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
    require(dims.feature_dim >= 1 && dims.attribute_dim >= 1 && dims.hidden_dim >= 1 &&
                !dims.seen_classes.empty(),
            "init_params: dimensions must be >= 1");
    const int k = dims.feature_dim;
    const int l = dims.attribute_dim;
    const int h = dims.hidden_dim;
    const double s = dims.leaky_slope;
    Rng rng(seed);
    ModelParams p;
    p.g_sv = init_mlp({2 * l, h, k, s, OutputActivation::relu}, rng);
    p.g_vs = init_mlp({k, h, l, s, dims.gvs_output}, rng);
    p.d_v = init_mlp({k + l, h, 1, s, OutputActivation::none}, rng);
    p.d_s = init_mlp({l, h, 1, s, OutputActivation::none}, rng);
    p.cls_seen = SoftmaxClassifier::zeros(k, dims.seen_classes);
    return p;
}

Matrix gen_sv_forward(const ModelParams& params, const Matrix& attributes, const Matrix& noise) {
    const int l = params.g_sv.shape.input_dim / 2;
    require(attributes.cols() == l && noise.cols() == l && attributes.rows() == noise.rows(),
            "gen_sv_forward: attributes and noise must both be [B x L]");
    return mlp_forward(params.g_sv, hconcat(attributes, noise));
}

Matrix gen_vs_forward(const ModelParams& params, const Matrix& visual) {
    return mlp_forward(params.g_vs, visual);
}

Vector disc_v_forward(const ModelParams& params, const Matrix& visual, const Matrix& attributes) {
    require(visual.cols() + attributes.cols() == params.d_v.shape.input_dim &&
                attributes.cols() == params.attribute_dim(),
            "disc_v_forward: expected [B x K] visual and [B x L] attributes");
    return mlp_forward(params.d_v, hconcat(visual, attributes)).col(0);
}

Vector disc_s_forward(const ModelParams& params, const Matrix& attributes) {
    return mlp_forward(params.d_s, attributes).col(0);
}

} // namespace dascn
