#include "dascn/losses.hpp"

#include "dascn/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dascn {

void LossWeights::validate() const {
    const std::pair<const char*, double> named[] = {{"lambda1", lambda1}, {"lambda2", lambda2},
                                                    {"lambda3", lambda3}, {"lambda4", lambda4},
                                                    {"lambda5", lambda5}, {"lambda6", lambda6}};
    for (const auto& [name, w] : named)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ValidationError(std::string(name) + " must be finite and >= 0");
}

double classification_loss(const SoftmaxClassifier& cls, const Matrix& synth_visual,
                           const Labels& labels, Matrix* d_visual) {
    const auto batch = synth_visual.rows();
    require(batch == static_cast<Eigen::Index>(labels.size()) && batch >= 1,
            "classification_loss: need one label per row");
    Matrix probs = classifier_forward(cls, synth_visual);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const int j = cls.index_of(labels[static_cast<std::size_t>(i)]);
        require(j >= 0, "classification_loss: label " + std::to_string(labels[static_cast<std::size_t>(i)]) +
                            " is not a classifier class");
        loss -= std::log(probs(i, j));
        probs(i, j) -= 1.0;
    }
    if (d_visual) *d_visual = (probs / static_cast<double>(batch)) * cls.weight.transpose();
    return loss / static_cast<double>(batch);
}

RowVector class_centroid(const Matrix& features_of_class) {
    require(features_of_class.rows() >= 1, "class_centroid: empty class");
    return features_of_class.colwise().mean();
}

namespace {

std::map<int, std::vector<int>> rows_by_label(const Labels& labels) {
    std::map<int, std::vector<int>> out;
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(static_cast<int>(i));
    return out;
}

// mean_c ||centroid_c(rows) - target_c||, with the optional gradient w.r.t. rows.
double centroid_distance(const Matrix& rows, const std::map<int, std::vector<int>>& groups,
                         const std::map<int, RowVector>& targets, Matrix* d_rows) {
    const double n_groups = static_cast<double>(groups.size());
    if (d_rows) *d_rows = Matrix::Zero(rows.rows(), rows.cols());
    double loss = 0.0;
    for (const auto& [label, members] : groups) {
        RowVector centroid = RowVector::Zero(rows.cols());
        for (int r : members) centroid += rows.row(r);
        centroid /= static_cast<double>(members.size());
        const RowVector diff = centroid - targets.at(label);
        const double dist = diff.norm();
        loss += dist;
        if (d_rows && dist > 0.0) {
            const RowVector g = diff / (dist * n_groups * static_cast<double>(members.size()));
            for (int r : members) d_rows->row(r) = g;
        }
    }
    return loss / n_groups;
}

} // namespace

double semantic_centroid_loss(const Matrix& recon_attrs, const Labels& labels,
                              const Matrix& attributes, const std::vector<int>& seen_classes,
                              Matrix* d_recon) {
    require(recon_attrs.rows() == static_cast<Eigen::Index>(labels.size()) && !labels.empty(),
            "semantic_centroid_loss: need one label per row");
    require(recon_attrs.cols() == attributes.cols(), "semantic_centroid_loss: attribute width mismatch");
    const std::set<int> seen(seen_classes.begin(), seen_classes.end());
    const auto groups = rows_by_label(labels);
    std::map<int, RowVector> targets;
    for (const auto& [label, members] : groups) {
        require(seen.contains(label) && label < attributes.rows(),
                "semantic_centroid_loss: label " + std::to_string(label) + " is not a seen class");
        targets.emplace(label, attributes.row(label));
    }
    return centroid_distance(recon_attrs, groups, targets, d_recon);
}

double visual_consistency_loss(const Matrix& cycle_visual, const Labels& labels,
                               const std::map<int, Matrix>& real_visual_by_class, Matrix* d_cycle) {
    require(cycle_visual.rows() == static_cast<Eigen::Index>(labels.size()) && !labels.empty(),
            "visual_consistency_loss: need one label per row");
    const auto groups = rows_by_label(labels);
    std::map<int, RowVector> targets;
    for (const auto& [label, members] : groups) {
        const auto it = real_visual_by_class.find(label);
        require(it != real_visual_by_class.end() && it->second.rows() >= 1,
                "visual_consistency_loss: class " + std::to_string(label) + " has no real features");
        require(it->second.cols() == cycle_visual.cols(), "visual_consistency_loss: width mismatch");
        targets.emplace(label, class_centroid(it->second));
    }
    return centroid_distance(cycle_visual, groups, targets, d_cycle);
}

Vector ConditionedVisualCritic::scores(const Matrix& visual) const {
    return mlp_forward(*critic_, hconcat(visual, attributes_)).col(0);
}

Matrix ConditionedVisualCritic::input_gradient(const Matrix& visual) const {
    return critic_input_gradient(*critic_, hconcat(visual, attributes_)).leftCols(visual.cols());
}

Vector MlpCritic::scores(const Matrix& input) const { return mlp_forward(*critic_, input).col(0); }

Matrix MlpCritic::input_gradient(const Matrix& input) const {
    return critic_input_gradient(*critic_, input);
}

Vector interpolation_weights(Eigen::Index rows, std::uint64_t mix_seed) {
    Rng rng(mix_seed);
    Vector alpha(rows);
    for (Eigen::Index i = 0; i < rows; ++i) alpha(i) = rng.uniform();
    return alpha;
}

Matrix interpolate(const Matrix& real, const Matrix& fake, const Vector& alpha) {
    require(real.rows() == fake.rows() && real.cols() == fake.cols() && alpha.size() == real.rows(),
            "interpolate: shape mismatch");
    return (real.array().colwise() * alpha.array() + fake.array().colwise() * (1.0 - alpha.array()))
        .matrix();
}

double gradient_penalty(const DifferentiableCritic& critic, const Matrix& real, const Matrix& fake,
                        std::uint64_t mix_seed) {
    require(real.rows() >= 1, "gradient_penalty: empty batch");
    const Matrix mixed = interpolate(real, fake, interpolation_weights(real.rows(), mix_seed));
    const Matrix g = critic.input_gradient(mixed);
    const Vector norms = g.rowwise().norm();
    return (norms.array() - 1.0).square().mean();
}

namespace {

void check_batch(const ModelParams& params, const FeatureBatch& batch) {
    const auto b = batch.visual.rows();
    require(b >= 1, "empty batch");
    require(batch.visual.cols() == params.feature_dim(), "batch visual width != K");
    require(batch.attributes.rows() == b && batch.attributes.cols() == params.attribute_dim(),
            "batch attributes must be [B x L]");
    require(batch.noise.rows() == b && batch.noise.cols() == params.attribute_dim(),
            "batch noise must be [B x L]");
    require(static_cast<Eigen::Index>(batch.labels.size()) == b, "batch labels must have B entries");
}

// Adds the gradient of sign * mean(scores) to the critic's parameters.
double critic_mean(const Mlp& critic, const Matrix& input, double sign, Mlp* grad) {
    MlpCache cache;
    const Matrix out = mlp_forward(critic, input, &cache);
    if (grad) {
        const Matrix d = Matrix::Constant(out.rows(), 1, sign / static_cast<double>(out.rows()));
        mlp_backward(critic, cache, d, grad);
    }
    return out.mean();
}

} // namespace

CriticLoss disc_v_loss(const ModelParams& params, const FeatureBatch& batch,
                       const Matrix& synth_visual, const LossWeights& weights,
                       std::uint64_t mix_seed, Mlp* grad) {
    check_batch(params, batch);
    require(synth_visual.rows() == batch.visual.rows() && synth_visual.cols() == batch.visual.cols(),
            "disc_v_loss: synthetic features must match the batch shape");
    CriticLoss out;
    out.fake_mean = critic_mean(params.d_v, hconcat(synth_visual, batch.attributes), 1.0, grad);
    out.real_mean = critic_mean(params.d_v, hconcat(batch.visual, batch.attributes), -1.0, grad);
    const Matrix mixed =
        interpolate(batch.visual, synth_visual, interpolation_weights(batch.visual.rows(), mix_seed));
    out.penalty = critic_gradient_penalty(params.d_v, hconcat(mixed, batch.attributes), 0,
                                          params.feature_dim(), grad, weights.lambda1);
    out.total = out.fake_mean - out.real_mean + weights.lambda1 * out.penalty;
    return out;
}

CriticLoss disc_s_loss(const ModelParams& params, const FeatureBatch& batch,
                       const Matrix& recon_attrs, const LossWeights& weights,
                       std::uint64_t mix_seed, Mlp* grad) {
    check_batch(params, batch);
    require(recon_attrs.rows() == batch.attributes.rows() &&
                recon_attrs.cols() == batch.attributes.cols(),
            "disc_s_loss: reconstructed attributes must match the batch shape");
    CriticLoss out;
    out.fake_mean = critic_mean(params.d_s, recon_attrs, 1.0, grad);
    out.real_mean = critic_mean(params.d_s, batch.attributes, -1.0, grad);
    const Matrix mixed = interpolate(batch.attributes, recon_attrs,
                                     interpolation_weights(batch.attributes.rows(), mix_seed));
    out.penalty = critic_gradient_penalty(params.d_s, mixed, 0, params.attribute_dim(), grad,
                                          weights.lambda4);
    out.total = out.fake_mean - out.real_mean + weights.lambda4 * out.penalty;
    return out;
}

GeneratorGrads zero_generator_grads(const ModelParams& params) {
    return {params.g_sv.zeros_like(), params.g_vs.zeros_like()};
}

namespace {

struct PassCaches {
    MlpCache synth;
    MlpCache recon;
    MlpCache cycle;
};

GeneratorPass run_pass(const ModelParams& params, const FeatureBatch& batch,
                       const Matrix& cycle_noise, PassCaches& caches, bool with_dual) {
    GeneratorPass pass;
    pass.synth_visual = mlp_forward(params.g_sv, hconcat(batch.attributes, batch.noise), &caches.synth);
    if (!with_dual) return pass;
    require(cycle_noise.rows() == batch.noise.rows() && cycle_noise.cols() == batch.noise.cols(),
            "cycle noise must be [B x L]");
    pass.recon_attrs = mlp_forward(params.g_vs, pass.synth_visual, &caches.recon);
    pass.cycle_visual = mlp_forward(params.g_sv, hconcat(pass.recon_attrs, cycle_noise), &caches.cycle);
    return pass;
}

// Class-id-indexed attribute rows recovered from the batch.
Matrix attribute_table(const FeatureBatch& batch) {
    const int max_label = *std::ranges::max_element(batch.labels);
    Matrix table = Matrix::Zero(max_label + 1, batch.attributes.cols());
    for (std::size_t i = 0; i < batch.labels.size(); ++i)
        table.row(batch.labels[i]) = batch.attributes.row(static_cast<Eigen::Index>(i));
    return table;
}

// Sign * mean critic score; returns the gradient w.r.t. the critic input.
double critic_mean_input_grad(const Mlp& critic, const Matrix& input, double sign, Matrix* d_input) {
    MlpCache cache;
    const Matrix out = mlp_forward(critic, input, &cache);
    const Matrix d = Matrix::Constant(out.rows(), 1, sign / static_cast<double>(out.rows()));
    *d_input = mlp_backward(critic, cache, d, nullptr);
    return out.mean();
}

} // namespace

GeneratorPass generator_pass(const ModelParams& params, const FeatureBatch& batch,
                             const Matrix& cycle_noise) {
    check_batch(params, batch);
    PassCaches caches;
    return run_pass(params, batch, cycle_noise, caches, true);
}

GenSvLoss gen_sv_loss(const ModelParams& params, const FeatureBatch& batch,
                      const Matrix& cycle_noise, const LossWeights& weights,
                      const GeneratorLossOptions& options, GeneratorGrads* grad) {
    check_batch(params, batch);
    const int k = params.feature_dim();
    const int l = params.attribute_dim();
    const auto b = batch.visual.rows();
    PassCaches caches;
    const GeneratorPass pass = run_pass(params, batch, cycle_noise, caches, options.dual_term);

    GenSvLoss out;
    Matrix d_input;
    out.adv_synth =
        -critic_mean_input_grad(params.d_v, hconcat(pass.synth_visual, batch.attributes), -1.0, &d_input);
    Matrix d_synth = d_input.leftCols(k);

    Matrix d_cls;
    out.cls = classification_loss(params.cls_seen, pass.synth_visual, batch.labels, &d_cls);
    d_synth += weights.lambda2 * d_cls;

    if (options.dual_term) {
        Matrix d_recon = Matrix::Zero(b, l);
        Matrix d_cycle = Matrix::Zero(b, k);
        const bool cycle_pair = options.pairing == DualAdversarialPairing::cycle_visual;
        const Matrix& scored_visual = cycle_pair ? pass.cycle_visual : batch.visual;
        out.adv_recon =
            -critic_mean_input_grad(params.d_v, hconcat(scored_visual, pass.recon_attrs), -1.0, &d_input);
        d_recon += d_input.rightCols(l);
        if (cycle_pair) d_cycle += d_input.leftCols(k);

        Matrix d_vc;
        out.vc = visual_consistency_loss(pass.cycle_visual, batch.labels,
                                         group_rows_by_label(batch.visual, batch.labels), &d_vc);
        d_cycle += weights.lambda3 * d_vc;

        if (grad) {
            const Matrix d_cycle_in = mlp_backward(params.g_sv, caches.cycle, d_cycle, &grad->g_sv);
            d_recon += d_cycle_in.leftCols(l);
            d_synth += mlp_backward(params.g_vs, caches.recon, d_recon, &grad->g_vs);
        }
    }
    if (grad) mlp_backward(params.g_sv, caches.synth, d_synth, &grad->g_sv);

    out.total = out.adv_synth + out.adv_recon + weights.lambda2 * out.cls + weights.lambda3 * out.vc;
    return out;
}

GenVsLoss gen_vs_loss(const ModelParams& params, const FeatureBatch& batch,
                      const Matrix& cycle_noise, const LossWeights& weights, GeneratorGrads* grad) {
    check_batch(params, batch);
    const int l = params.attribute_dim();
    PassCaches caches;
    const GeneratorPass pass = run_pass(params, batch, cycle_noise, caches, true);

    GenVsLoss out;
    Matrix d_recon;
    out.adv = -critic_mean_input_grad(params.d_s, pass.recon_attrs, -1.0, &d_recon);

    Matrix d_sc;
    out.sc = semantic_centroid_loss(pass.recon_attrs, batch.labels, attribute_table(batch),
                                    params.cls_seen.classes, &d_sc);
    d_recon += weights.lambda5 * d_sc;

    Matrix d_vc;
    out.vc = visual_consistency_loss(pass.cycle_visual, batch.labels,
                                     group_rows_by_label(batch.visual, batch.labels), &d_vc);
    if (grad) {
        const Matrix d_cycle_in =
            mlp_backward(params.g_sv, caches.cycle, weights.lambda6 * d_vc, &grad->g_sv);
        d_recon += d_cycle_in.leftCols(l);
        const Matrix d_synth = mlp_backward(params.g_vs, caches.recon, d_recon, &grad->g_vs);
        mlp_backward(params.g_sv, caches.synth, d_synth, &grad->g_sv);
    }
    out.total = out.adv + weights.lambda5 * out.sc + weights.lambda6 * out.vc;
    return out;
}

} // namespace dascn
