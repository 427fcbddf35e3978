#include "support.hpp"

#include "dascn/networks.hpp"

#include <doctest.h>

using namespace dascn;
using test::numeric_gradient;
using test::relative_error;

namespace {

double mean_output(const Mlp& net, const Matrix& x) { return mlp_forward(net, x).mean(); }

// Analytic gradient of mean(output) for every tensor of `net`, checked
// against central differences.
void check_mlp_gradients(Mlp net, const Matrix& x) {
    MlpCache cache;
    const Matrix out = mlp_forward(net, x, &cache);
    Mlp grad = net.zeros_like();
    const Matrix d_out = Matrix::Constant(out.rows(), out.cols(), 1.0 / static_cast<double>(out.size()));
    const Matrix d_input = mlp_backward(net, cache, d_out, &grad);
    auto tensors = net.tensors();
    auto grads = grad.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const Matrix numeric = numeric_gradient(*tensors[t], [&] { return mean_output(net, x); });
        CHECK(relative_error(*grads[t], numeric) < 1e-4);
    }
    Matrix input = x;
    const Matrix numeric_in = numeric_gradient(input, [&] { return mean_output(net, input); });
    CHECK(relative_error(d_input, numeric_in) < 1e-4);
}

} // namespace

TEST_CASE("init_params: first G_SV layer takes a||z, width 2L") {
    const ModelParams p = init_params(test::small_dims(16, 4, 32, 3), 1);
    CHECK(p.g_sv.w1.rows() == 8);
    CHECK(p.g_sv.w1.cols() == 32);
    CHECK(p.g_sv.w2.cols() == 16);
    CHECK(p.g_vs.w1.rows() == 16);
    CHECK(p.g_vs.w2.cols() == 4);
    CHECK(p.d_v.w1.rows() == 20);
    CHECK(p.d_v.w2.cols() == 1);
    CHECK(p.d_s.w1.rows() == 4);
    CHECK(p.cls_seen.weight.rows() == 16);
    CHECK(p.cls_seen.weight.cols() == 3);
    CHECK_NOTHROW(p.check_consistent());
}

TEST_CASE("init_params: deterministic, zero biases, fan-in scaled weights") {
    const ModelDims dims = test::small_dims(16, 4, 400, 3);
    const ModelParams a = init_params(dims, 5);
    const ModelParams b = init_params(dims, 5);
    const ModelParams c = init_params(dims, 6);
    CHECK(a.g_sv == b.g_sv);
    CHECK(a.d_v == b.d_v);
    CHECK_FALSE(a.g_sv == c.g_sv);
    for (const Mlp* net : {&a.g_sv, &a.g_vs, &a.d_v, &a.d_s}) {
        CHECK(net->b1.isZero(0.0));
        CHECK(net->b2.isZero(0.0));
    }
    // 400*... entries of w2 in G_SV: std should be near 1/sqrt(400).
    const Matrix& w = a.g_sv.w2;
    const double mean = w.mean();
    const double sd = std::sqrt((w.array() - mean).square().sum() / static_cast<double>(w.size() - 1));
    CHECK(std::abs(mean) < 0.01);
    CHECK(sd == doctest::Approx(1.0 / 20.0).epsilon(0.1));
}

TEST_CASE("zero parameters give zero outputs and uniform class probabilities") {
    ModelDims dims = test::small_dims(6, 3, 5, 4);
    ModelParams p = init_params(dims, 0);
    for (Mlp* net : {&p.g_sv, &p.g_vs, &p.d_v, &p.d_s}) *net = net->zeros_like();
    Rng rng(1);
    const Matrix a = rng.uniform_matrix(7, 3), z = rng.gaussian_matrix(7, 3), x = rng.uniform_matrix(7, 6);
    CHECK(gen_sv_forward(p, a, z).isZero(0.0));
    CHECK(gen_vs_forward(p, x).isZero(0.0));
    CHECK(disc_v_forward(p, x, a).isZero(0.0));
    CHECK(disc_s_forward(p, a).isZero(0.0));
    const Matrix probs = classifier_forward(p.cls_seen, x);
    CHECK((probs.array() - 0.25).abs().maxCoeff() < 1e-15);
}

TEST_CASE("forward shapes") {
    const ModelParams p = test::random_params(test::small_dims(6, 3, 5, 3), 2);
    Rng rng(3);
    for (int B : {1, 4, 9}) {
        const Matrix x = rng.uniform_matrix(B, 6), a = rng.uniform_matrix(B, 3);
        CHECK(gen_vs_forward(p, x).rows() == B);
        CHECK(gen_vs_forward(p, x).cols() == 3);
        CHECK(disc_v_forward(p, x, a).size() == B);
        CHECK(disc_s_forward(p, a).size() == B);
    }
}

TEST_CASE("shape mismatch is a contract violation") {
    const ModelParams p = test::random_params(test::small_dims(6, 3, 5, 3), 2);
    CHECK_THROWS_AS(gen_sv_forward(p, Matrix::Zero(2, 3), Matrix::Zero(2, 2)), ContractViolation);
    CHECK_THROWS_AS(gen_vs_forward(p, Matrix::Zero(2, 5)), ContractViolation);
    CHECK_THROWS_AS(disc_v_forward(p, Matrix::Zero(2, 6), Matrix::Zero(3, 3)), ContractViolation);
    CHECK_THROWS_AS(classifier_forward(p.cls_seen, Matrix::Zero(2, 4)), ContractViolation);
}

TEST_CASE("G_SV output is nonnegative for arbitrary inputs") {
    Rng rng(11);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ModelParams p = init_params(test::small_dims(8, 3, 12, 2), seed);
        const Matrix a = rng.gaussian_matrix(16, 3, 5.0), z = rng.gaussian_matrix(16, 3, 5.0);
        CHECK(gen_sv_forward(p, a, z).minCoeff() >= 0.0);
    }
}

TEST_CASE("critic scores are unbounded: scaling the last layer scales scores") {
    ModelParams p = test::random_params(test::small_dims(6, 3, 5, 3), 4);
    Rng rng(4);
    const Matrix x = rng.uniform_matrix(5, 6), a = rng.uniform_matrix(5, 3);
    const Vector before_v = disc_v_forward(p, x, a), before_s = disc_s_forward(p, a);
    for (Mlp* net : {&p.d_v, &p.d_s}) {
        net->w2 *= 7.0;
        net->b2 *= 7.0;
    }
    CHECK(relative_error(disc_v_forward(p, x, a), 7.0 * before_v) < 1e-14);
    CHECK(relative_error(disc_s_forward(p, a), 7.0 * before_s) < 1e-14);
}

TEST_CASE("MLP gradients match central differences for all four networks") {
    const ModelParams p = test::random_params(test::small_dims(6, 3, 7, 3), 21);
    Rng rng(22);
    const Matrix az = rng.gaussian_matrix(5, 6);
    check_mlp_gradients(p.g_sv, az);
    check_mlp_gradients(p.g_vs, rng.uniform_matrix(5, 6));
    check_mlp_gradients(p.d_v, rng.uniform_matrix(5, 9));
    check_mlp_gradients(p.d_s, rng.uniform_matrix(5, 3));
}

TEST_CASE("critic input gradient matches central differences per row") {
    const ModelParams p = test::random_params(test::small_dims(6, 3, 7, 3), 30);
    Rng rng(31);
    for (const Mlp* critic : {&p.d_v, &p.d_s}) {
        Matrix x = rng.uniform_matrix(4, critic->shape.input_dim);
        const Matrix analytic = critic_input_gradient(*critic, x);
        // Rows are independent, so the gradient of the score sum gives every row at once.
        const Matrix numeric = numeric_gradient(x, [&] { return mlp_forward(*critic, x).sum(); });
        CHECK(relative_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("critic gradient-penalty parameter gradients match central differences") {
    ModelParams p = test::random_params(test::small_dims(6, 3, 7, 3), 40);
    Rng rng(41);
    const Matrix input = rng.uniform_matrix(5, 9);
    Mlp grad = p.d_v.zeros_like();
    const double scale = 2.5;
    critic_gradient_penalty(p.d_v, input, 0, 6, &grad, scale);
    auto tensors = p.d_v.tensors();
    auto grads = grad.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const Matrix numeric = numeric_gradient(
            *tensors[t], [&] { return scale * critic_gradient_penalty(p.d_v, input, 0, 6); });
        CHECK(relative_error(*grads[t], numeric) < 1e-4);
    }
}

TEST_CASE("classifier rows are a probability simplex and shift invariant") {
    const ModelParams p = test::random_params(test::small_dims(6, 3, 5, 4), 50);
    Rng rng(51);
    const Matrix x = rng.gaussian_matrix(20, 6, 3.0);
    const Matrix probs = classifier_forward(p.cls_seen, x);
    CHECK(probs.minCoeff() >= 0.0);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) CHECK(std::abs(probs.row(i).sum() - 1.0) < 1e-6);

    Matrix logits = classifier_logits(p.cls_seen, x);
    Matrix shifted = logits;
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.row(i).array() += 100.0 * rng.gaussian();
    CHECK((softmax_rows(logits) - softmax_rows(shifted)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("output activation names round trip") {
    CHECK(parse_output_activation(to_string(OutputActivation::relu)) == OutputActivation::relu);
    CHECK(parse_output_activation(to_string(OutputActivation::none)) == OutputActivation::none);
    CHECK_THROWS_AS(parse_output_activation("tanh"), ValidationError);
}
