#include "support.hpp"

#include "dascn/losses.hpp"

#include <doctest.h>

using namespace dascn;
using test::numeric_gradient;
using test::relative_error;

namespace {

constexpr double kTolerance = 1e-3;
// Norm floor for the relative error. Central differences at h = 1e-5 carry
// ~1e-11 of roundoff per entry, so an exactly-zero analytic gradient (e.g. a
// critic's output bias, which cancels between real and fake means) must not
// be divided by something smaller.
constexpr double kFloor = 1e-6;

struct Case {
    ModelDims dims;
    ModelParams params;
    Matrix attributes;
    FeatureBatch batch;
    Matrix cycle_noise;
};

// Random small shapes within K <= 16, L <= 4, hidden <= 32, B <= 8.
Case random_case(std::uint64_t seed) {
    Rng rng(seed);
    const int L = 1 + static_cast<int>(rng.uniform() * 4);
    const int K = L + static_cast<int>(rng.uniform() * (17 - L));
    const int hidden = 2 + static_cast<int>(rng.uniform() * 31);
    const int B = 2 + static_cast<int>(rng.uniform() * 7);
    const int n_seen = 2 + static_cast<int>(rng.uniform() * 2);
    Case c;
    c.dims = test::small_dims(K, L, hidden, n_seen);
    c.params = test::random_params(c.dims, seed * 31 + 1);
    c.attributes = rng.uniform_matrix(n_seen, L);
    Labels y;
    for (int i = 0; i < B; ++i) y.push_back(i % n_seen);
    c.batch = test::random_batch(c.attributes, K, y, seed * 17 + 3);
    c.cycle_noise = rng.gaussian_matrix(B, L);
    return c;
}

void check_net(Mlp& net, const Mlp& analytic, const std::function<double()>& loss, const char* what) {
    auto tensors = net.tensors();
    auto grads = analytic.tensors();
    const char* names[] = {"w1", "b1", "w2", "b2"};
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const Matrix numeric = numeric_gradient(*tensors[t], loss);
        const std::string label = std::string(what) + "." + names[t];
        INFO(label);
        CHECK(relative_error(*grads[t], numeric, kFloor) < kTolerance);
    }
}

const LossWeights kWeights{1.5, 0.7, 0.9, 2.5, 0.8, 0.6};

} // namespace

TEST_SUITE("gradients") {

TEST_CASE("L_CLS input gradient") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
        Case c = random_case(s);
        Rng rng(s);
        Matrix x = rng.gaussian_matrix(c.batch.visual.rows(), c.dims.feature_dim);
        Matrix d;
        classification_loss(c.params.cls_seen, x, c.batch.labels, &d);
        const Matrix numeric =
            numeric_gradient(x, [&] { return classification_loss(c.params.cls_seen, x, c.batch.labels); });
        CHECK(relative_error(d, numeric, kFloor) < kTolerance);
    }
}

TEST_CASE("L_SC input gradient") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
        Case c = random_case(s + 10);
        Rng rng(s);
        Matrix r = rng.uniform_matrix(c.batch.visual.rows(), c.dims.attribute_dim);
        const auto loss = [&] {
            return semantic_centroid_loss(r, c.batch.labels, c.attributes, c.dims.seen_classes);
        };
        Matrix d;
        semantic_centroid_loss(r, c.batch.labels, c.attributes, c.dims.seen_classes, &d);
        CHECK(relative_error(d, numeric_gradient(r, loss), kFloor) < kTolerance);
    }
}

TEST_CASE("L_VC input gradient") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
        Case c = random_case(s + 20);
        Rng rng(s);
        Matrix x = rng.uniform_matrix(c.batch.visual.rows(), c.dims.feature_dim);
        const auto real = group_rows_by_label(c.batch.visual, c.batch.labels);
        const auto loss = [&] { return visual_consistency_loss(x, c.batch.labels, real); };
        Matrix d;
        visual_consistency_loss(x, c.batch.labels, real, &d);
        CHECK(relative_error(d, numeric_gradient(x, loss), kFloor) < kTolerance);
    }
}

TEST_CASE("D_V objective w.r.t. critic parameters, penalty included") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
        Case c = random_case(s + 30);
        const Matrix synth = gen_sv_forward(c.params, c.batch.attributes, c.batch.noise);
        Mlp grad = c.params.d_v.zeros_like();
        disc_v_loss(c.params, c.batch, synth, kWeights, 9, &grad);
        check_net(c.params.d_v, grad, [&] { return disc_v_loss(c.params, c.batch, synth, kWeights, 9).total; },
                  "d_v");
    }
}

TEST_CASE("D_S objective w.r.t. critic parameters, penalty included") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
        Case c = random_case(s + 40);
        const Matrix recon =
            gen_vs_forward(c.params, gen_sv_forward(c.params, c.batch.attributes, c.batch.noise));
        Mlp grad = c.params.d_s.zeros_like();
        disc_s_loss(c.params, c.batch, recon, kWeights, 4, &grad);
        check_net(c.params.d_s, grad, [&] { return disc_s_loss(c.params, c.batch, recon, kWeights, 4).total; },
                  "d_s");
    }
}

TEST_CASE("G_SV objective w.r.t. both generators") {
    for (auto pairing : {DualAdversarialPairing::real_visual, DualAdversarialPairing::cycle_visual}) {
        for (std::uint64_t s = 1; s <= 3; ++s) {
            Case c = random_case(s + 50);
            GeneratorLossOptions o;
            o.pairing = pairing;
            GeneratorGrads g = zero_generator_grads(c.params);
            gen_sv_loss(c.params, c.batch, c.cycle_noise, kWeights, o, &g);
            const auto loss = [&] { return gen_sv_loss(c.params, c.batch, c.cycle_noise, kWeights, o).total; };
            check_net(c.params.g_sv, g.g_sv, loss, "g_sv");
            check_net(c.params.g_vs, g.g_vs, loss, "g_vs");
        }
    }
}

TEST_CASE("G_SV single-GAN objective") {
    for (std::uint64_t s = 1; s <= 3; ++s) {
        Case c = random_case(s + 60);
        GeneratorLossOptions o;
        o.dual_term = false;
        GeneratorGrads g = zero_generator_grads(c.params);
        gen_sv_loss(c.params, c.batch, c.cycle_noise, kWeights, o, &g);
        check_net(c.params.g_sv, g.g_sv,
                  [&] { return gen_sv_loss(c.params, c.batch, c.cycle_noise, kWeights, o).total; }, "g_sv");
        CHECK(g.g_vs.squared_norm() == 0.0);
    }
}

TEST_CASE("G_VS objective w.r.t. both generators") {
    for (std::uint64_t s = 1; s <= 4; ++s) {
        Case c = random_case(s + 70);
        GeneratorGrads g = zero_generator_grads(c.params);
        gen_vs_loss(c.params, c.batch, c.cycle_noise, kWeights, &g);
        const auto loss = [&] { return gen_vs_loss(c.params, c.batch, c.cycle_noise, kWeights).total; };
        check_net(c.params.g_vs, g.g_vs, loss, "g_vs");
        check_net(c.params.g_sv, g.g_sv, loss, "g_sv");
    }
}

} // TEST_SUITE gradients
