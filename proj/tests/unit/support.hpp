#pragma once

// Shared fixtures for the unit suites: small random models, batches and a
// central-difference gradient oracle.

#include "dascn/data.hpp"
#include "dascn/networks.hpp"
#include "dascn/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

namespace dascn::test {

inline ModelDims small_dims(int K = 6, int L = 3, int hidden = 5, int n_seen = 3) {
    ModelDims d;
    d.feature_dim = K;
    d.attribute_dim = L;
    d.hidden_dim = hidden;
    for (int c = 0; c < n_seen; ++c) d.seen_classes.push_back(c);
    return d;
}

// Random weights and biases everywhere, classifier included, so that no
// gradient path is trivially zero.
inline ModelParams random_params(const ModelDims& dims, std::uint64_t seed) {
    ModelParams p = init_params(dims, seed);
    Rng rng(derive_seed(seed, "test_biases"));
    for (Mlp* net : {&p.g_sv, &p.g_vs, &p.d_v, &p.d_s}) {
        net->b1 = rng.gaussian_matrix(1, net->b1.cols(), 0.3);
        net->b2 = rng.gaussian_matrix(1, net->b2.cols(), 0.3);
        // Positive output bias keeps rectified outputs away from the kink.
        if (net->shape.output_activation == OutputActivation::relu) net->b2.array() += 1.0;
    }
    p.cls_seen.weight = rng.gaussian_matrix(dims.feature_dim, static_cast<Eigen::Index>(dims.seen_classes.size()));
    p.cls_seen.bias = rng.gaussian_matrix(1, static_cast<Eigen::Index>(dims.seen_classes.size()), 0.5);
    return p;
}

// A batch over classes 0..n_classes-1 whose attribute rows come from `attributes`.
inline FeatureBatch random_batch(const Matrix& attributes, int K, const Labels& labels, std::uint64_t seed) {
    Rng rng(seed);
    FeatureBatch b;
    b.labels = labels;
    b.visual = rng.uniform_matrix(static_cast<Eigen::Index>(labels.size()), K);
    b.attributes = gather_rows(attributes, labels);
    b.noise = rng.gaussian_matrix(static_cast<Eigen::Index>(labels.size()), attributes.cols());
    return b;
}

/// Central differences of `f` w.r.t. every entry of `param`, restored after.
inline Matrix numeric_gradient(Matrix& param, const std::function<double()>& f, double h = 1e-5) {
    Matrix g(param.rows(), param.cols());
    for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double saved = param.data()[i];
        param.data()[i] = saved + h;
        const double up = f();
        param.data()[i] = saved - h;
        const double down = f();
        param.data()[i] = saved;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), with an absolute floor for vanishing gradients.
inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-8) {
    const double scale = std::max({a.norm(), b.norm(), floor});
    return (a - b).norm() / scale;
}

// Fresh scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("dascn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace dascn::test
