#pragma once

#include "dascn/core.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dascn {

enum class OutputActivation { relu, none };

std::string to_string(OutputActivation a);
OutputActivation parse_output_activation(const std::string& name);

// One hidden layer with a leaky rectifier, then a linear output layer with an
// optional rectifier.
struct NetworkShape {
    int input_dim = 1;
    int hidden_dim = 4096;
    int output_dim = 1;
    double leaky_slope = 0.2;
    OutputActivation output_activation = OutputActivation::none;

    bool operator==(const NetworkShape&) const = default;
};

// Weights are stored input-major: w1 is [input x hidden], w2 is [hidden x output],
// biases are single-row matrices. The same struct holds gradients.
struct Mlp {
    NetworkShape shape;
    Matrix w1, b1, w2, b2;

    static Mlp zeros(const NetworkShape& shape);
    Mlp zeros_like() const { return zeros(shape); }

    std::array<Matrix*, 4> tensors() { return {&w1, &b1, &w2, &b2}; }
    std::array<const Matrix*, 4> tensors() const { return {&w1, &b1, &w2, &b2}; }

    bool all_finite() const;
    double squared_norm() const;
};

// Intermediate values of one forward pass, needed for backprop.
struct MlpCache {
    Matrix input;
    Matrix pre_hidden;
    Matrix hidden;
    Matrix pre_output;
};

Matrix mlp_forward(const Mlp& net, const Matrix& input, MlpCache* cache = nullptr);

/// Accumulates parameter gradients of <d_output, output> into `grad` and
/// returns the gradient w.r.t. the input.
Matrix mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& d_output, Mlp* grad);

/// d score_i / d input_i for a scalar-output critic, one row per instance.
Matrix critic_input_gradient(const Mlp& critic, const Matrix& input);

/// Gradient-penalty term mean_i (||g_i|| - 1)^2, where g_i is the critic's
/// input gradient restricted to columns [col_begin, col_begin + col_count).
/// When `grad` is non-null, accumulates scale * d(penalty)/d(params).
double critic_gradient_penalty(const Mlp& critic, const Matrix& input, int col_begin,
                               int col_count, Mlp* grad = nullptr, double scale = 1.0);

// Linear softmax classifier. Column j of the logits scores classes[j].
struct SoftmaxClassifier {
    Matrix weight; // [K x C]
    Matrix bias;   // [1 x C]
    std::vector<int> classes;

    static SoftmaxClassifier zeros(int feature_dim, std::vector<int> classes);
    int n_classes() const { return static_cast<int>(classes.size()); }
    int feature_dim() const { return static_cast<int>(weight.rows()); }

    /// Column index of `class_id`, or -1.
    int index_of(int class_id) const;

    std::array<Matrix*, 2> tensors() { return {&weight, &bias}; }
    std::array<const Matrix*, 2> tensors() const { return {&weight, &bias}; }

    bool operator==(const SoftmaxClassifier& other) const;
};

Matrix classifier_logits(const SoftmaxClassifier& cls, const Matrix& visual);

/// Row-wise softmax, max-shifted.
Matrix softmax_rows(const Matrix& logits);

Matrix classifier_forward(const SoftmaxClassifier& cls, const Matrix& visual);

struct ModelDims {
    int feature_dim = 0;   // K
    int attribute_dim = 0; // L; noise has the same width
    std::vector<int> seen_classes;
    int hidden_dim = 4096;
    double leaky_slope = 0.2;
    OutputActivation gvs_output = OutputActivation::relu;
};

struct ModelParams {
    Mlp g_sv; // a||z  -> x   (2L -> K)
    Mlp g_vs; // x     -> a   (K -> L)
    Mlp d_v;  // x||a  -> score (K+L -> 1)
    Mlp d_s;  // a     -> score (L -> 1)
    SoftmaxClassifier cls_seen;

    int feature_dim() const { return g_sv.shape.output_dim; }
    int attribute_dim() const { return g_vs.shape.output_dim; }
    bool all_finite() const;
    void check_consistent() const;
};

/// Fan-in scaled Gaussian weights, zero biases, zero classifier.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

// Shape-checked forwards of the four networks.
Matrix gen_sv_forward(const ModelParams& params, const Matrix& attributes, const Matrix& noise);
Matrix gen_vs_forward(const ModelParams& params, const Matrix& visual);
Vector disc_v_forward(const ModelParams& params, const Matrix& visual, const Matrix& attributes);
Vector disc_s_forward(const ModelParams& params, const Matrix& attributes);

bool operator==(const Mlp& a, const Mlp& b);

} // namespace dascn
