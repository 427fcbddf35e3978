#pragma once

#include "dascn/core.hpp"

#include <span>
#include <vector>

namespace dascn {

struct AdamSettings {
    double learning_rate = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double epsilon = 1e-8;

    void validate() const;
    bool operator==(const AdamSettings&) const = default;
};

// Adaptive-moment optimizer over a fixed list of parameter tensors.
class Adam {
public:
    explicit Adam(AdamSettings settings) : settings_(settings) {}

    /// params[i] -= lr * m_hat / (sqrt(v_hat) + eps), moments lazily sized on first use.
    void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);

    long steps() const { return t_; }

private:
    AdamSettings settings_;
    std::vector<Matrix> m_, v_;
    long t_ = 0;
};

/// Euclidean norm over a list of tensors.
double global_norm(std::span<const Matrix* const> tensors);

} // namespace dascn
