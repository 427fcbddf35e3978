#pragma once

#include "dascn/core.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dascn {

// Deterministic sub-seed derivation: one root seed fans out into named
// streams (init, shuffle, noise, classifier, ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double gaussian() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev = 1.0);
    Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols);
    std::vector<int> permutation(int n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace dascn
