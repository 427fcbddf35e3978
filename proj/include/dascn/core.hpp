#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dascn {

// All matrices are row-major: one instance per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Labels = std::vector<int>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A required file is absent or unreadable.
struct LoadError : Error {
    using Error::Error;
};

// Payload disagrees with its metadata descriptor.
struct FormatError : Error {
    using Error::Error;
};

// Well-formed input that violates a domain rule.
struct ValidationError : Error {
    using Error::Error;
};

// Non-finite loss or parameter during optimization.
struct DivergenceError : Error {
    using Error::Error;
};

// Caller broke a precondition (shape mismatch, label out of range).
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Stacks two matrices side by side (same row count).
Matrix hconcat(const Matrix& left, const Matrix& right);

/// Gathers rows of `table` indexed by `rows`.
Matrix gather_rows(const Matrix& table, const std::vector<int>& rows);

} // namespace dascn
