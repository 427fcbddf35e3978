#include "dascn/random.hpp"

#include <numeric>

namespace dascn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a
std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
    return splitmix64(splitmix64(root) ^ hash_name(name));
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(splitmix64(root) + 0x632BE59BD9B4E019ULL * (index + 1));
}

Matrix Rng::gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = stddev * gaussian();
    return m;
}

Matrix Rng::uniform_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform();
    return m;
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    // Explicit Fisher-Yates: std::shuffle's draw sequence is library-specific.
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(engine_() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

Matrix hconcat(const Matrix& left, const Matrix& right) {
    require(left.rows() == right.rows(), "hconcat: row count mismatch");
    Matrix out(left.rows(), left.cols() + right.cols());
    out.leftCols(left.cols()) = left;
    out.rightCols(right.cols()) = right;
    return out;
}

Matrix gather_rows(const Matrix& table, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), table.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] >= 0 && rows[i] < table.rows(), "gather_rows: index out of range");
        out.row(static_cast<Eigen::Index>(i)) = table.row(rows[i]);
    }
    return out;
}

} // namespace dascn
