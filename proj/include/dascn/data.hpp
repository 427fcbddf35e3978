#pragma once

#include "dascn/core.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dascn {

// Class ids index rows of `attributes`; seen and unseen ids partition
// [0, attributes.rows()) or a subset of it.
struct DatasetBundle {
    Matrix visual_train;
    Labels labels_train;
    Matrix visual_test_seen;
    Labels labels_test_seen;
    Matrix visual_test_unseen;
    Labels labels_test_unseen;
    Matrix attributes;
    std::vector<int> seen_classes;
    std::vector<int> unseen_classes;

    int feature_dim() const { return static_cast<int>(visual_train.cols()); }
    int attribute_dim() const { return static_cast<int>(attributes.cols()); }
    int n_classes() const { return static_cast<int>(attributes.rows()); }
    int n_train() const { return static_cast<int>(visual_train.rows()); }

    std::vector<int> all_classes() const;

    /// Throws ValidationError on any broken invariant (disjoint partition,
    /// label membership, attribute coverage, finiteness, shapes).
    void validate() const;
};

struct SyntheticSpec {
    int n_seen_classes = 3;
    int n_unseen_classes = 2;
    int feature_dim = 16;
    int attribute_dim = 4;
    int samples_per_class = 50;
    double cluster_std = 0.1;
    std::uint64_t projection_seed = 7;
    std::uint64_t noise_seed = 11;

    void validate() const;
};

struct LoadOptions {
    // Per-feature min-max scaling fitted on the training split.
    bool normalize_features = false;
};

/// Reads a dataset directory: meta.json plus little-endian f32/i32 payloads.
DatasetBundle load_dataset(const std::filesystem::path& root, const std::string& split_name = {},
                           const LoadOptions& options = {});

// Raw little-endian payload writers (row-major f32, i32).
void write_f32(const std::filesystem::path& path, const Matrix& m);
void write_i32(const std::filesystem::path& path, const Labels& labels);

/// Writes `bundle` in the layout `load_dataset` reads.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& root,
                  const std::string& name = "dataset");

/// Gaussian-cluster oracle: class means are a fixed linear image M·a_c of
/// uniformly drawn attributes.
DatasetBundle make_synthetic_dataset(const SyntheticSpec& spec);

/// The oracle's attribute-to-visual map M [K x L] for `spec`.
Matrix synthetic_projection(const SyntheticSpec& spec);

/// Per-feature min-max scaling fitted on visual_train, applied to all splits.
void normalize_features(DatasetBundle& bundle);

struct FeatureBatch {
    Matrix visual;     // [B x K]
    Matrix attributes; // [B x L], row i is the attribute vector of labels[i]
    Labels labels;     // [B]
    Matrix noise;      // [B x L], standard Gaussian
};

/// Single-pass shuffled mini-batches over the training split.
class BatchIterator {
public:
    BatchIterator(const DatasetBundle& bundle, int batch_size, std::uint64_t epoch_seed);

    std::optional<FeatureBatch> next();

    int batches_per_epoch() const { return n_batches_; }
    const std::vector<int>& order() const { return order_; }

    // Set when batch_size exceeded the training row count.
    bool truncated() const { return truncated_; }
    const std::string& warning() const { return warning_; }

private:
    const DatasetBundle* bundle_;
    int batch_size_;
    int n_batches_;
    int cursor_ = 0;
    std::vector<int> order_;
    std::uint64_t noise_seed_;
    bool truncated_ = false;
    std::string warning_;
};

/// Collects every batch of one epoch.
std::vector<FeatureBatch> epoch_batches(const DatasetBundle& bundle, int batch_size,
                                        std::uint64_t epoch_seed);

/// Builds a batch for explicit row indices of the training split.
FeatureBatch make_batch(const DatasetBundle& bundle, const std::vector<int>& rows, Matrix noise);

/// Rows of `features` grouped by label, preserving row order.
std::map<int, Matrix> group_rows_by_label(const Matrix& features, const Labels& labels);

} // namespace dascn
