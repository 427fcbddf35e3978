#pragma once

#include "dascn/classifier.hpp"
#include "dascn/data.hpp"
#include "dascn/networks.hpp"

#include <cstdint>
#include <vector>

namespace dascn {

struct SynthesisRequest {
    std::vector<int> classes;
    int n_per_class = 300;
    std::uint64_t seed = 0;
};

struct SyntheticFeatures {
    Matrix features; // [classes * n_per_class x K], one contiguous block per class
    Labels labels;
};

/// G_SV(a_c, z) for fresh standard-Gaussian z, n_per_class rows per class.
SyntheticFeatures synthesize_features(const ModelParams& model, const DatasetBundle& bundle,
                                      const SynthesisRequest& request);

// Which real rows join the synthesized ones when fitting the final classifier.
enum class RealFeatureMode { none, seen };

/// Softmax classifier over `all_classes`; every class needs >= 1 row.
ClassifierFit fit_gzsl_classifier(const Matrix& features, const Labels& labels,
                                  const std::vector<int>& all_classes,
                                  const ClassifierFitOptions& options);

/// Synthesized rows, optionally followed by the real seen-class training rows.
SyntheticFeatures gzsl_training_set(const SyntheticFeatures& synthesized,
                                    const DatasetBundle& bundle, RealFeatureMode mode);

} // namespace dascn
