#include "dascn/synthesis.hpp"

#include "dascn/random.hpp"

#include <set>

namespace dascn {

SyntheticFeatures synthesize_features(const ModelParams& model, const DatasetBundle& bundle,
                                      const SynthesisRequest& request) {
    if (request.n_per_class < 1) throw ValidationError("n_per_class must be >= 1");
    if (request.classes.empty()) throw ValidationError("synthesis request names no classes");
    for (int c : request.classes)
        if (c < 0 || c >= bundle.attributes.rows())
            throw ValidationError("class " + std::to_string(c) + " has no attribute row");
    require(bundle.attribute_dim() == model.attribute_dim(), "model/bundle attribute width mismatch");

    const auto n = static_cast<Eigen::Index>(request.n_per_class);
    const auto total = n * static_cast<Eigen::Index>(request.classes.size());
    SyntheticFeatures out;
    out.features.resize(total, model.feature_dim());
    out.labels.reserve(static_cast<std::size_t>(total));
    Rng rng(request.seed);
    Eigen::Index row = 0;
    for (int c : request.classes) {
        const Matrix attrs = bundle.attributes.row(c).replicate(n, 1);
        const Matrix noise = rng.gaussian_matrix(n, model.attribute_dim());
        out.features.middleRows(row, n) = gen_sv_forward(model, attrs, noise);
        out.labels.insert(out.labels.end(), static_cast<std::size_t>(n), c);
        row += n;
    }
    return out;
}

ClassifierFit fit_gzsl_classifier(const Matrix& features, const Labels& labels,
                                  const std::vector<int>& all_classes,
                                  const ClassifierFitOptions& options) {
    const std::set<int> present(labels.begin(), labels.end());
    for (int c : all_classes)
        if (!present.contains(c))
            throw ValidationError("class " + std::to_string(c) + " has no training rows");
    return fit_softmax_classifier(features, labels, all_classes, options);
}

SyntheticFeatures gzsl_training_set(const SyntheticFeatures& synthesized,
                                    const DatasetBundle& bundle, RealFeatureMode mode) {
    if (mode == RealFeatureMode::none) return synthesized;
    SyntheticFeatures out;
    out.features.resize(synthesized.features.rows() + bundle.visual_train.rows(),
                        synthesized.features.cols());
    out.features.topRows(synthesized.features.rows()) = synthesized.features;
    out.features.bottomRows(bundle.visual_train.rows()) = bundle.visual_train;
    out.labels = synthesized.labels;
    out.labels.insert(out.labels.end(), bundle.labels_train.begin(), bundle.labels_train.end());
    return out;
}

} // namespace dascn
