#pragma once

#include "dascn/classifier.hpp"
#include "dascn/data.hpp"
#include "dascn/synthesis.hpp"
#include "dascn/trainer.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dascn {

struct ClassAccuracy {
    double mean = 0.0; // unweighted over classes
    std::map<int, double> per_class;
    std::map<int, int> counts;
};

/// correct/total within each class of `class_set`, averaged over classes.
ClassAccuracy per_class_accuracy(const Labels& predictions, const Labels& labels,
                                 const std::vector<int>& class_set);

/// 2*ts*tr/(ts+tr), or 0 when ts+tr == 0. Inputs must lie in [0,1].
double harmonic_mean(double ts, double tr);

struct EvalConfig {
    int n_per_class = 300;
    RealFeatureMode real_features = RealFeatureMode::seen;
    ClassifierFitOptions classifier;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EvalReport {
    double ts = 0.0; // unseen-split mean per-class accuracy, all-class search space
    double tr = 0.0; // seen-split analog
    double H = 0.0;
    std::map<int, double> per_class_acc;
    std::map<int, int> n_test_per_class;
    // Confusion summary across the seen/unseen boundary.
    double seen_predicted_unseen = 0.0; // fraction of seen test rows
    double unseen_predicted_seen = 0.0; // fraction of unseen test rows
    int n_per_class = 0;

    /// Recomputes H from ts/tr and compares within `tol`.
    bool h_consistent(double tol = 1e-12) const;
};

/// Scores both test splits with a classifier over seen + unseen classes.
EvalReport evaluate_classifier(const SoftmaxClassifier& cls, const DatasetBundle& bundle);

/// Synthesize for every class, fit the final classifier, score both splits.
EvalReport evaluate_gzsl(const ModelParams& model, const DatasetBundle& bundle,
                         const EvalConfig& config);

struct AblationRow {
    Variant variant;
    EvalReport report;    // final classifier fit under eval_config.real_features
    EvalReport alternate; // same generator, the other real-feature mode
};

RealFeatureMode other_mode(RealFeatureMode mode);
std::string to_string(RealFeatureMode mode);

/// One train + evaluate cycle per variant, all with the same seeds.
std::vector<AblationRow> run_ablation(const DatasetBundle& bundle, const TrainConfig& base_config,
                                      const EvalConfig& eval_config,
                                      const std::vector<Variant>& variants);

struct CurvePoint {
    int n_per_class = 0;
    double ts = 0.0;
    double tr = 0.0;
    double H = 0.0;
};

/// Refits only the final classifier for each synthesis count.
std::vector<CurvePoint> sweep_samples(const ModelParams& model, const DatasetBundle& bundle,
                                      const EvalConfig& config, const std::vector<int>& counts);

/// Trains once, then sweeps.
std::vector<CurvePoint> sweep_samples(const DatasetBundle& bundle, const TrainConfig& train_config,
                                      const EvalConfig& config, const std::vector<int>& counts);

// Report emitters: aligned plain text and line-delimited JSON.
std::string format_report_text(const std::string& title, const std::vector<std::string>& row_names,
                               const std::vector<EvalReport>& reports);
std::string format_report_jsonl(const std::vector<std::string>& row_names,
                                const std::vector<EvalReport>& reports);
std::string format_curve_json(const std::vector<CurvePoint>& curve);

} // namespace dascn
