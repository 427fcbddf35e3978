#include "dascn/evaluation.hpp"

#include "dascn/random.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

namespace dascn {

using nlohmann::json;

ClassAccuracy per_class_accuracy(const Labels& predictions, const Labels& labels,
                                 const std::vector<int>& class_set) {
    require(predictions.size() == labels.size(), "per_class_accuracy: length mismatch");
    if (class_set.empty()) throw ValidationError("per_class_accuracy: empty class set");
    const std::set<int> classes(class_set.begin(), class_set.end());
    std::map<int, int> total, correct;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(classes.contains(labels[i]),
                "per_class_accuracy: label " + std::to_string(labels[i]) + " outside the class set");
        ++total[labels[i]];
        if (predictions[i] == labels[i]) ++correct[labels[i]];
    }
    ClassAccuracy out;
    for (int c : classes) {
        const int n = total[c];
        if (n == 0) throw ValidationError("class " + std::to_string(c) + " has no test rows");
        const double acc = static_cast<double>(correct[c]) / static_cast<double>(n);
        out.per_class[c] = acc;
        out.counts[c] = n;
        out.mean += acc;
    }
    out.mean /= static_cast<double>(classes.size());
    return out;
}

double harmonic_mean(double ts, double tr) {
    require(ts >= 0.0 && ts <= 1.0 && tr >= 0.0 && tr <= 1.0,
            "harmonic_mean: inputs must lie in [0, 1]");
    const double sum = ts + tr;
    return sum > 0.0 ? 2.0 * ts * tr / sum : 0.0;
}

void EvalConfig::validate() const {
    if (n_per_class < 1) throw ValidationError("n_per_class must be >= 1");
    classifier.validate();
}

bool EvalReport::h_consistent(double tol) const {
    const double expected = ts + tr > 0.0 ? 2.0 * ts * tr / (ts + tr) : 0.0;
    return std::abs(expected - H) <= tol;
}

EvalReport evaluate_classifier(const SoftmaxClassifier& cls, const DatasetBundle& bundle) {
    const std::set<int> search(cls.classes.begin(), cls.classes.end());
    for (int c : bundle.all_classes())
        require(search.contains(c), "GZSL classifier must cover every seen and unseen class");
    const std::set<int> unseen(bundle.unseen_classes.begin(), bundle.unseen_classes.end());

    const Labels pred_unseen = predict(cls, bundle.visual_test_unseen);
    const Labels pred_seen = predict(cls, bundle.visual_test_seen);
    const ClassAccuracy u = per_class_accuracy(pred_unseen, bundle.labels_test_unseen, bundle.unseen_classes);
    const ClassAccuracy s = per_class_accuracy(pred_seen, bundle.labels_test_seen, bundle.seen_classes);

    EvalReport r;
    r.ts = u.mean;
    r.tr = s.mean;
    r.H = harmonic_mean(r.ts, r.tr);
    r.per_class_acc = u.per_class;
    r.per_class_acc.insert(s.per_class.begin(), s.per_class.end());
    r.n_test_per_class = u.counts;
    r.n_test_per_class.insert(s.counts.begin(), s.counts.end());

    std::size_t crossed = 0;
    for (int p : pred_seen) crossed += unseen.contains(p) ? 1 : 0;
    r.seen_predicted_unseen =
        pred_seen.empty() ? 0.0 : static_cast<double>(crossed) / static_cast<double>(pred_seen.size());
    crossed = 0;
    for (int p : pred_unseen) crossed += unseen.contains(p) ? 0 : 1;
    r.unseen_predicted_seen = pred_unseen.empty()
                                  ? 0.0
                                  : static_cast<double>(crossed) / static_cast<double>(pred_unseen.size());
    return r;
}

EvalReport evaluate_gzsl(const ModelParams& model, const DatasetBundle& bundle,
                         const EvalConfig& config) {
    config.validate();
    SynthesisRequest request;
    request.classes = bundle.all_classes();
    request.n_per_class = config.n_per_class;
    request.seed = derive_seed(config.seed, "synthesis");
    const SyntheticFeatures synth = synthesize_features(model, bundle, request);
    const SyntheticFeatures training = gzsl_training_set(synth, bundle, config.real_features);

    ClassifierFitOptions options = config.classifier;
    options.seed = derive_seed(config.seed, "final_classifier");
    const ClassifierFit fit =
        fit_gzsl_classifier(training.features, training.labels, request.classes, options);
    EvalReport report = evaluate_classifier(fit.classifier, bundle);
    report.n_per_class = config.n_per_class;
    return report;
}

RealFeatureMode other_mode(RealFeatureMode mode) {
    return mode == RealFeatureMode::seen ? RealFeatureMode::none : RealFeatureMode::seen;
}

std::string to_string(RealFeatureMode mode) { return mode == RealFeatureMode::seen ? "seen" : "none"; }

std::vector<AblationRow> run_ablation(const DatasetBundle& bundle, const TrainConfig& base_config,
                                      const EvalConfig& eval_config,
                                      const std::vector<Variant>& variants) {
    std::vector<AblationRow> rows;
    const ClassifierFit classifier = pretrain_classifier(bundle, base_config);
    for (Variant v : variants) {
        TrainConfig config = base_config;
        config.variant = v;
        const TrainResult trained = train(bundle, config, classifier);
        EvalConfig alt = eval_config;
        alt.real_features = other_mode(eval_config.real_features);
        rows.push_back({v, evaluate_gzsl(trained.params, bundle, eval_config),
                        evaluate_gzsl(trained.params, bundle, alt)});
    }
    return rows;
}

std::vector<CurvePoint> sweep_samples(const ModelParams& model, const DatasetBundle& bundle,
                                      const EvalConfig& config, const std::vector<int>& counts) {
    if (counts.empty()) throw ValidationError("sweep needs at least one sample count");
    std::vector<CurvePoint> curve;
    for (int n : counts) {
        if (n < 1) throw ValidationError("sweep counts must be >= 1");
        EvalConfig point_config = config;
        point_config.n_per_class = n;
        const EvalReport r = evaluate_gzsl(model, bundle, point_config);
        curve.push_back({n, r.ts, r.tr, r.H});
    }
    return curve;
}

std::vector<CurvePoint> sweep_samples(const DatasetBundle& bundle, const TrainConfig& train_config,
                                      const EvalConfig& config, const std::vector<int>& counts) {
    if (counts.empty()) throw ValidationError("sweep needs at least one sample count");
    const TrainResult trained = train(bundle, train_config);
    return sweep_samples(trained.params, bundle, config, counts);
}

std::string format_report_text(const std::string& title, const std::vector<std::string>& row_names,
                               const std::vector<EvalReport>& reports) {
    require(row_names.size() == reports.size(), "report: one name per row");
    std::size_t width = 8;
    for (const auto& name : row_names) width = std::max(width, name.size());
    std::ostringstream out;
    out << title << "\n";
    out << std::left << std::setw(static_cast<int>(width)) << "method" << std::right
        << std::setw(8) << "ts" << std::setw(8) << "tr" << std::setw(8) << "H" << "\n";
    out << std::fixed << std::setprecision(1);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(width)) << row_names[i] << std::right
            << std::setw(8) << 100.0 * reports[i].ts << std::setw(8) << 100.0 * reports[i].tr
            << std::setw(8) << 100.0 * reports[i].H << "\n";
    }
    return out.str();
}

namespace {

json report_json(const EvalReport& r) {
    json per_class = json::object();
    for (const auto& [c, acc] : r.per_class_acc) per_class[std::to_string(c)] = acc;
    json counts = json::object();
    for (const auto& [c, n] : r.n_test_per_class) counts[std::to_string(c)] = n;
    return {{"ts", r.ts},
            {"tr", r.tr},
            {"H", r.H},
            {"n_per_class", r.n_per_class},
            {"seen_predicted_unseen", r.seen_predicted_unseen},
            {"unseen_predicted_seen", r.unseen_predicted_seen},
            {"per_class_acc", per_class},
            {"n_test_per_class", counts}};
}

} // namespace

std::string format_report_jsonl(const std::vector<std::string>& row_names,
                                const std::vector<EvalReport>& reports) {
    require(row_names.size() == reports.size(), "report: one name per row");
    std::string out;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        json row = report_json(reports[i]);
        row["method"] = row_names[i];
        out += row.dump() + "\n";
    }
    return out;
}

std::string format_curve_json(const std::vector<CurvePoint>& curve) {
    json points = json::array();
    for (const auto& p : curve)
        points.push_back({{"n_per_class", p.n_per_class}, {"ts", p.ts}, {"tr", p.tr}, {"H", p.H}});
    return json{{"curve", points}}.dump(2) + "\n";
}

} // namespace dascn
