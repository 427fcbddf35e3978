#include "dascn/run_config.hpp"

#include "dascn/random.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace dascn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads optional fields of one JSON object, remembering which keys were
// consumed so that leftovers (typos) can be reported.
class FieldReader {
public:
    FieldReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw ValidationError(path_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!object_.contains(key)) return;
        try {
            out = object_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ValidationError(field(key) + ": wrong type");
        }
    }

    const json* sub(const char* key) {
        seen_.insert(key);
        return object_.contains(key) ? &object_.at(key) : nullptr;
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : object_.items())
            if (!seen_.contains(key)) throw ValidationError(field(key) + ": unknown field");
    }

private:
    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

// Re-raises a validation message with the config path prefixed.
template <class F>
void validate_at(const std::string& path, F&& check) {
    try {
        check();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

ClassifierFitOptions classifier_from_json(const json& j, const std::string& path) {
    ClassifierFitOptions o;
    FieldReader r(j, path);
    r.get("learning_rate", o.learning_rate);
    r.get("max_steps", o.max_steps);
    r.get("grad_tol", o.grad_tol);
    r.get("weight_decay", o.weight_decay);
    r.get("init_scale", o.init_scale);
    r.finish();
    validate_at(path, [&] { o.validate(); });
    return o;
}

} // namespace

json to_json(const LossWeights& w) {
    return {{"lambda1", w.lambda1}, {"lambda2", w.lambda2}, {"lambda3", w.lambda3},
            {"lambda4", w.lambda4}, {"lambda5", w.lambda5}, {"lambda6", w.lambda6}};
}

json to_json(const ClassifierFitOptions& o) {
    return {{"learning_rate", o.learning_rate}, {"max_steps", o.max_steps},
            {"grad_tol", o.grad_tol},           {"weight_decay", o.weight_decay},
            {"init_scale", o.init_scale}};
}

json to_json(const TrainConfig& c) {
    return {{"weights", to_json(c.weights)},
            {"batch_size", c.batch_size},
            {"n1", c.n1},
            {"n2", c.n2},
            {"epochs", c.epochs},
            {"optimizer",
             {{"learning_rate", c.optimizer.learning_rate},
              {"beta1", c.optimizer.beta1},
              {"beta2", c.optimizer.beta2},
              {"epsilon", c.optimizer.epsilon}}},
            {"hidden_dim", c.hidden_dim},
            {"leaky_slope", c.leaky_slope},
            {"gvs_output", to_string(c.gvs_output)},
            {"dual_pairing",
             c.dual_pairing == DualAdversarialPairing::real_visual ? "real_visual" : "cycle_visual"},
            {"baseline_classification", c.baseline_classification},
            {"variant", to_string(c.variant)},
            {"pretrain", to_json(c.pretrain)},
            {"record_wall_clock", c.record_wall_clock}};
}

json to_json(const EvalConfig& c) {
    return {{"n_per_class", c.n_per_class},
            {"real_features", c.real_features == RealFeatureMode::seen ? "seen" : "none"},
            {"classifier", to_json(c.classifier)}};
}

json to_json(const SyntheticSpec& s) {
    return {{"n_seen_classes", s.n_seen_classes},   {"n_unseen_classes", s.n_unseen_classes},
            {"feature_dim", s.feature_dim},         {"attribute_dim", s.attribute_dim},
            {"samples_per_class", s.samples_per_class}, {"cluster_std", s.cluster_std},
            {"projection_seed", s.projection_seed}, {"noise_seed", s.noise_seed}};
}

json to_json(const RunConfig& c) {
    json j;
    if (c.dataset) j["dataset"] = *c.dataset;
    if (c.synthetic) j["synthetic"] = to_json(*c.synthetic);
    j["split"] = c.split;
    j["normalize_features"] = c.normalize_features;
    j["seed"] = c.seed;
    j["train"] = to_json(c.train);
    j["eval"] = to_json(c.eval);
    j["counts"] = c.counts;
    std::vector<std::string> variants;
    for (Variant v : c.variants) variants.push_back(to_string(v));
    j["variants"] = variants;
    j["out"] = c.out;
    return j;
}

TrainConfig train_config_from_json(const json& j, const std::string& path) {
    TrainConfig c;
    FieldReader r(j, path);
    if (const json* w = r.sub("weights")) {
        FieldReader wr(*w, r.field("weights"));
        wr.get("lambda1", c.weights.lambda1);
        wr.get("lambda2", c.weights.lambda2);
        wr.get("lambda3", c.weights.lambda3);
        wr.get("lambda4", c.weights.lambda4);
        wr.get("lambda5", c.weights.lambda5);
        wr.get("lambda6", c.weights.lambda6);
        wr.finish();
        validate_at(r.field("weights"), [&] { c.weights.validate(); });
    }
    r.get("batch_size", c.batch_size);
    r.get("n1", c.n1);
    r.get("n2", c.n2);
    r.get("epochs", c.epochs);
    if (const json* o = r.sub("optimizer")) {
        FieldReader orr(*o, r.field("optimizer"));
        orr.get("learning_rate", c.optimizer.learning_rate);
        orr.get("beta1", c.optimizer.beta1);
        orr.get("beta2", c.optimizer.beta2);
        orr.get("epsilon", c.optimizer.epsilon);
        orr.finish();
    }
    r.get("hidden_dim", c.hidden_dim);
    r.get("leaky_slope", c.leaky_slope);
    std::string gvs_output = to_string(c.gvs_output);
    r.get("gvs_output", gvs_output);
    validate_at(r.field("gvs_output"), [&] { c.gvs_output = parse_output_activation(gvs_output); });
    std::string pairing = "real_visual";
    r.get("dual_pairing", pairing);
    if (pairing == "real_visual")
        c.dual_pairing = DualAdversarialPairing::real_visual;
    else if (pairing == "cycle_visual")
        c.dual_pairing = DualAdversarialPairing::cycle_visual;
    else
        throw ValidationError(r.field("dual_pairing") + ": expected real_visual|cycle_visual");
    r.get("baseline_classification", c.baseline_classification);
    std::string variant = to_string(c.variant);
    r.get("variant", variant);
    validate_at(r.field("variant"), [&] { c.variant = parse_variant(variant); });
    if (const json* p = r.sub("pretrain")) c.pretrain = classifier_from_json(*p, r.field("pretrain"));
    r.get("record_wall_clock", c.record_wall_clock);
    r.finish();
    validate_at(path, [&] { c.validate(); });
    return c;
}

EvalConfig eval_config_from_json(const json& j, const std::string& path) {
    EvalConfig c;
    FieldReader r(j, path);
    r.get("n_per_class", c.n_per_class);
    std::string mode = "seen";
    r.get("real_features", mode);
    if (mode == "seen")
        c.real_features = RealFeatureMode::seen;
    else if (mode == "none")
        c.real_features = RealFeatureMode::none;
    else
        throw ValidationError(r.field("real_features") + ": expected seen|none");
    if (const json* cl = r.sub("classifier")) c.classifier = classifier_from_json(*cl, r.field("classifier"));
    r.finish();
    validate_at(path, [&] { c.validate(); });
    return c;
}

SyntheticSpec synthetic_spec_from_json(const json& j, const std::string& path) {
    SyntheticSpec s;
    FieldReader r(j, path);
    r.get("n_seen_classes", s.n_seen_classes);
    r.get("n_unseen_classes", s.n_unseen_classes);
    r.get("feature_dim", s.feature_dim);
    r.get("attribute_dim", s.attribute_dim);
    r.get("samples_per_class", s.samples_per_class);
    r.get("cluster_std", s.cluster_std);
    r.get("projection_seed", s.projection_seed);
    r.get("noise_seed", s.noise_seed);
    r.finish();
    validate_at(path, [&] { s.validate(); });
    return s;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    FieldReader r(j, "");
    std::string dataset;
    if (r.sub("dataset")) {
        r.get("dataset", dataset);
        c.dataset = dataset;
    }
    r.get("split", c.split);
    r.get("normalize_features", c.normalize_features);
    if (const json* s = r.sub("synthetic")) c.synthetic = synthetic_spec_from_json(*s, "synthetic");
    r.get("seed", c.seed);
    if (const json* t = r.sub("train")) c.train = train_config_from_json(*t, "train");
    if (const json* e = r.sub("eval")) c.eval = eval_config_from_json(*e, "eval");
    r.get("counts", c.counts);
    std::vector<std::string> variants;
    if (r.sub("variants")) {
        r.get("variants", variants);
        c.variants.clear();
        for (const auto& v : variants)
            validate_at("variants", [&] { c.variants.push_back(parse_variant(v)); });
    }
    r.get("out", c.out);
    r.finish();
    c.validate();
    c.propagate_seed();
    return c;
}

void RunConfig::validate() const {
    if (dataset.has_value() == synthetic.has_value())
        throw ValidationError("dataset/synthetic: exactly one data source must be given");
    if (dataset && !fs::exists(fs::path(*dataset) / split / "meta.json"))
        throw ValidationError("dataset: no meta.json under '" + (fs::path(*dataset) / split).string() + "'");
    if (synthetic) validate_at("synthetic", [&] { synthetic->validate(); });
    validate_at("train", [&] { train.validate(); });
    validate_at("eval", [&] { eval.validate(); });
    if (counts.empty()) throw ValidationError("counts: must be non-empty");
    for (int n : counts)
        if (n < 1) throw ValidationError("counts: every count must be >= 1");
    if (variants.empty()) throw ValidationError("variants: must be non-empty");
    if (out.empty()) throw ValidationError("out: must be non-empty");
}

void RunConfig::propagate_seed() {
    train.seed = seed;
    eval.seed = derive_seed(seed, "eval");
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

DatasetBundle load_bundle(const RunConfig& config) {
    if (config.synthetic) {
        DatasetBundle b = make_synthetic_dataset(*config.synthetic);
        if (config.normalize_features) normalize_features(b);
        return b;
    }
    LoadOptions options;
    options.normalize_features = config.normalize_features;
    return load_dataset(*config.dataset, config.split, options);
}

} // namespace dascn
