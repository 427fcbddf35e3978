#include "dascn/commands.hpp"

#include "dascn/checkpoint.hpp"
#include "dascn/random.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace dascn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

json read_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ValidationError(std::string(what) + ": cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": " + path.string() + " is not valid JSON: " + e.what());
    }
}

json& child(json& j, const char* key) {
    if (!j.contains(key)) j[key] = json::object();
    return j[key];
}

RunConfig resolve_from(json j, const CommandOptions& o, bool variant_selects_ablation) {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    if (o.out) j["out"] = *o.out;
    if (o.seed) j["seed"] = *o.seed;
    if (o.variant) {
        if (variant_selects_ablation)
            j["variants"] = json::array({*o.variant});
        else
            child(j, "train")["variant"] = *o.variant;
    }
    if (o.n_per_class) child(j, "eval")["n_per_class"] = *o.n_per_class;
    return run_config_from_json(j);
}

json step_json(const StepRecord& s, bool wall_clock) {
    json terms = json::object();
    for (const auto& t : s.terms) terms[t.name] = t.value;
    json j = {{"iteration", s.iteration}, {"epoch", s.epoch},         {"kind", to_string(s.kind)},
              {"sub_step", s.sub_step},   {"loss", s.loss},           {"grad_norm", s.grad_norm},
              {"terms", terms}};
    if (wall_clock) j["elapsed_ms"] = s.elapsed_ms;
    return j;
}

void check_dims(const ModelParams& params, const DatasetBundle& bundle) {
    if (params.g_sv.shape.output_dim != bundle.feature_dim() ||
        params.g_vs.shape.output_dim != bundle.attribute_dim())
        throw ValidationError("checkpoint: trained for K=" + std::to_string(params.g_sv.shape.output_dim) +
                              ", L=" + std::to_string(params.g_vs.shape.output_dim) +
                              " but the dataset has K=" + std::to_string(bundle.feature_dim()) +
                              ", L=" + std::to_string(bundle.attribute_dim()));
}

fs::path checkpoint_path(const CommandOptions& o, const std::optional<RunConfig>& config) {
    if (o.checkpoint) return *o.checkpoint;
    if (config) return fs::path(config->out) / "model.ckpt";
    throw ValidationError("--checkpoint: required");
}

// Config for commands that consume a checkpoint: the file given with
// --config, otherwise the one the checkpoint was trained with.
RunConfig config_for_checkpoint(const CommandOptions& o, const Checkpoint& ck) {
    if (o.config) return resolve_config(o);
    if (!ck.metadata.contains("run_config"))
        throw ValidationError("checkpoint carries no run config; pass --config");
    json j = ck.metadata.at("run_config");
    j.erase("out"); // results go to the current run directory, not the training one
    return resolve_from(j, o, false);
}

struct LoadedModel {
    Checkpoint checkpoint;
    RunConfig config;
    fs::path path;
};

LoadedModel load_model(const CommandOptions& o) {
    std::optional<RunConfig> file_config;
    if (o.config) file_config = resolve_config(o);
    const fs::path path = checkpoint_path(o, file_config);
    if (!fs::exists(path)) throw LoadError("checkpoint not found: " + path.string());
    Checkpoint ck = load_checkpoint(path);
    RunConfig config = file_config ? *file_config : config_for_checkpoint(o, ck);
    return {std::move(ck), std::move(config), path};
}

std::string variant_label(const Checkpoint& ck) {
    const json& tc = ck.metadata.value("train_config", json::object());
    return tc.value("variant", std::string("model"));
}

} // namespace

RunConfig resolve_config(const CommandOptions& options, bool variant_selects_ablation) {
    json j = options.config ? read_json_file(*options.config, "config") : json::object();
    return resolve_from(std::move(j), options, variant_selects_ablation);
}

void cmd_train(const CommandOptions& options, std::ostream& out) {
    const RunConfig config = resolve_config(options);
    const DatasetBundle bundle = load_bundle(config);
    const fs::path dir = config.out;
    fs::create_directories(dir);

    const TrainResult result = train(bundle, config.train);

    std::ostringstream log;
    log << json{{"config", to_json(config)},
                {"effective_weights", to_json(result.log.effective_weights)},
                {"classifier_train_accuracy", result.log.classifier_train_accuracy}}
               .dump()
        << "\n";
    for (const auto& step : result.log.steps) log << step_json(step, config.train.record_wall_clock).dump() << "\n";
    write_text(dir / "log.jsonl", log.str());
    write_text(dir / "effective_config.json", to_json(config).dump(2) + "\n");

    Checkpoint ck;
    ck.params = result.params;
    ck.metadata = {{"run_config", to_json(config)},
                   {"train_config", to_json(config.train)},
                   {"iterations", result.log.iterations},
                   {"classifier_train_accuracy", result.log.classifier_train_accuracy}};
    save_checkpoint(dir / "model.ckpt", ck);

    out << "trained " << to_string(config.train.variant) << " for " << result.log.iterations
        << " iterations; checkpoint " << (dir / "model.ckpt").string() << "\n";
}

void cmd_evaluate(const CommandOptions& options, std::ostream& out) {
    const LoadedModel m = load_model(options);
    const DatasetBundle bundle = load_bundle(m.config);
    check_dims(m.checkpoint.params, bundle);
    const EvalReport report = evaluate_gzsl(m.checkpoint.params, bundle, m.config.eval);

    const fs::path dir = m.config.out;
    const std::vector<std::string> names{variant_label(m.checkpoint)};
    const std::string text = format_report_text(
        "GZSL evaluation (n_per_class=" + std::to_string(m.config.eval.n_per_class) +
            ", real features: " + to_string(m.config.eval.real_features) + ")",
        names, {report});
    write_text(dir / "report.json", format_report_jsonl(names, {report}));
    write_text(dir / "report.txt", text);
    out << text;
}

void cmd_ablate(const CommandOptions& options, std::ostream& out) {
    const RunConfig config = resolve_config(options, true);
    const DatasetBundle bundle = load_bundle(config);
    const auto rows = run_ablation(bundle, config.train, config.eval, config.variants);

    std::vector<std::string> names;
    std::vector<EvalReport> primary, alternate;
    for (const auto& row : rows) {
        names.push_back(to_string(row.variant));
        primary.push_back(row.report);
        alternate.push_back(row.alternate);
    }
    const RealFeatureMode mode = config.eval.real_features;
    const RealFeatureMode alt = other_mode(mode);
    const fs::path dir = config.out;
    const std::string text = format_report_text("Ablation (real features: " + to_string(mode) + ")", names, primary);
    const std::string alt_text =
        format_report_text("Ablation (real features: " + to_string(alt) + ")", names, alternate);
    write_text(dir / "report.json", format_report_jsonl(names, primary));
    write_text(dir / "report.txt", text);
    write_text(dir / ("report_real_" + to_string(alt) + ".json"), format_report_jsonl(names, alternate));
    write_text(dir / ("report_real_" + to_string(alt) + ".txt"), alt_text);
    out << text << "\n" << alt_text;
}

void cmd_sweep(const CommandOptions& options, std::ostream& out) {
    // Reuses a trained model when --checkpoint is given, otherwise trains one.
    std::optional<LoadedModel> loaded;
    if (options.checkpoint) loaded = load_model(options);
    const RunConfig config = loaded ? loaded->config : resolve_config(options);
    const DatasetBundle bundle = load_bundle(config);
    ModelParams model;
    std::string label = to_string(config.train.variant);
    if (loaded) {
        model = loaded->checkpoint.params;
        label = variant_label(loaded->checkpoint);
        check_dims(model, bundle);
    } else {
        model = train(bundle, config.train).params;
    }
    const auto curve = sweep_samples(model, bundle, config.eval, config.counts);

    std::vector<std::string> names;
    std::vector<EvalReport> reports;
    for (const auto& p : curve) {
        names.push_back(label + " n=" + std::to_string(p.n_per_class));
        EvalReport r;
        r.ts = p.ts;
        r.tr = p.tr;
        r.H = p.H;
        r.n_per_class = p.n_per_class;
        reports.push_back(r);
    }
    const fs::path dir = config.out;
    const std::string text = format_report_text("Sample-count sweep", names, reports);
    write_text(dir / "curve.json", format_curve_json(curve));
    write_text(dir / "report.json", format_report_jsonl(names, reports));
    write_text(dir / "report.txt", text);
    out << text;
}

void cmd_synth_data(const CommandOptions& options, std::ostream& out) {
    SyntheticSpec spec;
    if (options.spec) {
        json j = read_json_file(*options.spec, "spec");
        // Accept either a bare spec or a run config carrying one.
        if (j.is_object() && j.contains("synthetic")) j = j.at("synthetic");
        spec = synthetic_spec_from_json(j, "spec");
    }
    const fs::path dir = options.out.value_or("synthetic_data");
    const DatasetBundle bundle = make_synthetic_dataset(spec);
    save_dataset(bundle, dir, "synthetic");
    write_text(dir / "spec.json", to_json(spec).dump(2) + "\n");
    out << "wrote " << bundle.n_classes() << "-class oracle dataset to " << dir.string() << "\n";
}

void cmd_export_viz(const CommandOptions& options, std::ostream& out) {
    const LoadedModel m = load_model(options);
    const DatasetBundle bundle = load_bundle(m.config);
    check_dims(m.checkpoint.params, bundle);

    std::vector<int> classes;
    if (options.classes) {
        classes = parse_class_list(*options.classes);
    } else {
        for (std::size_t i = 0; i < bundle.unseen_classes.size() && i < 3; ++i)
            classes.push_back(bundle.unseen_classes[i]);
    }
    const std::vector<int> known = bundle.all_classes();
    for (int c : classes)
        if (std::find(known.begin(), known.end(), c) == known.end())
            throw ValidationError("--classes: unknown class id " + std::to_string(c));

    // Real test rows first, then synthesized blocks.
    std::vector<Matrix> blocks;
    Labels labels;
    std::vector<int> source;
    Eigen::Index n_real = 0;
    for (int c : classes) {
        const bool unseen =
            std::find(bundle.unseen_classes.begin(), bundle.unseen_classes.end(), c) != bundle.unseen_classes.end();
        const Matrix& x = unseen ? bundle.visual_test_unseen : bundle.visual_test_seen;
        const Labels& y = unseen ? bundle.labels_test_unseen : bundle.labels_test_seen;
        std::vector<int> rows;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == c) rows.push_back(static_cast<int>(i));
        blocks.push_back(gather_rows(x, rows));
        labels.insert(labels.end(), rows.size(), c);
        source.insert(source.end(), rows.size(), 0);
        n_real += static_cast<Eigen::Index>(rows.size());
    }
    SynthesisRequest request{classes, m.config.eval.n_per_class, derive_seed(m.config.eval.seed, "viz")};
    const SyntheticFeatures synth = synthesize_features(m.checkpoint.params, bundle, request);
    blocks.push_back(synth.features);
    labels.insert(labels.end(), synth.labels.begin(), synth.labels.end());
    source.insert(source.end(), synth.labels.size(), 1);

    Matrix features(static_cast<Eigen::Index>(labels.size()), bundle.feature_dim());
    Eigen::Index row = 0;
    for (const Matrix& b : blocks) {
        features.middleRows(row, b.rows()) = b;
        row += b.rows();
    }

    const fs::path dir = m.config.out;
    fs::create_directories(dir);
    write_f32(dir / "viz_features.f32", features);
    write_i32(dir / "viz_labels.i32", labels);
    write_i32(dir / "viz_source.i32", source);
    const json meta = {{"n_rows", features.rows()},
                       {"feature_dim", features.cols()},
                       {"classes", classes},
                       {"n_real", n_real},
                       {"n_synthesized", synth.features.rows()},
                       {"n_per_class", m.config.eval.n_per_class},
                       {"columns", {{"features", "viz_features.f32"}, {"labels", "viz_labels.i32"}}},
                       {"source_legend", {{"0", "real test"}, {"1", "synthesized"}}},
                       {"source", source}};
    write_text(dir / "meta.json", meta.dump(2) + "\n");
    out << "exported " << n_real << " real and " << synth.features.rows() << " synthesized rows to "
        << dir.string() << "\n";
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"train", "evaluate", "ablate", "sweep", "synth-data", "export-viz"};
    return names;
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        if (name == "train")
            cmd_train(options, out);
        else if (name == "evaluate")
            cmd_evaluate(options, out);
        else if (name == "ablate")
            cmd_ablate(options, out);
        else if (name == "sweep")
            cmd_sweep(options, out);
        else if (name == "synth-data")
            cmd_synth_data(options, out);
        else if (name == "export-viz")
            cmd_export_viz(options, out);
        else
            throw ValidationError("unknown command '" + name + "'");
        return exit_ok;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const LoadError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const DivergenceError& e) {
        err << "training diverged: " << e.what() << "\n";
        return exit_runtime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}

std::vector<int> parse_class_list(const std::string& text) {
    std::vector<int> ids;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        int id = -1;
        try {
            id = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || id < 0)
            throw ValidationError("--classes: expected comma-separated class ids, got '" + text + "'");
        ids.push_back(id);
    }
    if (ids.empty()) throw ValidationError("--classes: empty list");
    return ids;
}

} // namespace dascn
