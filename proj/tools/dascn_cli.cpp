// dascn: train, evaluate and inspect dual adversarial GZSL feature generators.
#include "dascn/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Dual adversarial semantics-consistent feature generation for GZSL"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dascn 1.0.0");

    dascn::CommandOptions opts;
    std::string config, out, variant, checkpoint, classes, spec;
    std::uint64_t seed = 0;
    int n_per_class = 0;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "run config (JSON)");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "root seed");
        sub->add_option("--variant", variant, "full|no_SC|no_VC|dual_only|baseline_single_gan");
        sub->add_option("--n-per-class", n_per_class, "synthesized samples per class")->check(CLI::PositiveNumber);
    };

    auto* train = app.add_subcommand("train", "train a model and write model.ckpt + log.jsonl");
    common(train);
    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on both test splits");
    common(evaluate);
    evaluate->add_option("--checkpoint", checkpoint, "model.ckpt (default: <out>/model.ckpt)");
    auto* ablate = app.add_subcommand("ablate", "train and evaluate each variant");
    common(ablate);
    auto* sweep = app.add_subcommand("sweep", "H against synthesized samples per class");
    common(sweep);
    sweep->add_option("--checkpoint", checkpoint, "reuse a trained model instead of training");
    auto* synth = app.add_subcommand("synth-data", "write the Gaussian-cluster oracle dataset");
    synth->add_option("--spec", spec, "synthetic spec (JSON)");
    synth->add_option("--out", out, "dataset directory");
    auto* viz = app.add_subcommand("export-viz", "dump real and synthesized features for 2-D projection");
    common(viz);
    viz->add_option("--checkpoint", checkpoint, "model.ckpt");
    viz->add_option("--classes", classes, "comma-separated class ids (default: first 3 unseen)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return dascn::exit_validation;
    }

    CLI::App* sub = app.get_subcommands().front();
    const auto given = [&](const char* flag) { return sub->get_option_no_throw(flag) && sub->count(flag) > 0; };
    if (given("--config")) opts.config = config;
    if (given("--out")) opts.out = out;
    if (given("--seed")) opts.seed = seed;
    if (given("--variant")) opts.variant = variant;
    if (given("--n-per-class")) opts.n_per_class = n_per_class;
    if (given("--checkpoint")) opts.checkpoint = checkpoint;
    if (given("--classes")) opts.classes = classes;
    if (given("--spec")) opts.spec = spec;

    return dascn::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
