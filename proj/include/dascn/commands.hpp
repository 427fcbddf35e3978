#pragma once

#include "dascn/run_config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dascn {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_runtime = 3 };

// Command-line overrides. Unset fields fall back to the config file, then to
// built-in defaults.
struct CommandOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<int> n_per_class;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::string> classes; // comma-separated ids, export-viz
    std::optional<std::filesystem::path> spec; // synth-data
};

/// File contents (or an empty object) with the flag overrides applied,
/// parsed and validated.
RunConfig resolve_config(const CommandOptions& options, bool variant_selects_ablation = false);

// Each command throws on failure; run_command maps exceptions to exit codes.
void cmd_train(const CommandOptions& options, std::ostream& out);
void cmd_evaluate(const CommandOptions& options, std::ostream& out);
void cmd_ablate(const CommandOptions& options, std::ostream& out);
void cmd_sweep(const CommandOptions& options, std::ostream& out);
void cmd_synth_data(const CommandOptions& options, std::ostream& out);
void cmd_export_viz(const CommandOptions& options, std::ostream& out);

const std::vector<std::string>& command_names();

/// Dispatches by name. Prints diagnostics to `err` and returns 0, 2
/// (validation, missing or malformed input) or 3 (runtime, divergence).
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

/// "3,4" -> {3, 4}. Throws ValidationError on malformed input.
std::vector<int> parse_class_list(const std::string& text);

} // namespace dascn
