#pragma once

#include "missinfo/builtin_models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace missinfo {

// Process exit statuses shared by the CLI and the Python front-end.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitDiagnostic = 4 };

enum class LogLevel { debug, info, warn, error };
using LogFn = std::function<void(LogLevel, const std::string&)>;

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides every entry's mc.seed
    int workers = 1;
    LogFn log;
};

struct EntryOutcome {
    std::string name;
    int exit_code = kExitOk;
    json report;                   // also written to report_path
    std::string report_path;
    std::vector<std::string> files;  // every file written for this entry
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<EntryOutcome> entries;
    std::vector<std::string> errors;  // manifest-level validation errors
};

// Lists everything wrong with a manifest without touching datasets.
std::vector<std::string> check_manifest(const json& manifest);

// Relative dataset paths resolve against base_dir.
RunResult run_manifest(const json& manifest, const std::string& base_dir, const RunOptions& opts);
RunResult run_manifest_file(const std::string& path, const RunOptions& opts);

// Runs one entry and returns its report; throws the library errors.
json run_entry(const json& entry, const std::string& base_dir, std::uint64_t seed,
               const std::string& out_dir, std::vector<std::string>* files = nullptr);

struct ValidationListing {
    std::string path;
    std::string model;
    std::vector<std::string> problems;  // "unit 3: ..." or document-level
    bool ok() const { return problems.empty(); }
};
// The model tag defaults to the dataset's "model" field.
ValidationListing validate_dataset_file(const std::string& path, const std::string& model_tag = "",
                                        const json& model_options = json::object());

// Writes the shipped demonstration datasets, manifests and their reports under out_dir.
RunResult run_demo(const std::string& out_dir, const RunOptions& opts);

int exit_code_for(const std::exception& e);

}  // namespace missinfo
