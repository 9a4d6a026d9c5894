// missinfo: run manifests, validate datasets, regenerate the demo outputs.

#include "missinfo/errors.hpp"
#include "missinfo/report.hpp"
#include "missinfo/runner.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

using namespace missinfo;

namespace {

LogFn make_logger() {
    return [](LogLevel l, const std::string& m) {
        switch (l) {
            case LogLevel::debug: spdlog::debug(m); break;
            case LogLevel::info: spdlog::info(m); break;
            case LogLevel::warn: spdlog::warn(m); break;
            case LogLevel::error: spdlog::error(m); break;
        }
    };
}

int default_workers() {
    if (const char* env = std::getenv("MISSINFO_WORKERS")) {
        try {
            int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        spdlog::warn("ignoring MISSINFO_WORKERS={}: not a positive integer", env);
    }
    return 1;
}

void print_summary(const RunResult& r) {
    for (auto& m : r.errors) std::cerr << "error: " << m << "\n";
    for (auto& e : r.entries) {
        std::cout << e.name << ": status " << e.exit_code << ", report " << e.report_path << "\n";
        if (!e.report.contains("measures")) continue;
        const auto& ms = e.report["measures"];
        if (ms.contains("large_sample")) {
            for (const char* k : {"ri1", "ri0", "ri_half"})
                if (ms["large_sample"].contains(k)) std::cout << "  " << k << " = " << ms["large_sample"][k] << "\n";
        }
        for (const char* k : {"bi1", "bi2", "bi1_combined", "bi2_combined"})
            if (ms.contains(k)) std::cout << "  " << k << " = " << ms[k]["value"] << "\n";
        for (const char* k : {"bi0", "bi_s", "bf_ob"})
            if (ms.contains(k)) std::cout << "  " << k << " = " << ms[k] << "\n";
        if (ms.contains("completed_ratio")) {
            const auto& c = ms["completed_ratio"];
            for (const char* k : {"chi2_obs", "chi2_joint_em", "chi2_separate_em", "r_from_alt", "r_from_null"})
                if (c.contains(k)) std::cout << "  " << k << " = " << c[k] << "\n";
        }
        if (ms.contains("entropy")) std::cout << "  entropy = " << ms["entropy"]["global"] << "\n";
        if (ms.contains("ri_curve")) std::cout << "  ri_curve -> " << ms["ri_curve"]["file"] << "\n";
        if (ms.contains("diagnostics")) std::cout << "  diagnostics pass = " << ms["diagnostics"]["pass"] << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relative information measures for incomplete-data likelihood inference"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string level = "info";
    app.add_option("--log-level", level, "debug, info, warn, error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    RunOptions opts;
    std::string manifest;
    std::uint64_t seed = 0;
    int workers = 0;
    auto* run = app.add_subcommand("run", "Run a manifest and write reports");
    run->add_option("--manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = run->add_option("--seed", seed, "Master seed; overrides every entry's mc.seed");
    run->add_option("--workers", workers, "Entries processed concurrently (default: MISSINFO_WORKERS or 1)")
        ->check(CLI::PositiveNumber);

    std::string dataset, model_tag, model_options = "{}";
    auto* validate = app.add_subcommand("validate", "Check a dataset against its model's schema and invariants");
    validate->add_option("--dataset", dataset, "Dataset file (JSON)")->required();
    validate->add_option("--model", model_tag, "Model tag (default: the dataset's \"model\" field)");
    validate->add_option("--model-options", model_options, "Model options as a JSON object");

    std::string demo_out = "missinfo-demo";
    auto* demo = app.add_subcommand("demo", "Write and run the two-sample counts and sib-pair demonstrations");
    demo->add_option("--out", demo_out, "Output directory")->capture_default_str();
    auto* demo_seed = demo->add_option("--seed", seed, "Master seed");
    demo->add_option("--workers", workers, "Entries processed concurrently")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("missinfo"));
    spdlog::set_level(spdlog::level::from_str(level));
    opts.log = make_logger();
    opts.workers = workers > 0 ? workers : default_workers();

    try {
        if (*run) {
            if (*seed_opt) opts.seed = seed;
            auto r = run_manifest_file(manifest, opts);
            print_summary(r);
            return r.exit_code;
        }
        if (*validate) {
            json mo;
            try {
                mo = json::parse(model_options);
            } catch (const json::exception& e) {
                std::cerr << "error: --model-options is not valid JSON: " << e.what() << "\n";
                return kExitValidation;
            }
            auto v = validate_dataset_file(dataset, model_tag, mo);
            std::cout << v.path << " (model " << (v.model.empty() ? "?" : v.model) << "): "
                      << (v.ok() ? "no violations" : std::to_string(v.problems.size()) + " violation(s)") << "\n";
            for (auto& p : v.problems) std::cout << "  - " << p << "\n";
            return v.ok() ? kExitOk : kExitValidation;
        }
        if (*demo) {
            if (*demo_seed) opts.seed = seed;
            auto r = run_demo(demo_out, opts);
            print_summary(r);
            return r.exit_code;
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e);
    }
    return kExitOk;
}
