#include "missinfo/runner.hpp"

#include "missinfo/bayes_measures.hpp"
#include "missinfo/diagnostics.hpp"
#include "missinfo/em_engine.hpp"
#include "missinfo/errors.hpp"
#include "missinfo/large_sample.hpp"
#include "missinfo/report.hpp"
#include "missinfo/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace missinfo {

namespace {

const std::set<std::string> kMeasures = {"ri1", "ri0", "ri_half", "ri_curve", "bi1", "bi2", "bi0",
                                         "bi_s", "entropy", "completed_ratio", "diagnostics"};
const std::set<std::string> kEntryKeys = {"name", "description", "model", "model_options", "dataset",
                                          "hypothesis", "measures", "prior", "mc", "ri_curve",
                                          "diagnostics", "outputs"};

bool needs_prior(const std::string& m) { return m == "bi1" || m == "bi2"; }

std::vector<json> entries_of(const json& manifest) {
    if (manifest.contains("entries")) return manifest["entries"].get<std::vector<json>>();
    json e = manifest;
    e.erase("schema");
    return {e};
}

std::string entry_name(const json& e, std::size_t i) {
    return e.contains("name") && e["name"].is_string() ? e["name"].get<std::string>()
                                                        : "entry" + std::to_string(i);
}

void check_entry(const json& e, const std::string& where, std::vector<std::string>& out) {
    auto bad = [&](const std::string& m) { out.push_back(where + ": " + m); };
    if (!e.is_object()) return bad("entry must be an object");
    for (auto& [k, v] : e.items())
        if (!kEntryKeys.count(k)) bad("unknown key \"" + k + "\"");
    if (!e.contains("model") || !e["model"].is_string()) bad("\"model\" must be a model tag string");
    else {
        auto tags = model_tags();
        if (std::find(tags.begin(), tags.end(), e["model"].get<std::string>()) == tags.end())
            bad("unknown model tag \"" + e["model"].get<std::string>() + "\"");
    }
    if (e.contains("model_options") && !e["model_options"].is_object()) bad("\"model_options\" must be an object");
    if (!e.contains("dataset") || !e["dataset"].is_string()) bad("\"dataset\" must be a path string");
    if (!e.contains("hypothesis") || !e["hypothesis"].is_object() || !e["hypothesis"].contains("null") ||
        !e["hypothesis"]["null"].is_array())
        bad("\"hypothesis\" must be an object with a \"null\" array (one value per interest parameter)");
    else {
        for (auto& v : e["hypothesis"]["null"])
            if (!v.is_number()) bad("hypothesis null values must be numbers");
        if (e["hypothesis"].contains("nuisance_policy")) {
            auto& p = e["hypothesis"]["nuisance_policy"];
            if (p != "fix_at_null_mle" && p != "average_over_prior")
                bad("nuisance_policy must be \"fix_at_null_mle\" or \"average_over_prior\"");
        }
    }
    if (!e.contains("measures") || !e["measures"].is_array()) {
        bad("\"measures\" must be an array");
    } else if (e["measures"].empty()) {
        bad("\"measures\" is empty; request at least one of ri1, ri0, ri_half, ri_curve, bi1, bi2, bi0, bi_s, "
            "entropy, completed_ratio, diagnostics");
    } else {
        std::set<std::string> seen;
        for (auto& m : e["measures"]) {
            if (!m.is_string() || !kMeasures.count(m.get<std::string>())) {
                bad("unknown measure " + m.dump());
                continue;
            }
            auto s = m.get<std::string>();
            if (!seen.insert(s).second) bad("measure \"" + s + "\" listed twice");
            if (needs_prior(s) && !e.contains("prior")) bad("measure \"" + s + "\" requires a \"prior\"");
            if (s == "ri_curve" && !e.contains("ri_curve"))
                bad("measure \"ri_curve\" requires a \"ri_curve\" grid: {\"lo\", \"hi\", \"points\"} or {\"values\"}");
        }
    }
    if (e.contains("prior")) {
        try {
            PriorSpec::from_json(e["prior"]);
        } catch (const ValidationError& x) {
            bad(x.what());
        }
    }
    if (e.contains("ri_curve")) {
        auto& g = e["ri_curve"];
        bool values = g.is_object() && g.contains("values") && g["values"].is_array() && !g["values"].empty();
        bool range = g.is_object() && g.contains("lo") && g.contains("hi") && g.contains("points") &&
                     g["lo"].is_number() && g["hi"].is_number() && g["points"].is_number_integer() &&
                     g["points"].get<long>() >= 2 && g["lo"].get<double>() < g["hi"].get<double>();
        if (!values && !range) bad("\"ri_curve\" needs {\"lo\" < \"hi\", \"points\" >= 2} or a non-empty \"values\" array");
    }
    if (e.contains("mc")) {
        auto& mc = e["mc"];
        if (!mc.is_object()) bad("\"mc\" must be an object");
        else {
            if (mc.contains("seed") && !(mc["seed"].is_number_integer() && mc["seed"] >= 0)) bad("mc.seed must be a non-negative integer");
            if (mc.contains("draws") && (!mc["draws"].is_number_integer() || mc["draws"].get<long>() < 64))
                bad("mc.draws must be an integer >= 64");
            if (mc.contains("method") && mc["method"] != "auto" && mc["method"] != "exact" && mc["method"] != "mc")
                bad("mc.method must be \"auto\", \"exact\" or \"mc\"");
        }
    }
    if (e.contains("outputs") && !e["outputs"].is_object()) bad("\"outputs\" must be an object");
}

McConfig mc_config(const json& e, std::uint64_t seed) {
    McConfig mc;
    mc.seed = seed;
    if (e.contains("mc")) {
        const auto& j = e["mc"];
        mc.draws = j.value("draws", mc.draws);
        auto method = j.value("method", std::string("auto"));
        mc.method = method == "exact" ? BayesMethod::exact
                    : method == "mc"  ? BayesMethod::monte_carlo
                                      : BayesMethod::automatic;
    }
    if (e["hypothesis"].value("nuisance_policy", std::string("fix_at_null_mle")) == "average_over_prior")
        mc.nuisance = NuisancePolicy::average_over_prior;
    return mc;
}

std::uint64_t entry_seed(const json& e) {
    if (e.contains("mc") && e["mc"].contains("seed")) return e["mc"]["seed"].get<std::uint64_t>();
    return McConfig{}.seed;
}

std::vector<double> curve_grid(const json& g) {
    if (g.contains("values")) return g["values"].get<std::vector<double>>();
    const double lo = g["lo"].get<double>(), hi = g["hi"].get<double>();
    const long n = g["points"].get<long>();
    std::vector<double> v;
    for (long i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

// Validation beats numerical beats diagnostic when several measures fail.
int combine(int a, int b) {
    if (a == kExitOk) return b;
    if (b == kExitOk) return a;
    return std::min(a, b);
}

std::string resolve(const std::string& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed for " + path);
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    return kExitNumerical;
}

std::vector<std::string> check_manifest(const json& manifest) {
    std::vector<std::string> out;
    if (!manifest.is_object()) return {"manifest must be a JSON object"};
    if (manifest.contains("schema") && manifest["schema"] != kManifestSchema)
        out.push_back(std::string("manifest schema must be \"") + kManifestSchema + "\"");
    if (manifest.contains("entries")) {
        if (!manifest["entries"].is_array() || manifest["entries"].empty())
            return {"\"entries\" must be a non-empty array"};
    }
    auto entries = entries_of(manifest);
    std::set<std::string> names;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto name = entry_name(entries[i], i);
        check_entry(entries[i], "entry \"" + name + "\"", out);
        if (!names.insert(name).second) out.push_back("duplicate entry name \"" + name + "\"");
    }
    return out;
}

json run_entry(const json& e, const std::string& base_dir, std::uint64_t seed, const std::string& out_dir,
               std::vector<std::string>* files) {
    const std::string name = e.value("name", std::string("entry0"));
    const json options = e.value("model_options", json::object());
    auto model = make_model(e["model"].get<std::string>(), options);
    const std::string data_path = e["dataset"].get<std::string>();
    auto data = load_dataset(read_json_file(resolve(base_dir, data_path)), *model);

    HypothesisSpec hyp;
    hyp.null_values = e["hypothesis"]["null"].get<std::vector<double>>();
    auto mc = mc_config(e, seed);
    hyp.nuisance_policy = mc.nuisance;

    json rep;
    rep["schema"] = kReportSchema;
    rep["tool"] = {{"name", "missinfo"}, {"version", kToolVersion}};
    rep["entry"] = name;
    rep["model"] = {{"tag", model->tag()}, {"options", options}, {"parameters", model->layout().names}};
    rep["dataset"] = {{"path", data_path}, {"units", data.size()}};
    rep["hypothesis"] = e["hypothesis"];
    rep["seed"] = seed;

    auto mle = fit_mle(*model, data);
    auto null = fit_null_mle(*model, data, hyp, mle.theta_hat);
    rep["fits"] = {{"mle", to_json(mle)}, {"null", to_json(null)}};
    const ParamPoint& theta_ob = mle.theta_hat;
    const ParamPoint& theta0 = null.theta_hat;

    json measures = json::object();
    json failures = json::array();
    int code = kExitOk;
    auto attempt = [&](const std::string& key, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& x) {
            const int c = exit_code_for(x);
            code = combine(code, c);
            json f = {{"measure", key}, {"kind", c == kExitValidation ? "validation" : "numerical"}, {"message", x.what()}};
            if (dynamic_cast<const HeavyTailError*>(&x)) f["heavy_tail"] = true;
            failures.push_back(f);
        }
    };

    std::set<std::string> want;
    for (auto& m : e["measures"]) want.insert(m.get<std::string>());

    if (want.count("ri1") || want.count("ri0") || want.count("ri_half")) {
        attempt("large_sample", [&] {
            auto ls = large_sample_report(*model, data, theta_ob, theta0);
            json j = to_json(ls);
            if (!want.count("ri1")) j.erase("ri1");
            if (!want.count("ri0")) j.erase("ri0");
            if (!want.count("ri_half")) j.erase("ri_half");
            measures["large_sample"] = j;
        });
    }
    if (want.count("ri_curve")) {
        attempt("ri_curve", [&] {
            const std::size_t k = scalar_interest(*model);
            std::vector<ParamPoint> grid;
            for (double x : curve_grid(e["ri_curve"])) grid.push_back(theta_ob.with(k, x));
            auto curve = ri_curve(*model, data, theta_ob, grid);
            auto file = e.contains("outputs") ? e["outputs"].value("curve", name + "_ri_curve.csv")
                                              : name + "_ri_curve.csv";
            std::ostringstream os;
            write_curve_csv(os, curve, k);
            const auto path = (fs::path(out_dir) / file).string();
            write_text(path, os.str());
            if (files) files->push_back(path);
            measures["ri_curve"] = {{"file", file}, {"rows", curve.points.size()}, {"omitted", curve.omitted}};
        });
    }
    std::optional<PriorSpec> prior;
    if (e.contains("prior")) prior = PriorSpec::from_json(e["prior"]);
    if (want.count("bi1"))
        attempt("bi1", [&] { measures["bi1"] = to_json(compute_bi1(*model, data, theta0, *prior, mc)); });
    if (want.count("bi2"))
        attempt("bi2", [&] { measures["bi2"] = to_json(compute_bi2(*model, data, theta0, *prior, mc)); });
    // several units: also the per-unit combination of numerators and denominators
    if (want.count("bi1") && data.size() > 1)
        attempt("bi1_combined",
                [&] { measures["bi1_combined"] = to_json(compute_bi1_combined(*model, data, theta0, *prior, mc)); });
    if (want.count("bi2") && data.size() > 1)
        attempt("bi2_combined",
                [&] { measures["bi2_combined"] = to_json(compute_bi2_combined(*model, data, theta0, *prior, mc)); });
    if (prior && (want.count("bi1") || want.count("bi2")))
        attempt("bf_ob", [&] {
            measures["bf_ob"] = number(bayes_factor_quadrature(*model, data, theta0, *prior));
            measures["prior"] = prior->to_json();
        });
    if (want.count("bi0"))
        attempt("bi0", [&] {
            measures["bi0"] = number(compute_bi0(*model, data, theta0));
            if (model->tag() == "tilting" && theta0[0] == 0.0) measures["bi0_tilting"] = to_json(compute_bi0_tilting(data));
        });
    if (want.count("bi_s")) attempt("bi_s", [&] { measures["bi_s"] = number(compute_bi_s(*model, data, theta0)); });
    if (want.count("entropy"))
        attempt("entropy", [&] {
            if (model->tag() != "tilting")
                throw UnsupportedError("entropy needs tilting units carrying omega_posterior; model is " + model->tag());
            std::vector<std::vector<double>> fams;
            for (auto& u : data.units) {
                auto& t = unit_as<TiltingUnit>(*u, "tilting");
                if (t.omega_posterior.empty())
                    throw UnsupportedError("entropy needs \"omega_posterior\" on every tilting unit");
                fams.push_back(t.omega_posterior);
            }
            auto r = entropy_measure(fams);
            json per = json::array();
            for (double x : r.per_family) per.push_back(number(x));
            measures["entropy"] = {{"global", number(r.global)}, {"per_family", per}, {"excluded", r.excluded}};
        });
    if (want.count("completed_ratio"))
        attempt("completed_ratio", [&] {
            json j = to_json(completed_stat_ratio(*model, data, theta_ob, theta0));
            if (model->tag() == "two_sample_counts") {
                auto lrt = two_sample_lrt(data);
                j["chi2_obs"] = lrt.chi2_obs;
                j["chi2_joint_em"] = lrt.chi2_joint_em;
                j["chi2_separate_em"] = lrt.chi2_separate_em;
            }
            measures["completed_ratio"] = j;
        });
    if (want.count("diagnostics")) {
        json d = json::object();
        bool failed = false;
        const json cfg = e.value("diagnostics", json::object());
        attempt("diagnostics.ri_e", [&] { d["ri_e"] = compute_ri_e(*model, data, theta_ob); });
        attempt("diagnostics.em_identity", [&] {
            auto r = em_identity_suite(*model, data, theta_ob, seed, cfg.value("random_points", 10));
            failed = failed || !r.all_pass();
            d["em_identity"] = to_json(r);
        });
        if (model->dim() == 1) {
            const auto deltas = cfg.value("deltas", std::vector<double>{});
            attempt("diagnostics.expansion", [&] {
                auto e1 = expansion_check_ri1(*model, data, theta_ob, deltas);
                auto e0 = expansion_check_ri0(*model, data, theta_ob, deltas);
                failed = failed || !e1.decay_ok() || !e0.decay_ok() || !e0.bracketing;
                d["expansion_ri1"] = to_json(e1);
                d["expansion_ri0"] = to_json(e0);
            });
        } else {
            d["expansion_skipped"] = "expansion checks need a scalar parameter; this model has nuisance parameters";
        }
        attempt("diagnostics.shrink", [&] {
            const std::size_t k = scalar_interest(*model);
            const double s = model->coordinate_scale(theta0.values(), k);
            auto deltas = cfg.value("shrink_deltas", std::vector<double>{0.08 * s, 0.04 * s, 0.02 * s, 0.01 * s});
            auto t = shrink_convergence(*model, data, theta0, deltas, mc);
            failed = failed || !t.monotone;
            d["shrink"] = to_json(t);
        });
        if (prior)
            attempt("diagnostics.bayes_factor", [&] {
                auto r = bayes_factor_ob(*model, data, theta0, *prior, mc);
                failed = failed || !r.variance_ordering_holds;
                d["bayes_factor"] = to_json(r);
            });
        d["pass"] = !failed;
        if (failed) {
            code = combine(code, kExitDiagnostic);
            failures.push_back({{"measure", "diagnostics"}, {"kind", "diagnostic"}, {"message", "a diagnostic check failed"}});
        }
        measures["diagnostics"] = d;
    }
    rep["measures"] = measures;
    rep["failures"] = failures;
    rep["exit_code"] = code;
    return rep;
}

RunResult run_manifest(const json& manifest, const std::string& base_dir, const RunOptions& opts) {
    RunResult res;
    auto log = [&](LogLevel l, const std::string& m) {
        if (opts.log) opts.log(l, m);
    };
    res.errors = check_manifest(manifest);
    if (!res.errors.empty()) {
        for (auto& m : res.errors) log(LogLevel::error, m);
        res.exit_code = kExitValidation;
        return res;
    }
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) {
        res.errors.push_back("cannot create output directory " + opts.out_dir + ": " + ec.message());
        res.exit_code = kExitValidation;
        return res;
    }
    const std::string hash = manifest_hash(manifest);
    auto entries = entries_of(manifest);
    res.entries.resize(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < entries.size();) {
            json e = entries[i];
            auto& out = res.entries[i];
            out.name = entry_name(e, i);
            e["name"] = out.name;
            const std::uint64_t seed = opts.seed ? *opts.seed : entry_seed(e);
            log(LogLevel::info, "entry " + out.name + ": model " + e["model"].get<std::string>() + ", seed " +
                                    std::to_string(seed));
            try {
                out.report = run_entry(e, base_dir, seed, opts.out_dir, &out.files);
                out.exit_code = out.report["exit_code"].get<int>();
            } catch (const std::exception& x) {
                out.exit_code = exit_code_for(x);
                out.report = {{"schema", kReportSchema},
                              {"tool", {{"name", "missinfo"}, {"version", kToolVersion}}},
                              {"entry", out.name},
                              {"seed", seed},
                              {"failures", {{{"measure", "entry"},
                                             {"kind", out.exit_code == kExitValidation ? "validation" : "numerical"},
                                             {"message", x.what()}}}},
                              {"exit_code", out.exit_code}};
            }
            out.report["manifest_hash"] = hash;
            for (auto& f : out.report["failures"])
                log(LogLevel::error, "entry " + out.name + ": " + f["measure"].get<std::string>() + ": " +
                                         f["message"].get<std::string>());
            auto file = e.contains("outputs") ? e["outputs"].value("report", out.name + ".report.json")
                                              : out.name + ".report.json";
            out.report_path = (fs::path(opts.out_dir) / file).string();
            try {
                write_text(out.report_path, out.report.dump(2) + "\n");
                out.files.push_back(out.report_path);
            } catch (const std::exception& x) {
                log(LogLevel::error, x.what());
                out.exit_code = combine(out.exit_code, kExitValidation);
            }
            log(LogLevel::info, "entry " + out.name + " finished with status " + std::to_string(out.exit_code));
        }
    };
    const int n = std::max(1, std::min<int>(opts.workers, static_cast<int>(entries.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& o : res.entries) res.exit_code = combine(res.exit_code, o.exit_code);
    return res;
}

RunResult run_manifest_file(const std::string& path, const RunOptions& opts) {
    json m;
    try {
        m = read_json_file(path);
    } catch (const ValidationError& e) {
        RunResult r;
        r.errors.push_back(e.what());
        r.exit_code = kExitValidation;
        if (opts.log) opts.log(LogLevel::error, e.what());
        return r;
    }
    return run_manifest(m, fs::path(path).parent_path().string(), opts);
}

ValidationListing validate_dataset_file(const std::string& path, const std::string& model_tag,
                                        const json& model_options) {
    ValidationListing v;
    v.path = path;
    json doc;
    try {
        doc = read_json_file(path);
    } catch (const ValidationError& e) {
        v.problems.push_back(e.what());
        return v;
    }
    v.model = model_tag;
    if (v.model.empty()) {
        if (!doc.is_object() || !doc.contains("model") || !doc["model"].is_string()) {
            v.problems.push_back("no model tag given and the dataset has no \"model\" field");
            return v;
        }
        v.model = doc["model"].get<std::string>();
    }
    std::unique_ptr<IncompleteModel> model;
    try {
        model = make_model(v.model, model_options);
    } catch (const ValidationError& e) {
        v.problems.push_back(e.what());
        return v;
    }
    auto d = check_dataset(doc, *model);
    v.problems = d.dataset;
    for (auto& [i, m] : d.units) v.problems.push_back("unit " + std::to_string(i) + ": " + m);
    return v;
}

namespace {

// Sib-pair inheritance vectors: 4 meioses, 16 equally likely states under the
// null; IBD 0, 1, 2 cover 4, 8 and 4 of them.
std::vector<double> sibpair_omega(const std::vector<double>& ibd) {
    std::vector<double> w;
    const int count[3] = {4, 8, 4};
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < count[k]; ++j) w.push_back(ibd[k] / count[k]);
    return w;
}

UnitDataset with_omega(UnitDataset d) {
    for (auto& u : d.units) {
        auto t = std::make_shared<TiltingUnit>(unit_as<TiltingUnit>(*u, "tilting"));
        t->omega_posterior = sibpair_omega(t->posterior_probs);
        u = t;
    }
    return d;
}

}  // namespace

RunResult run_demo(const std::string& out_dir, const RunOptions& opts) {
    fs::create_directories(out_dir);
    const std::uint64_t seed = opts.seed.value_or(McConfig{}.seed);
    TwoSampleCountsModel ts;
    TiltingModel tilt;
    {
        UnitDataset d;
        d.units = {TwoSampleCountsModel::make_unit(300, 200, 250, 250, 500, 500)};
        d.weights = {1.0};
        write_text((fs::path(out_dir) / "allele_counts.json").string(), dataset_to_json(d, ts).dump(2) + "\n");
    }
    {
        UnitDataset d;
        d.units = {tilting_sibpair_ibs_unit()};
        d.weights = {1.0};
        write_text((fs::path(out_dir) / "sibpair_ibs.json").string(), dataset_to_json(with_omega(d), tilt).dump(2) + "\n");
        // the observed log-likelihood varies on [-3, 0) although the score at 0 vanishes
        std::ostringstream os;
        os << "theta,loglik\n";
        char buf[64];
        for (int i = 0; i < 100; ++i) {
            const double th = -3.0 + 0.03 * i;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", th, tilting_loglik(d, th));
            os << buf;
        }
        write_text((fs::path(out_dir) / "sibpair_ibs_loglik.csv").string(), os.str());
    }
    {
        Rng rng = substream(seed, {stream_tag("demo_sibpairs")});
        auto d = with_omega(simulate_sibpairs(60, 0.4, rng));
        write_text((fs::path(out_dir) / "tilting_sibpairs.json").string(), dataset_to_json(d, tilt).dump(2) + "\n");
    }
    json manifest = {
        {"schema", kManifestSchema},
        {"entries",
         {{{"name", "allele_counts"},
           {"model", "two_sample_counts"},
           {"dataset", "allele_counts.json"},
           {"hypothesis", {{"null", {0.0}}}},
           {"measures", {"ri1", "ri0", "ri_half", "completed_ratio", "bi0", "bi_s"}}},
          {{"name", "sibpair_ibs"},
           {"model", "tilting"},
           {"dataset", "sibpair_ibs.json"},
           {"hypothesis", {{"null", {0.0}}}},
           {"measures", {"bi0", "bi_s", "entropy"}}},
          {{"name", "tilting_sibpairs"},
           {"model", "tilting"},
           {"dataset", "tilting_sibpairs.json"},
           {"hypothesis", {{"null", {0.0}}}},
           {"measures", {"ri1", "ri0", "ri_curve", "bi1", "bi2", "bi0", "bi_s", "entropy", "diagnostics"}},
           {"prior", {{"kind", "uniform"}, {"lo", -1.0}, {"hi", 1.0}}},
           {"mc", {{"seed", seed}, {"draws", 4096}}},
           {"ri_curve", {{"lo", -1.0}, {"hi", 2.0}, {"points", 101}}}}}}};
    write_text((fs::path(out_dir) / "demo_manifest.json").string(), manifest.dump(2) + "\n");
    RunOptions o = opts;
    o.out_dir = out_dir;
    return run_manifest(manifest, out_dir, o);
}

}  // namespace missinfo
