#include "missinfo/report.hpp"
#include "missinfo/runner.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace missinfo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("missinfo_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json allele_counts_entry() {
    return {{"name", "s33"},
            {"model", "two_sample_counts"},
            {"dataset", "allele_counts.json"},
            {"hypothesis", {{"null", {0.0}}}},
            {"measures", {"ri1", "ri0", "completed_ratio"}}};
}

}  // namespace

TEST_CASE("manifest validation") {
    json m = {{"schema", kManifestSchema}, {"entries", {allele_counts_entry()}}};
    CHECK(check_manifest(m).empty());

    auto bad = m;
    bad["entries"][0]["measures"] = json::array();
    CHECK_FALSE(check_manifest(bad).empty());
    auto r = run_manifest(bad, MISSINFO_DATA_DIR, {});
    CHECK(r.exit_code == kExitValidation);

    bad = m;
    bad["entries"][0]["colour"] = "blue";
    CHECK_FALSE(check_manifest(bad).empty());
    bad = m;
    bad["entries"][0]["mc"] = {{"draws", 10}};
    CHECK_FALSE(check_manifest(bad).empty());
    bad = m;
    bad["schema"] = "something/2";
    CHECK_FALSE(check_manifest(bad).empty());
}

TEST_CASE("running a manifest writes a report and is reproducible") {
    auto out = scratch("run");
    json m = {{"schema", kManifestSchema}, {"entries", {allele_counts_entry()}}};
    RunOptions o;
    o.out_dir = out.string();
    auto r1 = run_manifest(m, MISSINFO_DATA_DIR, o);
    REQUIRE(r1.exit_code == kExitOk);
    REQUIRE(r1.entries.size() == 1);
    const auto& rep = r1.entries[0].report;
    CHECK(rep["schema"] == kReportSchema);
    CHECK(rep["manifest_hash"] == manifest_hash(m));
    CHECK(rep["measures"]["large_sample"]["ri1"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    const std::string first = slurp(out / "s33.report.json");
    auto r2 = run_manifest(m, MISSINFO_DATA_DIR, o);
    CHECK(slurp(out / "s33.report.json") == first);
}

TEST_CASE("ri_curve output has one row per grid point") {
    auto out = scratch("curve");
    fs::copy_file(fs::path(MISSINFO_DATA_DIR) / "tilting_sibpairs.json", out / "t.json");
    json m = {{"schema", kManifestSchema},
              {"name", "t"},
              {"model", "tilting"},
              {"dataset", "t.json"},
              {"hypothesis", {{"null", {0.0}}}},
              {"measures", {"ri_curve"}},
              {"ri_curve", {{"lo", -1.0}, {"hi", 2.0}, {"points", 101}}}};
    RunOptions o;
    o.out_dir = out.string();
    auto r = run_manifest(m, out.string(), o);
    REQUIRE(r.exit_code == kExitOk);
    std::ifstream in(out / "t_ri_curve.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "theta,ri,flag");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const double ri = std::stod(line.substr(line.find(',') + 1));
        CHECK(ri > 0.0);
        CHECK(ri <= 1.0);
    }
    CHECK(rows == 101);
}

TEST_CASE("dataset validation lists violations") {
    auto out = scratch("validate");
    json doc = {{"schema", "missinfo.dataset/1"},
                {"model", "tilting"},
                {"units", {{{"schema", "tilting.unit/1"},
                            {"support", {-1.0, 0.0, 1.0}},
                            {"null_probs", {0.25, 0.5, 0.25}},
                            {"posterior_probs", {0.2, 0.5, 0.28}}}}},
                {"weights", {-2.0}}};
    std::ofstream(out / "bad.json") << doc.dump();
    auto v = validate_dataset_file((out / "bad.json").string());
    CHECK(v.model == "tilting");
    CHECK(v.problems.size() >= 2);

    auto ok = validate_dataset_file(std::string(MISSINFO_DATA_DIR) + "/allele_counts.json");
    CHECK(ok.ok());
    auto missing = validate_dataset_file((out / "absent.json").string());
    CHECK_FALSE(missing.ok());
}

TEST_CASE("exit codes follow the error type") {
    CHECK(exit_code_for(ValidationError("x")) == kExitValidation);
    CHECK(exit_code_for(UnsupportedError("x")) == kExitValidation);
    CHECK(exit_code_for(NumericalError("x")) == kExitNumerical);
    CHECK(exit_code_for(HeavyTailError("x")) == kExitNumerical);
}
