#include "missinfo/bayes_measures.hpp"
#include "missinfo/builtin_models.hpp"
#include "missinfo/diagnostics.hpp"
#include "missinfo/large_sample.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace missinfo;

namespace {

UnitDataset one(UnitPtr u) {
    UnitDataset d;
    d.units.push_back(std::move(u));
    d.weights.push_back(1.0);
    return d;
}

UnitDataset sibpairs(int n, double theta, std::uint64_t seed) {
    Rng rng = substream(seed, {static_cast<std::uint64_t>(n)});
    return simulate_sibpairs(n, theta, rng);
}

ParamPoint scalar(const IncompleteModel& m, double x) { return m.point({x}); }

}  // namespace

TEST_CASE("RI1 falls back to RI_E at the MLE and RI measures order correctly") {
    TiltingModel m;
    auto data = sibpairs(60, 0.4, 3);
    auto ob = fit_mle(m, data).theta_hat;
    auto at = compute_ri1(m, data, ob, ob);
    CHECK(at.limit_used);
    CHECK(at.value == doctest::Approx(compute_ri_e(m, data, ob)).epsilon(1e-6));

    auto r = large_sample_report(m, data, ob, scalar(m, 0.0));
    CHECK(r.q_gain_at_null <= r.lod_ob);
    CHECK(r.lod_ob <= r.expected_lod_co);
    CHECK(r.ri_half == doctest::Approx(std::sqrt(r.ri0 * r.ri1)).epsilon(1e-8));
    // families pointing away from the null make some per-unit ri1 negative
    CHECK((std::isnan(r.ri1_harmonic) || r.ri1_harmonic == doctest::Approx(r.ri1).epsilon(1e-10)));

    BernoulliMcarModel b;
    UnitDataset two = one(BernoulliMcarModel::make_unit({1, 1, 1, 0, 1, 1}, 6));
    two.units.push_back(BernoulliMcarModel::make_unit({1, 1, 0, 1, 1, 1, 1, 0}, 2));
    two.weights.push_back(1.0);
    auto bob = fit_mle(b, two).theta_hat;
    auto rb = large_sample_report(b, two, bob, scalar(b, 0.5));
    CHECK(rb.ri1_harmonic == doctest::Approx(rb.ri1).epsilon(1e-9));
}

TEST_CASE("combining rules") {
    CHECK(combine_harmonic({1.0, 3.0}, {0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(combine_harmonic({1.0, 1.0}, {0.25, 0.75}) == doctest::Approx(0.375));
    CHECK(combine_arithmetic({1.0, 3.0}, {0.2, 0.6}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(combine_harmonic({1.0}, {0.0}), ValidationError);
    CHECK_THROWS_AS(combine_arithmetic({1.0}, {1.5}), ValidationError);
}

TEST_CASE("RI curve over a tilting grid") {
    TiltingModel m;
    auto data = sibpairs(60, 0.4, 5);
    auto ob = fit_mle(m, data).theta_hat;
    std::vector<ParamPoint> grid;
    for (int i = 0; i < 101; ++i) grid.push_back(scalar(m, -1.0 + 3.0 * i / 100.0));
    auto c = ri_curve(m, data, ob, grid);
    CHECK(c.points.size() + c.omitted.size() == 101);
    CHECK(c.points.size() >= 100);
    for (auto& p : c.points) {
        CHECK(p.ri > 0.0);
        CHECK(p.ri <= 1.0 + 1e-12);
    }
    std::ostringstream os;
    write_curve_csv(os, c, 0);
    CHECK(os.str().rfind("theta,ri,flag\n", 0) == 0);
}

TEST_CASE("completed-statistic ratio needs model support") {
    TiltingModel m;
    auto data = sibpairs(10, 0.0, 1);
    CHECK_THROWS_AS(completed_stat_ratio(m, data, scalar(m, 0.2), scalar(m, 0.0)), UnsupportedError);
}

TEST_CASE("Bayes measures: no missing data gives 1, no observed data gives 0") {
    BernoulliMcarModel m;
    auto full = one(BernoulliMcarModel::make_unit({1, 1, 0, 1, 0, 0, 1, 1}, 0));
    auto prior = PriorSpec::uniform(0.2, 0.8);
    auto t0 = scalar(m, 0.5);
    CHECK(compute_bi1(m, full, t0, prior).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(compute_bi2(m, full, t0, prior).value == doctest::Approx(1.0).epsilon(1e-12));

    auto blind = one(BernoulliMcarModel::make_unit({}, 8));
    CHECK(compute_bi1(m, blind, t0, prior).value == doctest::Approx(0.0));
    CHECK(compute_bi2(m, blind, t0, prior).value == doctest::Approx(0.0));
}

TEST_CASE("point-mass prior at theta0 gives Bayes factor 1") {
    BernoulliMcarModel m;
    auto data = one(BernoulliMcarModel::make_unit({1, 1, 0, 1}, 4));
    auto prior = PriorSpec::from_json({{"kind", "point_mass"}, {"at", 0.5}});
    CHECK(prior.point_mass());
    CHECK(bayes_factor_quadrature(m, data, scalar(m, 0.5), prior) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("covariance form agrees with BI1") {
    BernoulliMcarModel m;
    auto data = one(BernoulliMcarModel::make_unit({1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1}, 12));
    auto prior = PriorSpec::uniform(0.35, 0.75);
    auto t0 = scalar(m, 0.55);
    auto exact = compute_bi1(m, data, t0, prior);
    McConfig mc;
    mc.draws = 16384;
    auto cov = compute_bi1_covform(m, data, t0, prior, mc);
    CHECK(std::abs(cov.value - exact.value) <= 4 * cov.se + 1e-3);
}

TEST_CASE("BI2 lies in [0, 1] and Monte Carlo agrees with the exact path") {
    TiltingModel m;
    auto data = sibpairs(30, 0.3, 9);
    auto t0 = scalar(m, 0.0);
    Rng rng = substream(99, {0});
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 8; ++k) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        a = std::min(a, -0.05);
        b = std::max(b, 0.05);
        auto v = compute_bi2(m, data, t0, PriorSpec::uniform(a, b));
        CHECK(v.value >= 0.0);
        CHECK(v.value <= 1.0);
    }
    auto prior = PriorSpec::uniform(-0.5, 0.5);
    auto exact = compute_bi2(m, data, t0, prior);
    McConfig mc;
    mc.method = BayesMethod::monte_carlo;
    auto est = compute_bi2(m, data, t0, prior, mc);
    CHECK_FALSE(est.exact);
    CHECK(std::abs(est.value - exact.value) <= 4 * est.se + 1e-3);
}

TEST_CASE("averaging nuisance parameters over a prior is not supported") {
    TwoSampleCountsModel m;
    auto data = one(TwoSampleCountsModel::make_unit(30, 20, 25, 25, 10, 10));
    McConfig mc;
    mc.nuisance = NuisancePolicy::average_over_prior;
    CHECK_THROWS_AS(compute_bi1(m, data, m.point({0.0, 0.0}), PriorSpec::uniform(-1, 1), mc),
                    UnsupportedError);
}

TEST_CASE("BI0 and BI_s") {
    TiltingModel m;
    auto data = sibpairs(40, 0.2, 13);
    auto t0 = scalar(m, 0.0);
    auto tb = compute_bi0_tilting(data);
    CHECK(tb.bi0 == doctest::Approx(compute_bi0(m, data, t0)).epsilon(1e-8));
    CHECK(tb.approximation == doctest::Approx(1.0 - tb.var_z));

    auto single = one(data.units[0]);
    CHECK(compute_bi_s(m, single, t0) == doctest::Approx(compute_bi0(m, single, t0)).epsilon(1e-12));
}

TEST_CASE("BI_s approaches RI_E as the number of families grows") {
    TiltingModel m;
    for (int n : {10, 100, 1000}) {
        auto data = sibpairs(n, 0.0, 21);
        const double bs = compute_bi_s(m, data, scalar(m, 0.0));
        CHECK(bs >= 0.0);
        CHECK(bs <= 1.0);
        if (n == 1000) {
            auto ob = fit_mle(m, data).theta_hat;
            CHECK(std::abs(bs - compute_ri_e(m, data, ob)) <= 0.05);
        }
    }
}

TEST_CASE("shrinking priors approach BI0") {
    NormalMeanModel m(1.0);
    auto data = one(NormalMeanModel::make_unit({0.4, -0.1, 0.9, 0.2, 0.5, 0.3}, 10));
    auto t0 = scalar(m, 0.0);
    auto t = shrink_convergence(m, data, t0, {0.4, 0.2, 0.1});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.monotone);
    CHECK(std::abs(t.rows.back().bi2.value - t.bi0) < std::abs(t.rows.front().bi2.value - t.bi0));
}

TEST_CASE("EM identities hold for the normal model") {
    NormalMeanModel m;
    auto data = one(NormalMeanModel::make_unit({0.4, -0.1, 0.9, 0.2, 0.5, 0.3, 1.4}, 12));
    auto ob = fit_mle(m, data).theta_hat;
    auto r = em_identity_suite(m, data, ob, 4);
    CHECK(r.all_pass());
    CHECK(r.checks.size() >= 24);
}

TEST_CASE("expansion checks need a scalar parameter") {
    TwoSampleCountsModel m;
    auto data = one(TwoSampleCountsModel::make_unit(30, 20, 25, 25, 10, 10));
    auto ob = fit_mle(m, data).theta_hat;
    CHECK_THROWS_AS(expansion_check_ri1(m, data, ob), UnsupportedError);
}

TEST_CASE("per-unit combined BI2 under a wide prior tracks BI_s") {
    TiltingModel m;
    auto prior = PriorSpec::uniform(-1.0, 1.0);
    for (double th : {0.0, 0.4}) {
        auto data = sibpairs(60, th, 17);
        auto t0 = scalar(m, 0.0);
        auto b2 = compute_bi2_combined(m, data, t0, prior);
        CHECK(std::abs(b2.value - compute_bi_s(m, data, t0)) < 0.1);
        auto b1 = compute_bi1_combined(m, data, t0, prior);
        CHECK(b1.value >= 0.0);
        CHECK(b1.value <= b2.value + 0.2);
    }
    // one unit: the combination is the plain measure
    BernoulliMcarModel b;
    auto single = one(BernoulliMcarModel::make_unit({1, 0, 1, 1}, 3));
    auto p = PriorSpec::uniform(0.2, 0.8);
    CHECK(compute_bi2_combined(b, single, scalar(b, 0.5), p).value ==
          doctest::Approx(compute_bi2(b, single, scalar(b, 0.5), p).value).epsilon(1e-14));
}
