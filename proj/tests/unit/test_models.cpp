#include "missinfo/builtin_models.hpp"
#include "missinfo/em_engine.hpp"

#include <doctest.h>

#include <cmath>

using namespace missinfo;

namespace {

UnitDataset one(UnitPtr u) {
    UnitDataset d;
    d.units.push_back(std::move(u));
    d.weights.push_back(1.0);
    return d;
}

}  // namespace

TEST_CASE("bernoulli Q matches enumeration of every completion") {
    BernoulliMcarModel m;
    auto u = BernoulliMcarModel::make_unit({1, 0, 1, 1, 0, 1, 0, 1}, 10);
    for (double t1 : {0.2, 0.55, 0.9}) {
        for (double t2 : {0.3, 0.5, 0.75}) {
            double q = 0.0;
            for (int mask = 0; mask < (1 << 10); ++mask) {
                int k = __builtin_popcount(mask);
                double p = std::pow(t2, k) * std::pow(1 - t2, 10 - k);
                BernoulliCompleted c;
                c.successes = u->successes + k;
                c.n = u->n_total();
                double th = t1;
                q += p * m.loglik_comp(c, std::span<const double>(&th, 1));
            }
            double a = t1, b = t2;
            CHECK(m.q_fn(*u, std::span<const double>(&a, 1), std::span<const double>(&b, 1)) ==
                  doctest::Approx(q).epsilon(1e-10));
        }
    }
}

TEST_CASE("tilting Q matches enumeration over the support") {
    TiltingModel m;
    auto u = TiltingModel::make_unit({-1.0, 0.5, 2.0}, {0.3, 0.5, 0.2}, {0.1, 0.3, 0.6}, 1.5);
    for (double t1 : {-0.4, 0.0, 0.8}) {
        for (double t2 : {-0.2, 0.3}) {
            double norm = 0.0, q = 0.0;
            for (std::size_t k = 0; k < 3; ++k) norm += u->posterior_probs[k] * std::exp(t2 * 1.5 * u->support[k]);
            for (std::size_t k = 0; k < 3; ++k) {
                TiltingCompleted c;
                c.unit = u.get();
                c.z = u->support[k];
                q += u->posterior_probs[k] * std::exp(t2 * 1.5 * u->support[k]) / norm *
                     m.loglik_comp(c, std::span<const double>(&t1, 1));
            }
            CHECK(m.q_fn(*u, std::span<const double>(&t1, 1), std::span<const double>(&t2, 1)) ==
                  doctest::Approx(q).epsilon(1e-10));
        }
    }
}

TEST_CASE("tilting log-likelihood vanishes at theta = 0 and reduces to a logit for binary Z") {
    Rng rng = substream(7, {1});
    auto data = simulate_sibpairs(40, 0.3, rng);
    CHECK(tilting_loglik(data, 0.0) == doctest::Approx(0.0).epsilon(1e-14));

    TiltingModel m;
    auto u = TiltingModel::make_unit({-1.0, 1.0}, {0.5, 0.5}, {0.2, 0.8});
    const double th = 0.7;
    // P_theta(Z = 1) = expit(2 theta); observed likelihood 0.2 (1 - a) / 0.5 + 0.8 a / 0.5
    const double a = 1.0 / (1.0 + std::exp(-2 * th));
    CHECK(m.loglik_obs(*u, std::span<const double>(&th, 1)) ==
          doctest::Approx(std::log(0.4 * (1 - a) + 1.6 * a)).epsilon(1e-13));
}

TEST_CASE("tilting unit invariants") {
    TiltingModel m;
    json bad = {{"schema", "tilting.unit/1"},
                {"support", {-1.0, 0.0, 1.0}},
                {"null_probs", {0.25, 0.5, 0.25}},
                {"posterior_probs", {0.2, 0.5, 0.28}}};
    auto v = m.check_unit(bad, 1.0);
    CHECK_FALSE(v.empty());
    CHECK_THROWS_AS(m.parse_unit(bad, 1.0), ValidationError);

    json doc = {{"schema", "missinfo.dataset/1"},
                {"model", "tilting"},
                {"units", {{{"schema", "tilting.unit/1"},
                            {"support", {-1.0, 1.0}},
                            {"null_probs", {0.5, 0.5}},
                            {"posterior_probs", {0.5, 0.5}}}}},
                {"weights", {-1.0}}};
    CHECK_FALSE(check_dataset(doc, m).ok());
}

TEST_CASE("bernoulli statistics reproduce n0/n") {
    auto s = bernoulli_statistics(13, 25, 100, 0.3);
    CHECK(s.r_hat_alt == 0.25);
    CHECK(s.r_hat_null == 0.25);
    auto full = bernoulli_statistics(13, 25, 25, 0.3);
    CHECK(full.t_ob == full.t_alt);
    CHECK(full.t_ob == full.t_null);
    auto deg = bernoulli_statistics(10, 20, 100, 0.5);
    CHECK(deg.degenerate);
    CHECK(std::isnan(deg.r_hat_alt));
    CHECK(bernoulli_statistics(0, 25, 100, 0.3).boundary);
}

TEST_CASE("two-sample LRT: no missing data and doubled missing counts") {
    auto none = TwoSampleCountsModel::make_unit(300, 200, 250, 250, 0, 0);
    auto a = two_sample_lrt(*none);
    CHECK(a.chi2_joint_em == doctest::Approx(a.chi2_obs).epsilon(1e-12));
    CHECK(a.chi2_separate_em == doctest::Approx(a.chi2_obs).epsilon(1e-12));

    auto dbl = TwoSampleCountsModel::make_unit(300, 200, 250, 250, 1000, 1000);
    auto b = two_sample_lrt(*dbl);
    CHECK(b.chi2_separate_em == doctest::Approx(3 * b.chi2_obs).epsilon(1e-12));
    CHECK(b.chi2_joint_em < b.chi2_obs);
}

TEST_CASE("haplotype EM returns empirical frequencies when every phase is known") {
    HaplotypeCCModel m;
    json unit = {{"schema", "haplotype_cc.unit/1"},
                 {"subjects",
                  {{{"case", true}, {"haplotypes", {"TX", "TX"}}},
                   {{"case", true}, {"haplotypes", {"TX", "C0"}}},
                   {{"case", false}, {"haplotypes", {"T0", "CX"}}},
                   {{"case", false}, {"haplotypes", {"C0", "C0"}}}}}};
    auto data = one(m.parse_unit(unit, 1.0));
    auto sep = haplotype_em(data, HaplotypeGrouping::separate);
    CHECK(sep.converged);
    CHECK(sep.case_freq[TX] == doctest::Approx(0.75));
    CHECK(sep.case_freq[C0] == doctest::Approx(0.25));
    CHECK(sep.control_freq[T0] == doctest::Approx(0.25));
    CHECK(sep.control_freq[CX] == doctest::Approx(0.25));
    CHECK(sep.control_freq[C0] == doctest::Approx(0.5));
    auto joint = haplotype_em(data, HaplotypeGrouping::joint);
    CHECK(joint.case_freq[TX] == doctest::Approx(0.375));
    CHECK(joint.control_freq == joint.case_freq);
}

TEST_CASE("haplotype simulation and fit") {
    Rng rng = substream(11, {2});
    TwoSnpSimulation cfg;
    cfg.n_cases = 300;
    cfg.n_controls = 300;
    CHECK(allele_correlation(cfg.control_freq) == doctest::Approx(0.85).epsilon(0.01));
    auto unit = std::make_shared<HaplotypeUnit>(simulate_two_snp(cfg, rng));
    auto data = one(unit);
    HaplotypeCCModel m;
    auto fit = fit_mle(m, data);
    CHECK(fit.converged);
    auto em = haplotype_em(data, HaplotypeGrouping::separate);
    CHECK(fit.loglik == doctest::Approx(dataset_loglik_obs(m, data, fit.theta_hat)));
    auto f = m.frequencies(fit.theta_hat.values());
    for (int k = 0; k < 4; ++k) CHECK(f[0][k] == doctest::Approx(em.case_freq[k]).epsilon(1e-5));
}

TEST_CASE("normal model with known variance has RI_E = m/n") {
    NormalMeanModel m(1.0);
    auto u = NormalMeanModel::make_unit({0.3, -0.2, 1.1, 0.4}, 10);
    auto data = one(u);
    auto fit = fit_mle(m, data);
    CHECK(fit.theta_hat[0] == doctest::Approx(0.4).epsilon(1e-8));
    auto info = info_decomposition(m, data, fit.theta_hat);
    CHECK(fraction_observed_information(info, 0) == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("entropy measure") {
    auto r = entropy_measure({{0.25, 0.25, 0.25, 0.25}, {1.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.0, 0.0}, {1.0}});
    CHECK(r.per_family[0] == doctest::Approx(0.0));
    CHECK(r.per_family[1] == doctest::Approx(1.0));
    CHECK(r.per_family[2] == doctest::Approx(0.5));
    CHECK(std::isnan(r.per_family[3]));
    REQUIRE(r.excluded.size() == 1);
    CHECK(r.excluded[0] == 3);
    CHECK(r.global == doctest::Approx(0.5));
}

TEST_CASE("model registry and dataset round trip") {
    for (auto& tag : model_tags()) CHECK(make_model(tag)->tag() == tag);
    CHECK_THROWS_AS(make_model("nope"), ValidationError);
    auto m = make_model("bernoulli_mcar");
    json doc = {{"schema", "missinfo.dataset/1"},
                {"model", "bernoulli_mcar"},
                {"units", {{{"schema", "bernoulli_mcar.unit/1"}, {"observed", {1, 0, 1}}, {"n_missing", 2}}}}};
    auto d = load_dataset(doc, *m);
    auto back = dataset_to_json(d, *m);
    auto d2 = load_dataset(back, *m);
    const double th = 0.4;
    CHECK(dataset_loglik_obs(*m, d, std::span<const double>(&th, 1)) ==
          dataset_loglik_obs(*m, d2, std::span<const double>(&th, 1)));
}
