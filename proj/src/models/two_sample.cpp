#include "missinfo/models/two_sample.hpp"

#include "json_util.hpp"

#include <cmath>
#include <random>

namespace missinfo {

using detail::expit;
using detail::log_expit;
using detail::xlogy;

namespace {

constexpr double kBound = 40.0;
const char* kTag = "two_sample_counts";

double bin_ll(double k1, double k2, double x) {
    // k1 log expit(x) + k2 log(1 - expit(x))
    return (k1 == 0 ? 0.0 : k1 * log_expit(x)) + (k2 == 0 ? 0.0 : k2 * log_expit(-x));
}

TwoSampleUnit aggregate(const UnitDataset& data) {
    TwoSampleUnit t;
    for (auto& up : data.units) {
        auto& u = unit_as<TwoSampleUnit>(*up, kTag);
        t.case1 += u.case1;
        t.case2 += u.case2;
        t.control1 += u.control1;
        t.control2 += u.control2;
        t.missing_case += u.missing_case;
        t.missing_control += u.missing_control;
    }
    return t;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

TwoSampleCountsModel::TwoSampleCountsModel() {
    layout_.names = {"psi", "eta"};
    layout_.roles = {Role::interest, Role::nuisance};
    layout_.lower = {-kBound, -kBound};
    layout_.upper = {kBound, kBound};
}

std::shared_ptr<TwoSampleUnit> TwoSampleCountsModel::make_unit(double c1, double c2, double u1,
                                                              double u2, double mc, double mu) {
    auto u = std::make_shared<TwoSampleUnit>();
    u->case1 = c1;
    u->case2 = c2;
    u->control1 = u1;
    u->control2 = u2;
    u->missing_case = mc;
    u->missing_control = mu;
    return u;
}

double TwoSampleCountsModel::case_freq(std::span<const double> th) { return expit(th[1] + th[0]); }
double TwoSampleCountsModel::control_freq(std::span<const double> th) { return expit(th[1]); }

std::vector<double> TwoSampleCountsModel::from_freqs(double a, double u) {
    double eta = logit(u);
    return {logit(a) - eta, eta};
}

double TwoSampleCountsModel::loglik_obs(const ObservedUnit& unit, std::span<const double> th) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    return bin_ll(u.case1, u.case2, th[1] + th[0]) + bin_ll(u.control1, u.control2, th[1]);
}

double TwoSampleCountsModel::q_fn(const ObservedUnit& unit, std::span<const double> t1,
                                  std::span<const double> t2) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    const double a2 = case_freq(t2), u2 = control_freq(t2);
    return bin_ll(u.case1 + u.missing_case * a2, u.case2 + u.missing_case * (1 - a2), t1[1] + t1[0]) +
           bin_ll(u.control1 + u.missing_control * u2, u.control2 + u.missing_control * (1 - u2), t1[1]);
}

std::unique_ptr<CompletedUnit> TwoSampleCountsModel::sample_missing(const ObservedUnit& unit,
                                                                    std::span<const double> th,
                                                                    Rng& rng) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    auto c = std::make_unique<TwoSampleCompleted>();
    auto mc = static_cast<long>(u.missing_case), mu = static_cast<long>(u.missing_control);
    long kc = mc > 0 ? std::binomial_distribution<long>(mc, case_freq(th))(rng) : 0;
    long ku = mu > 0 ? std::binomial_distribution<long>(mu, control_freq(th))(rng) : 0;
    c->case1 = u.case1 + kc;
    c->case2 = u.case2 + (mc - kc);
    c->control1 = u.control1 + ku;
    c->control2 = u.control2 + (mu - ku);
    return c;
}

double TwoSampleCountsModel::loglik_comp(const CompletedUnit& unit, std::span<const double> th) const {
    auto& c = completed_as<TwoSampleCompleted>(unit, kTag);
    return bin_ll(c.case1, c.case2, th[1] + th[0]) + bin_ll(c.control1, c.control2, th[1]);
}

std::vector<double> TwoSampleCountsModel::score_obs(const ObservedUnit& unit,
                                                    std::span<const double> th) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    double sc = u.case1 - (u.case1 + u.case2) * case_freq(th);
    double su = u.control1 - (u.control1 + u.control2) * control_freq(th);
    return {sc, sc + su};
}

Eigen::MatrixXd TwoSampleCountsModel::info_missing(const ObservedUnit& unit,
                                                   std::span<const double> th) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    double a = case_freq(th), c = control_freq(th);
    double va = u.missing_case * a * (1 - a), vu = u.missing_control * c * (1 - c);
    Eigen::MatrixXd m(2, 2);
    m << va, va, va, va + vu;
    return m;
}

std::optional<LodMoments> TwoSampleCountsModel::completed_lod_moments(const ObservedUnit& unit,
                                                                      std::span<const double> phi,
                                                                      std::span<const double> a,
                                                                      std::span<const double> b) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    LodMoments m;
    m.mean = m.log_mgf = loglik_obs(unit, a) - loglik_obs(unit, b);
    // one binomial block of missing chromosomes per group
    auto block = [&](double k, double xa, double xb, double f) {
        if (k == 0) return;
        double alpha = log_expit(xa) - log_expit(xb);
        double beta = log_expit(-xa) - log_expit(-xb);
        double d = alpha - beta;
        m.mean += k * beta + k * f * d;
        m.variance += k * f * (1 - f) * d * d;
        m.log_mgf += k * beta + k * std::log1p(f * std::expm1(d));
    };
    block(u.missing_case, a[1] + a[0], b[1] + b[0], case_freq(phi));
    block(u.missing_control, a[1], b[1], control_freq(phi));
    return m;
}

std::optional<std::vector<double>> TwoSampleCountsModel::m_step(const UnitDataset& data,
                                                                std::span<const double> anchor,
                                                                const std::vector<bool>& free,
                                                                std::span<const double> start) const {
    std::vector<double> out(start.begin(), start.end());
    auto t = aggregate(data);
    const double a2 = case_freq(anchor), u2 = control_freq(anchor);
    const double e_c1 = t.case1 + t.missing_case * a2, e_c = t.case1 + t.case2 + t.missing_case;
    const double e_u1 = t.control1 + t.missing_control * u2,
                 e_u = t.control1 + t.control2 + t.missing_control;
    auto clampb = [](double x) { return std::clamp(x, -kBound, kBound); };
    auto safe_logit = [&](double num, double den) {
        if (den <= 0) return 0.0;
        if (num <= 0) return -kBound;
        if (num >= den) return kBound;
        return logit(num / den);
    };
    if (free[0] && free[1]) {
        double eta = safe_logit(e_u1, e_u);
        out = {clampb(safe_logit(e_c1, e_c) - eta), clampb(eta)};
    } else if (free[0]) {
        out[0] = clampb(safe_logit(e_c1, e_c) - out[1]);
    } else if (free[1]) {
        // concave in eta with psi held: Newton with step halving
        const double psi = out[0];
        double eta = out[1];
        auto f = [&](double e) { return bin_ll(e_c1, e_c - e_c1, e + psi) + bin_ll(e_u1, e_u - e_u1, e); };
        for (int it = 0; it < 100; ++it) {
            double a = expit(eta + psi), c = expit(eta);
            double g = (e_c1 - e_c * a) + (e_u1 - e_u * c);
            double h = -(e_c * a * (1 - a) + e_u * c * (1 - c));
            if (h >= 0 || std::abs(g) < 1e-14 * (1 + e_c + e_u)) break;
            double step = -g / h, f0 = f(eta);
            double next = clampb(eta + step);
            while (f(next) < f0 && std::abs(next - eta) > 1e-16) next = eta + 0.5 * (next - eta);
            if (next == eta) break;
            eta = next;
        }
        out[1] = eta;
    }
    return out;
}

double allele_table_chi2(double c1, double c2, double u1, double u2) {
    const double nc = c1 + c2, nu = u1 + u2, n = nc + nu;
    const double p = (c1 + u1) / n;
    double ll_sep = xlogy(c1, c1 / nc) + xlogy(c2, c2 / nc) + xlogy(u1, u1 / nu) + xlogy(u2, u2 / nu);
    double ll_joint = xlogy(c1 + u1, p) + xlogy(c2 + u2, 1 - p);
    return 2.0 * (ll_sep - ll_joint);
}

namespace {

void require_positive_cells(double c1, double c2, double u1, double u2, const char* what) {
    if (!(c1 > 0 && c2 > 0 && u1 > 0 && u2 > 0))
        throw ValidationError(std::string(what) +
                              " has a zero cell; no continuity correction is applied, aggregate "
                              "units or drop the empty allele");
}

}  // namespace

TwoSampleLrt two_sample_lrt(const TwoSampleUnit& u) {
    if (!(u.case1 + u.case2 > 0 && u.control1 + u.control2 > 0 && u.case1 + u.control1 > 0 &&
          u.case2 + u.control2 > 0))
        throw ValidationError("two_sample_lrt: every margin of the observed table must be positive");
    TwoSampleLrt r;
    r.case_freq = u.case1 / (u.case1 + u.case2);
    r.control_freq = u.control1 / (u.control1 + u.control2);
    r.pooled = (u.case1 + u.control1) / (u.case1 + u.case2 + u.control1 + u.control2);
    r.chi2_obs = allele_table_chi2(u.case1, u.case2, u.control1, u.control2);
    auto completed = [&](double a, double c) {
        double c1 = u.case1 + u.missing_case * a, c2 = u.case2 + u.missing_case * (1 - a);
        double u1 = u.control1 + u.missing_control * c, u2 = u.control2 + u.missing_control * (1 - c);
        require_positive_cells(c1, c2, u1, u2, "completed table");
        return allele_table_chi2(c1, c2, u1, u2);
    };
    r.chi2_joint_em = completed(r.pooled, r.pooled);
    r.chi2_separate_em = completed(r.case_freq, r.control_freq);
    return r;
}

TwoSampleLrt two_sample_lrt(const UnitDataset& data) { return two_sample_lrt(aggregate(data)); }

std::optional<CompletedStatistics> TwoSampleCountsModel::completed_statistics(
    const UnitDataset& data, std::span<const double> th_ob, std::span<const double> th0) const {
    auto t = aggregate(data);
    auto completed = [&](std::span<const double> th) {
        double a = case_freq(th), c = control_freq(th);
        double c1 = t.case1 + t.missing_case * a, c2 = t.case2 + t.missing_case * (1 - a);
        double u1 = t.control1 + t.missing_control * c, u2 = t.control2 + t.missing_control * (1 - c);
        require_positive_cells(c1, c2, u1, u2, "completed table");
        return allele_table_chi2(c1, c2, u1, u2);
    };
    require_positive_cells(t.case1, t.case2, t.control1, t.control2, "observed table");
    return CompletedStatistics{allele_table_chi2(t.case1, t.case2, t.control1, t.control2),
                               completed(th_ob), completed(th0)};
}

std::vector<double> TwoSampleCountsModel::initial_point(const UnitDataset& data) const {
    auto t = aggregate(data);
    double a = (t.case1 + 0.5) / (t.case1 + t.case2 + 1.0);
    double u = (t.control1 + 0.5) / (t.control1 + t.control2 + 1.0);
    return from_freqs(a, u);
}

std::vector<std::string> TwoSampleCountsModel::check_unit(const json& j, double) const {
    std::vector<std::string> out;
    detail::check_schema(j, "two_sample_counts.unit/1", out);
    if (!j.is_object()) return out;
    for (const char* key : {"case_counts", "control_counts"}) {
        if (!detail::need_array(j, key, out)) continue;
        if (j[key].size() != 2) {
            out.push_back(std::string(key) + " must have two entries (allele 1, allele 2)");
            continue;
        }
        for (auto& v : j[key])
            if (!detail::is_count(v) || v.get<double>() < 0)
                out.push_back(std::string(key) + " entries must be nonnegative integers");
    }
    detail::need_count(j, "missing_case_chroms", out);
    detail::need_count(j, "missing_control_chroms", out);
    return out;
}

UnitPtr TwoSampleCountsModel::parse_unit(const json& j, double w) const {
    detail::throw_if_any(check_unit(j, w), "two_sample_counts unit");
    return make_unit(j["case_counts"][0].get<double>(), j["case_counts"][1].get<double>(),
                     j["control_counts"][0].get<double>(), j["control_counts"][1].get<double>(),
                     j["missing_case_chroms"].get<double>(), j["missing_control_chroms"].get<double>());
}

json TwoSampleCountsModel::unit_to_json(const ObservedUnit& unit) const {
    auto& u = unit_as<TwoSampleUnit>(unit, kTag);
    return {{"schema", "two_sample_counts.unit/1"},
            {"case_counts", {std::lround(u.case1), std::lround(u.case2)}},
            {"control_counts", {std::lround(u.control1), std::lround(u.control2)}},
            {"missing_case_chroms", std::lround(u.missing_case)},
            {"missing_control_chroms", std::lround(u.missing_control)}};
}

}  // namespace missinfo
