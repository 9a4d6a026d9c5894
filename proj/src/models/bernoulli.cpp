#include "missinfo/models/bernoulli.hpp"

#include "json_util.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <random>

namespace missinfo {

using detail::xlogy;
namespace mp = boost::multiprecision;

BernoulliMcarModel::BernoulliMcarModel() {
    layout_.names = {"p"};
    layout_.roles = {Role::interest};
    layout_.lower = {0.0};
    layout_.upper = {1.0};
}

std::shared_ptr<BernoulliUnit> BernoulliMcarModel::make_unit(std::vector<int> observed, long n_missing) {
    auto u = std::make_shared<BernoulliUnit>();
    u->observed = std::move(observed);
    u->n_missing = n_missing;
    for (int y : u->observed) u->successes += y;
    return u;
}

double BernoulliMcarModel::loglik_obs(const ObservedUnit& unit, std::span<const double> th) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    double p = th[0];
    return xlogy(u.successes, p) + xlogy(u.n_observed() - u.successes, 1.0 - p);
}

double BernoulliMcarModel::q_fn(const ObservedUnit& unit, std::span<const double> t1,
                                std::span<const double> t2) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    double p = t1[0], p2 = t2[0];
    double k = static_cast<double>(u.n_missing);
    return loglik_obs(unit, t1) + xlogy(k * p2, p) + xlogy(k * (1.0 - p2), 1.0 - p);
}

std::unique_ptr<CompletedUnit> BernoulliMcarModel::sample_missing(const ObservedUnit& unit,
                                                                  std::span<const double> th,
                                                                  Rng& rng) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    auto c = std::make_unique<BernoulliCompleted>();
    std::binomial_distribution<long> draw(u.n_missing, th[0]);
    c->successes = u.successes + (u.n_missing > 0 ? draw(rng) : 0);
    c->n = u.n_total();
    return c;
}

double BernoulliMcarModel::loglik_comp(const CompletedUnit& unit, std::span<const double> th) const {
    auto& c = completed_as<BernoulliCompleted>(unit, "bernoulli_mcar");
    return xlogy(c.successes, th[0]) + xlogy(c.n - c.successes, 1.0 - th[0]);
}

std::vector<double> BernoulliMcarModel::score_obs(const ObservedUnit& unit,
                                                  std::span<const double> th) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    double p = th[0];
    double s = u.successes, f = u.n_observed() - u.successes;
    return {(s == 0 ? 0.0 : s / p) - (f == 0 ? 0.0 : f / (1.0 - p))};
}

Eigen::MatrixXd BernoulliMcarModel::info_missing(const ObservedUnit& unit,
                                                 std::span<const double> th) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = u.n_missing == 0 ? 0.0 : u.n_missing / (th[0] * (1.0 - th[0]));
    return m;
}

std::optional<LodMoments> BernoulliMcarModel::completed_lod_moments(const ObservedUnit& unit,
                                                                    std::span<const double> phi,
                                                                    std::span<const double> a,
                                                                    std::span<const double> b) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    LodMoments m;
    const double c = loglik_obs(unit, a) - loglik_obs(unit, b);
    if (u.n_missing == 0) {
        m.mean = m.log_mgf = c;
        return m;
    }
    const double k = static_cast<double>(u.n_missing), f = phi[0];
    // each missing y contributes alpha if 1, beta if 0
    const double alpha = std::log(a[0]) - std::log(b[0]);
    const double beta = std::log1p(-a[0]) - std::log1p(-b[0]);
    const double delta = alpha - beta;
    m.mean = c + k * beta + k * f * delta;
    m.variance = k * f * (1.0 - f) * delta * delta;
    m.log_mgf = c + k * beta + k * std::log1p(f * std::expm1(delta));
    return m;
}

std::optional<std::vector<double>> BernoulliMcarModel::m_step(const UnitDataset& data,
                                                              std::span<const double> anchor,
                                                              const std::vector<bool>& free,
                                                              std::span<const double> start) const {
    std::vector<double> out(start.begin(), start.end());
    if (!free[0]) return out;
    double num = 0.0, den = 0.0;
    for (auto& up : data.units) {
        auto& u = unit_as<BernoulliUnit>(*up, "bernoulli_mcar");
        num += u.successes + u.n_missing * anchor[0];
        den += u.n_total();
    }
    if (den > 0) out[0] = num / den;
    return out;
}

std::optional<CompletedStatistics> BernoulliMcarModel::completed_statistics(
    const UnitDataset& data, std::span<const double>, std::span<const double> theta0) const {
    long s = 0, n0 = 0, n = 0;
    for (auto& up : data.units) {
        auto& u = unit_as<BernoulliUnit>(*up, "bernoulli_mcar");
        s += u.successes;
        n0 += u.n_observed();
        n += u.n_total();
    }
    auto st = bernoulli_statistics(s, n0, n, theta0[0]);
    return CompletedStatistics{st.t_ob * st.t_ob, st.t_alt * st.t_alt, st.t_null * st.t_null};
}

std::vector<double> BernoulliMcarModel::initial_point(const UnitDataset& data) const {
    double s = 0.0, n = 0.0;
    for (auto& up : data.units) {
        auto& u = unit_as<BernoulliUnit>(*up, "bernoulli_mcar");
        s += u.successes;
        n += u.n_observed();
    }
    double p = n > 0 ? s / n : 0.5;
    return {std::clamp(p, 0.01, 0.99)};
}

double BernoulliMcarModel::coordinate_scale(std::span<const double> th, std::size_t) const {
    return std::max(1e-3, std::sqrt(th[0] * (1.0 - th[0])));
}

std::vector<std::string> BernoulliMcarModel::check_unit(const json& j, double) const {
    std::vector<std::string> out;
    detail::check_schema(j, "bernoulli_mcar.unit/1", out);
    if (!out.empty() && !j.is_object()) return out;
    if (detail::need_array(j, "observed", out))
        for (auto& v : j["observed"])
            if (!v.is_number_integer() || (v.get<long>() != 0 && v.get<long>() != 1)) {
                out.push_back("observed values must be 0 or 1");
                break;
            }
    detail::need_count(j, "n_missing", out);
    return out;
}

UnitPtr BernoulliMcarModel::parse_unit(const json& j, double w) const {
    detail::throw_if_any(check_unit(j, w), "bernoulli_mcar unit");
    return make_unit(j["observed"].get<std::vector<int>>(), j["n_missing"].get<long>());
}

json BernoulliMcarModel::unit_to_json(const ObservedUnit& unit) const {
    auto& u = unit_as<BernoulliUnit>(unit, "bernoulli_mcar");
    return {{"schema", "bernoulli_mcar.unit/1"}, {"observed", u.observed}, {"n_missing", u.n_missing}};
}

namespace {

mp::cpp_rational exact(double x) {
    int e = 0;
    double m = std::frexp(x, &e);
    auto mant = static_cast<long long>(std::ldexp(m, 53));
    mp::cpp_rational r(mant);
    e -= 53;
    mp::cpp_int two = 1;
    two <<= std::abs(e);
    if (e >= 0) return r * two;
    return r / two;
}

double to_double(const mp::cpp_rational& r) {
    const auto& num = mp::numerator(r);
    const auto& den = mp::denominator(r);
    static const mp::cpp_int limit = mp::cpp_int(1) << 53;
    if (mp::abs(num) <= limit && den <= limit)
        return num.convert_to<double>() / den.convert_to<double>();
    return r.convert_to<double>();
}

double signed_sqrt(const mp::cpp_rational& sq, int sign) {
    return sign * std::sqrt(to_double(sq));
}

}  // namespace

BernoulliStatistics bernoulli_statistics(long s, long n0, long n, double p0) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("bernoulli_statistics: p0 must lie in (0, 1)");
    if (n0 < 1) throw ValidationError("bernoulli_statistics: need at least one observed outcome");
    if (n < n0) throw ValidationError("bernoulli_statistics: n_total below n_observed");
    BernoulliStatistics out;
    const mp::cpp_rational P0 = exact(p0);
    const mp::cpp_rational V = P0 * (1 - P0);
    const mp::cpp_rational ybar = mp::cpp_rational(s) / n0;
    const mp::cpp_rational miss(n - n0);
    // imputed-as-real completed means
    const mp::cpp_rational y_alt = (mp::cpp_rational(s) + miss * ybar) / n;
    const mp::cpp_rational y_null = (mp::cpp_rational(s) + miss * P0) / n;
    const mp::cpp_rational t_ob2 = (ybar - P0) * (ybar - P0) * n0 / V;
    const mp::cpp_rational t_alt2 = (y_alt - P0) * (y_alt - P0) * n / V;
    const mp::cpp_rational t_null2 = (y_null - P0) * (y_null - P0) * n / V;
    int sign = ybar > P0 ? 1 : (ybar < P0 ? -1 : 0);
    out.t_ob = signed_sqrt(t_ob2, sign);
    out.t_alt = signed_sqrt(t_alt2, sign);
    out.t_null = signed_sqrt(t_null2, sign);
    out.boundary = s == 0 || s == n0;
    if (sign == 0) {
        out.degenerate = true;
        out.r_hat_alt = out.r_hat_null = std::nan("");
    } else {
        out.r_hat_alt = to_double(t_ob2 / t_alt2);
        out.r_hat_null = to_double(t_null2 / t_ob2);
    }
    return out;
}

BernoulliStatistics bernoulli_statistics(const BernoulliUnit& u, double p0) {
    return bernoulli_statistics(u.successes, u.n_observed(), u.n_total(), p0);
}

}  // namespace missinfo
