#include "missinfo/models/normal_mean.hpp"

#include "json_util.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace missinfo {

namespace {

const char* kTag = "normal_mean";
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double gauss_ll(double n, double mean, double ss, double mu, double s2) {
    if (n == 0) return 0.0;
    return -0.5 * n * (kLog2Pi + std::log(s2)) - (ss + n * (mean - mu) * (mean - mu)) / (2.0 * s2);
}

}  // namespace

NormalMeanModel::NormalMeanModel(std::optional<double> known_variance) : known_(known_variance) {
    if (known_ && !(*known_ > 0.0)) throw ValidationError("normal_mean: known_variance must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    layout_.names = {"mu"};
    layout_.roles = {Role::interest};
    layout_.lower = {-inf};
    layout_.upper = {inf};
    if (!known_) {
        layout_.names.push_back("sigma2");
        layout_.roles.push_back(Role::nuisance);
        layout_.lower.push_back(0.0);
        layout_.upper.push_back(inf);
    }
}

std::shared_ptr<NormalUnit> NormalMeanModel::make_unit(std::vector<double> observed, long n_total) {
    auto u = std::make_shared<NormalUnit>();
    u->observed = std::move(observed);
    u->n_total = n_total;
    if (!u->observed.empty()) {
        double s = 0.0;
        for (double y : u->observed) s += y;
        u->mean = s / u->observed.size();
        for (double y : u->observed) u->ss += (y - u->mean) * (y - u->mean);
    }
    return u;
}

double NormalMeanModel::loglik_obs(const ObservedUnit& unit, std::span<const double> th) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    double s2 = var(th);
    if (!(s2 > 0)) return -std::numeric_limits<double>::infinity();
    return gauss_ll(u.m(), u.mean, u.ss, th[0], s2);
}

double NormalMeanModel::q_fn(const ObservedUnit& unit, std::span<const double> t1,
                             std::span<const double> t2) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    double s1 = var(t1), s2 = var(t2);
    if (!(s1 > 0)) return -std::numeric_limits<double>::infinity();
    const double k = u.n_missing(), d = t2[0] - t1[0];
    return loglik_obs(unit, t1) - 0.5 * k * (kLog2Pi + std::log(s1)) - k * (d * d + s2) / (2.0 * s1);
}

std::unique_ptr<CompletedUnit> NormalMeanModel::sample_missing(const ObservedUnit& unit,
                                                               std::span<const double> th,
                                                               Rng& rng) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    auto c = std::make_unique<NormalCompleted>();
    std::normal_distribution<double> draw(th[0], std::sqrt(var(th)));
    // Welford merge of observed summary with the draws
    long n = u.m();
    double mean = u.mean, ss = u.ss;
    for (long i = 0; i < u.n_missing(); ++i) {
        double y = draw(rng);
        ++n;
        double dlt = y - mean;
        mean += dlt / n;
        ss += dlt * (y - mean);
    }
    c->n = n;
    c->mean = mean;
    c->ss = ss;
    return c;
}

double NormalMeanModel::loglik_comp(const CompletedUnit& unit, std::span<const double> th) const {
    auto& c = completed_as<NormalCompleted>(unit, kTag);
    double s2 = var(th);
    if (!(s2 > 0)) return -std::numeric_limits<double>::infinity();
    return gauss_ll(c.n, c.mean, c.ss, th[0], s2);
}

std::vector<double> NormalMeanModel::score_obs(const ObservedUnit& unit,
                                               std::span<const double> th) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    double s2 = var(th), m = u.m(), d = u.mean - th[0];
    std::vector<double> g{m * d / s2};
    if (!known_) g.push_back(-m / (2 * s2) + (u.ss + m * d * d) / (2 * s2 * s2));
    return g;
}

Eigen::MatrixXd NormalMeanModel::info_missing(const ObservedUnit& unit,
                                              std::span<const double> th) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    double s2 = var(th), k = u.n_missing();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
    m(0, 0) = k / s2;
    if (!known_) m(1, 1) = k / (2 * s2 * s2);
    return m;
}

std::optional<LodMoments> NormalMeanModel::completed_lod_moments(const ObservedUnit& unit,
                                                                 std::span<const double> phi,
                                                                 std::span<const double> a,
                                                                 std::span<const double> b) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    LodMoments out;
    out.mean = out.log_mgf = loglik_obs(unit, a) - loglik_obs(unit, b);
    const double k = u.n_missing();
    if (k == 0) return out;
    // per missing y: g(y) = A y^2 + B y + C with y ~ N(m, s2)
    const double va = var(a), vb = var(b), mu_a = a[0], mu_b = b[0];
    const double A = -1.0 / (2 * va) + 1.0 / (2 * vb);
    const double B = mu_a / va - mu_b / vb;
    const double C = -0.5 * std::log(va / vb) - mu_a * mu_a / (2 * va) + mu_b * mu_b / (2 * vb);
    const double m = phi[0], s2 = var(phi), s = std::sqrt(s2);
    out.mean += k * (A * (m * m + s2) + B * m + C);
    out.variance += k * (A * A * (2 * s2 * s2 + 4 * m * m * s2) + B * B * s2 + 4 * A * B * m * s2);
    const double q = 1.0 - 2.0 * A * s2;
    if (!(q > 0.0)) {
        out.log_mgf = std::numeric_limits<double>::infinity();
    } else {
        const double lin = 2 * A * m * s + B * s;
        out.log_mgf += k * (-0.5 * std::log(q) + lin * lin / (2 * q) + A * m * m + B * m + C);
    }
    return out;
}

std::optional<std::vector<double>> NormalMeanModel::m_step(const UnitDataset& data,
                                                           std::span<const double> anchor,
                                                           const std::vector<bool>& free,
                                                           std::span<const double> start) const {
    std::vector<double> out(start.begin(), start.end());
    const double mu2 = anchor[0], v2 = var(anchor);
    double n = 0.0, sum = 0.0;
    for (auto& up : data.units) {
        auto& u = unit_as<NormalUnit>(*up, kTag);
        n += u.n_total;
        sum += u.m() * u.mean + u.n_missing() * mu2;
    }
    if (n == 0) return out;
    if (free[0]) out[0] = sum / n;
    if (!known_ && free[1]) {
        const double mu = out[0];
        double ss = 0.0;
        for (auto& up : data.units) {
            auto& u = unit_as<NormalUnit>(*up, kTag);
            ss += u.ss + u.m() * (u.mean - mu) * (u.mean - mu) +
                  u.n_missing() * ((mu2 - mu) * (mu2 - mu) + v2);
        }
        out[1] = ss / n;
    }
    return out;
}

std::vector<double> NormalMeanModel::initial_point(const UnitDataset& data) const {
    double m = 0.0, sum = 0.0, sq = 0.0;
    for (auto& up : data.units) {
        auto& u = unit_as<NormalUnit>(*up, kTag);
        m += u.m();
        sum += u.m() * u.mean;
    }
    double mean = m > 0 ? sum / m : 0.0;
    for (auto& up : data.units) {
        auto& u = unit_as<NormalUnit>(*up, kTag);
        sq += u.ss + u.m() * (u.mean - mean) * (u.mean - mean);
    }
    std::vector<double> out{mean};
    if (!known_) out.push_back(m > 0 && sq > 0 ? sq / m : 1.0);
    return out;
}

double NormalMeanModel::coordinate_scale(std::span<const double> th, std::size_t k) const {
    double s2 = var(th);
    return k == 0 ? std::sqrt(s2) : s2;
}

std::vector<std::string> NormalMeanModel::check_unit(const json& j, double) const {
    std::vector<std::string> out;
    detail::check_schema(j, "normal_mean.unit/1", out);
    if (!j.is_object()) return out;
    bool have_obs = detail::need_array(j, "observed", out);
    if (have_obs)
        for (auto& v : j["observed"])
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                out.push_back("observed values must be finite numbers");
                break;
            }
    if (detail::need_count(j, "n_total", out) && have_obs &&
        j["n_total"].get<double>() < static_cast<double>(j["observed"].size()))
        out.push_back("n_total is smaller than the number of observed values");
    return out;
}

UnitPtr NormalMeanModel::parse_unit(const json& j, double w) const {
    detail::throw_if_any(check_unit(j, w), "normal_mean unit");
    return make_unit(j["observed"].get<std::vector<double>>(), j["n_total"].get<long>());
}

json NormalMeanModel::unit_to_json(const ObservedUnit& unit) const {
    auto& u = unit_as<NormalUnit>(unit, kTag);
    return {{"schema", "normal_mean.unit/1"}, {"observed", u.observed}, {"n_total", u.n_total}};
}

NormalClosedForms normal_closed_forms(const NormalUnit& unit, double mu0) {
    NormalClosedForms c;
    const double m = unit.m(), n = unit.n_total;
    if (m < 1) throw ValidationError("normal_closed_forms: need at least one observed value");
    c.r = m / n;
    const double s2 = unit.ss / m;
    if (!(s2 > 0)) throw ValidationError("normal_closed_forms: observed values have zero spread");
    c.t0 = (unit.mean - mu0) / std::sqrt(s2 / m);
    if (m == n) {
        c.ri1 = c.ri0 = c.bi0 = c.bi_s = 1.0;
        return c;
    }
    const double r = c.r, t2 = c.t0 * c.t0;
    c.ri1 = r;
    c.ri0 = (1.0 - std::log1p((1 - r * r) * t2 / m) / std::log1p(t2 / m)) / r;
    c.bi0 = r * t2 / (r * t2 + (1 - r) * (1 + t2 / m));
    c.bi_s = r;
    return c;
}

NormalClosedForms normal_closed_forms(const UnitDataset& data, double mu0) {
    std::vector<double> ys;
    long n = 0;
    for (auto& up : data.units) {
        auto& u = unit_as<NormalUnit>(*up, kTag);
        ys.insert(ys.end(), u.observed.begin(), u.observed.end());
        n += u.n_total;
    }
    return normal_closed_forms(*NormalMeanModel::make_unit(std::move(ys), n), mu0);
}

UnitDataset normal_split_units(const NormalUnit& unit) {
    UnitDataset d;
    for (double y : unit.observed) d.units.push_back(NormalMeanModel::make_unit({y}, 1));
    for (long i = 0; i < unit.n_missing(); ++i) d.units.push_back(NormalMeanModel::make_unit({}, 1));
    d.weights.assign(d.units.size(), 1.0);
    return d;
}

}  // namespace missinfo
