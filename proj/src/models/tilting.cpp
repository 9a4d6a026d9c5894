#include "missinfo/models/tilting.hpp"

#include "json_util.hpp"
#include "missinfo/numeric.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace missinfo {

namespace {

const char* kTag = "tilting";

struct Tilted {
    double log_norm;  // log sum w_j exp(t z_j)
    double mean;
    double var;
};

Tilted tilt(const std::vector<double>& logw, const std::vector<double>& z, double t) {
    const std::size_t n = z.size();
    std::vector<double> e(n);
    for (std::size_t j = 0; j < n; ++j) e[j] = logw[j] + t * z[j];
    double ln = numeric::log_sum_exp(e);
    double m = 0.0, s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double p = std::exp(e[j] - ln);
        m += p * z[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        double p = std::exp(e[j] - ln);
        s += p * (z[j] - m) * (z[j] - m);
    }
    return {ln, m, s};
}

std::vector<double> logs(const std::vector<double>& p) {
    std::vector<double> out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j)
        out[j] = p[j] > 0 ? std::log(p[j]) : -std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

double TiltingUnit::w() const {
    double m = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) m += support[j] * posterior_probs[j];
    return m;
}

double TiltingUnit::var_null_h() const {
    double m = w(), v = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j)
        v += posterior_probs[j] * (support[j] - m) * (support[j] - m);
    return v;
}

TiltingModel::TiltingModel(double theta_max) {
    if (!(theta_max > 0)) throw ValidationError("tilting: theta_max must be positive");
    layout_.names = {"theta"};
    layout_.roles = {Role::interest};
    layout_.lower = {-theta_max};
    layout_.upper = {theta_max};
}

std::shared_ptr<TiltingUnit> TiltingModel::make_unit(std::vector<double> support,
                                                     std::vector<double> null_probs,
                                                     std::vector<double> posterior_probs,
                                                     double gamma) {
    auto u = std::make_shared<TiltingUnit>();
    u->support = std::move(support);
    u->null_probs = std::move(null_probs);
    u->posterior_probs = std::move(posterior_probs);
    u->gamma = gamma;
    u->log_null = logs(u->null_probs);
    u->log_post = logs(u->posterior_probs);
    return u;
}

double TiltingModel::loglik_obs(const ObservedUnit& unit, std::span<const double> th) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    double t = u.gamma * th[0];
    return tilt(u.log_post, u.support, t).log_norm - tilt(u.log_null, u.support, t).log_norm;
}

double TiltingModel::q_fn(const ObservedUnit& unit, std::span<const double> t1,
                          std::span<const double> t2) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    double mean2 = tilt(u.log_post, u.support, u.gamma * t2[0]).mean;
    double a = u.gamma * t1[0];
    return -tilt(u.log_null, u.support, a).log_norm + a * mean2;
}

std::unique_ptr<CompletedUnit> TiltingModel::sample_missing(const ObservedUnit& unit,
                                                            std::span<const double> th,
                                                            Rng& rng) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    const double t = u.gamma * th[0];
    std::vector<double> w(u.support.size());
    double ln = tilt(u.log_post, u.support, t).log_norm;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(u.log_post[j] + t * u.support[j] - ln);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    auto c = std::make_unique<TiltingCompleted>();
    c->unit = &u;
    c->z = u.support[pick(rng)];
    return c;
}

double TiltingModel::loglik_comp(const CompletedUnit& unit, std::span<const double> th) const {
    auto& c = completed_as<TiltingCompleted>(unit, kTag);
    double a = c.unit->gamma * th[0];
    return -tilt(c.unit->log_null, c.unit->support, a).log_norm + a * c.z;
}

std::vector<double> TiltingModel::score_obs(const ObservedUnit& unit,
                                            std::span<const double> th) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    double t = u.gamma * th[0];
    return {u.gamma * (tilt(u.log_post, u.support, t).mean - tilt(u.log_null, u.support, t).mean)};
}

Eigen::MatrixXd TiltingModel::info_missing(const ObservedUnit& unit,
                                           std::span<const double> th) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = u.gamma * u.gamma * tilt(u.log_post, u.support, u.gamma * th[0]).var;
    return m;
}

std::optional<LodMoments> TiltingModel::completed_lod_moments(const ObservedUnit& unit,
                                                              std::span<const double> phi,
                                                              std::span<const double> a,
                                                              std::span<const double> b) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    const double ta = u.gamma * a[0], tb = u.gamma * b[0], slope = ta - tb;
    const double c = -tilt(u.log_null, u.support, ta).log_norm + tilt(u.log_null, u.support, tb).log_norm;
    const double tp = u.gamma * phi[0];
    Tilted f = tilt(u.log_post, u.support, tp);
    LodMoments m;
    m.mean = c + slope * f.mean;
    m.variance = slope * slope * f.var;
    m.log_mgf = c + tilt(u.log_post, u.support, tp + slope).log_norm - f.log_norm;
    return m;
}

std::optional<std::vector<double>> TiltingModel::m_step(const UnitDataset& data,
                                                        std::span<const double> anchor,
                                                        const std::vector<bool>& free,
                                                        std::span<const double> start) const {
    std::vector<double> out(start.begin(), start.end());
    if (!free[0]) return out;
    std::vector<const TiltingUnit*> us;
    std::vector<double> target;
    for (auto& up : data.units) {
        auto& u = unit_as<TiltingUnit>(*up, kTag);
        us.push_back(&u);
        target.push_back(tilt(u.log_post, u.support, u.gamma * anchor[0]).mean);
    }
    numeric::Fn1 f = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < us.size(); ++i) {
            double a = us[i]->gamma * t;
            s += -tilt(us[i]->log_null, us[i]->support, a).log_norm + a * target[i];
        }
        return s;
    };
    numeric::Fn1 df = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < us.size(); ++i)
            s += us[i]->gamma * (target[i] - tilt(us[i]->log_null, us[i]->support, us[i]->gamma * t).mean);
        return s;
    };
    auto opt = numeric::maximize_scalar(f, start[0], 0.5, layout_.lower[0], layout_.upper[0], &df);
    out[0] = opt.x;
    return out;
}

std::vector<std::string> TiltingModel::check_unit(const json& j, double weight) const {
    std::vector<std::string> out;
    detail::check_schema(j, "tilting.unit/1", out);
    if (!j.is_object()) return out;
    bool ok = detail::need_array(j, "support", out);
    ok = detail::need_array(j, "null_probs", out) && ok;
    ok = detail::need_array(j, "posterior_probs", out) && ok;
    if (!ok) return out;
    auto num_list = [&](const char* key) {
        std::vector<double> v;
        for (auto& x : j[key]) {
            if (!x.is_number()) {
                out.push_back(std::string(key) + " must contain numbers only");
                return std::vector<double>{};
            }
            v.push_back(x.get<double>());
        }
        return v;
    };
    auto z = num_list("support"), p0 = num_list("null_probs"), p = num_list("posterior_probs");
    if (z.empty()) {
        out.push_back("support is empty");
        return out;
    }
    if (p0.size() != z.size() || p.size() != z.size()) {
        out.push_back("support, null_probs and posterior_probs must have equal length");
        return out;
    }
    auto check_dist = [&](const std::vector<double>& q, const char* name) {
        double s = 0.0;
        for (double x : q) {
            if (!(x >= 0.0)) out.push_back(std::string(name) + " has a negative entry");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-12)
            out.push_back(std::string(name) + " sums to " + std::to_string(s) + ", not 1");
    };
    check_dist(p0, "null_probs");
    check_dist(p, "posterior_probs");
    double m = 0.0, v = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) m += p0[k] * z[k];
    for (std::size_t k = 0; k < z.size(); ++k) v += p0[k] * z[k] * z[k];
    if (std::abs(m) > 1e-10) out.push_back("null mean of Z is " + std::to_string(m) + ", not 0");
    if (std::abs(v - 1.0) > 1e-10) out.push_back("null variance of Z is " + std::to_string(v) + ", not 1");
    for (std::size_t k = 0; k < z.size(); ++k)
        if (p[k] > 0 && p0[k] == 0) out.push_back("posterior puts mass where the null has none");
    if (j.contains("gamma")) {
        if (!j["gamma"].is_number() || !(j["gamma"].get<double>() >= 0))
            out.push_back("gamma must be a nonnegative number");
        else if (std::abs(j["gamma"].get<double>() - weight) > 1e-12)
            out.push_back("unit gamma differs from the dataset weight");
    }
    if (j.contains("omega_posterior") && !j["omega_posterior"].is_array())
        out.push_back("omega_posterior must be an array");
    return out;
}

UnitPtr TiltingModel::parse_unit(const json& j, double weight) const {
    detail::throw_if_any(check_unit(j, weight), "tilting unit");
    double gamma = j.contains("gamma") ? j["gamma"].get<double>() : weight;
    auto u = make_unit(j["support"].get<std::vector<double>>(), j["null_probs"].get<std::vector<double>>(),
                       j["posterior_probs"].get<std::vector<double>>(), gamma);
    if (j.contains("omega_posterior")) u->omega_posterior = j["omega_posterior"].get<std::vector<double>>();
    return u;
}

json TiltingModel::unit_to_json(const ObservedUnit& unit) const {
    auto& u = unit_as<TiltingUnit>(unit, kTag);
    json j = {{"schema", "tilting.unit/1"},
              {"support", u.support},
              {"null_probs", u.null_probs},
              {"posterior_probs", u.posterior_probs},
              {"gamma", u.gamma}};
    if (!u.omega_posterior.empty()) j["omega_posterior"] = u.omega_posterior;
    return j;
}

double tilting_loglik(const UnitDataset& data, double theta) {
    TiltingModel model(std::numeric_limits<double>::infinity());
    const double th[1] = {theta};
    return dataset_loglik_obs(model, data, th);
}

TiltingScore tilting_w_statistic(const UnitDataset& data) {
    TiltingScore s;
    double num = 0.0, g2 = 0.0;
    for (auto& up : data.units) {
        auto& u = unit_as<TiltingUnit>(*up, kTag);
        s.w_i.push_back(u.w());
        num += u.gamma * u.w();
        g2 += u.gamma * u.gamma;
    }
    s.w = g2 > 0 ? num / std::sqrt(g2) : 0.0;
    return s;
}

std::shared_ptr<TiltingUnit> sibpair_unit(std::vector<double> ibd_posterior, double gamma) {
    const double r2 = std::numbers::sqrt2;
    return TiltingModel::make_unit({-r2, 0.0, r2}, {0.25, 0.5, 0.25}, std::move(ibd_posterior), gamma);
}

std::shared_ptr<TiltingUnit> tilting_sibpair_ibs_unit() { return sibpair_unit({0.5, 0.0, 0.5}); }

UnitDataset sibpair_cancellation_dataset(int n) {
    UnitDataset d;
    for (int i = 0; i < n; ++i) d.units.push_back(sibpair_unit({1.0, 0.0, 0.0}));
    for (int i = 0; i < n; ++i) d.units.push_back(sibpair_unit({0.0, 0.0, 1.0}));
    d.units.push_back(sibpair_unit({0.25, 0.5, 0.25}));
    d.weights.assign(d.units.size(), 1.0);
    return d;
}

UnitDataset simulate_sibpairs(int n, double theta_true, Rng& rng, double q_lo, double q_hi) {
    const double r2 = std::numbers::sqrt2;
    const double z[3] = {-r2, 0.0, r2}, p0[3] = {0.25, 0.5, 0.25};
    double w[3];
    for (int k = 0; k < 3; ++k) w[k] = p0[k] * std::exp(theta_true * z[k]);
    std::discrete_distribution<int> truth(w, w + 3);
    std::uniform_real_distribution<double> qd(q_lo, q_hi);
    UnitDataset d;
    for (int i = 0; i < n; ++i) {
        int t = truth(rng);
        double q = qd(rng);
        // report the truth with probability q, else a uniformly random state
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int seen = u(rng) < q ? t : std::uniform_int_distribution<int>(0, 2)(rng);
        std::vector<double> post(3);
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            post[k] = p0[k] * ((k == seen ? q : 0.0) + (1.0 - q) / 3.0);
            s += post[k];
        }
        for (auto& v : post) v /= s;
        d.units.push_back(sibpair_unit(std::move(post)));
    }
    d.weights.assign(d.units.size(), 1.0);
    return d;
}

}  // namespace missinfo
