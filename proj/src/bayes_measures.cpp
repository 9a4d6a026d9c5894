#include "missinfo/bayes_measures.hpp"

#include "missinfo/em_engine.hpp"
#include "missinfo/errors.hpp"
#include "missinfo/models/tilting.hpp"
#include "missinfo/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

namespace missinfo {

// ---- prior -------------------------------------------------------------

PriorSpec PriorSpec::uniform(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        throw ValidationError("uniform prior needs finite lo < hi");
    PriorSpec p;
    p.kind_ = Kind::uniform_interval;
    p.nodes_ = {lo, hi};
    p.densities_ = {1.0 / (hi - lo), 1.0 / (hi - lo)};
    p.build_rule();
    return p;
}

PriorSpec PriorSpec::tabulated(std::vector<double> nodes, std::vector<double> densities,
                               bool normalize) {
    if (nodes.empty() || nodes.size() != densities.size())
        throw ValidationError("tabulated prior needs equal-length, non-empty nodes and densities");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i]) || !(densities[i] >= 0.0) || !std::isfinite(densities[i]))
            throw ValidationError("tabulated prior: nodes must be finite and densities non-negative");
        if (i > 0 && !(nodes[i] > nodes[i - 1]))
            throw ValidationError("tabulated prior: nodes must be strictly increasing");
    }
    PriorSpec p;
    p.kind_ = Kind::tabulated;
    p.nodes_ = std::move(nodes);
    p.densities_ = std::move(densities);
    if (p.nodes_.size() == 1) {
        p.rule_.nodes = {p.nodes_[0]};
        p.rule_.weights = {1.0};
        return p;
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < p.nodes_.size(); ++i)
        total += 0.5 * (p.densities_[i] + p.densities_[i + 1]) * (p.nodes_[i + 1] - p.nodes_[i]);
    if (!(total > 0.0)) throw ValidationError("tabulated prior has zero mass");
    if (normalize) {
        for (auto& d : p.densities_) d /= total;
    } else if (std::abs(total - 1.0) > 1e-10) {
        throw ValidationError("tabulated prior integrates to " + std::to_string(total) +
                              ", not 1; set \"normalize\": true to rescale");
    }
    p.normalization_ = total;
    p.build_rule();
    return p;
}

void PriorSpec::build_rule() {
    rule_ = {};
    if (kind_ == Kind::uniform_interval) {
        rule_ = numeric::gauss_legendre(201, nodes_[0], nodes_[1]);
        for (auto& w : rule_.weights) w *= densities_[0];
    } else {
        // the density is linear on each segment, so a short rule per segment is exact
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            auto seg = numeric::gauss_legendre(8, nodes_[i], nodes_[i + 1]);
            const double span = nodes_[i + 1] - nodes_[i];
            for (std::size_t q = 0; q < seg.nodes.size(); ++q) {
                double t = (seg.nodes[q] - nodes_[i]) / span;
                double d = densities_[i] * (1 - t) + densities_[i + 1] * t;
                if (d <= 0.0) continue;
                rule_.nodes.push_back(seg.nodes[q]);
                rule_.weights.push_back(seg.weights[q] * d);
            }
        }
    }
    double s = std::accumulate(rule_.weights.begin(), rule_.weights.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-10)
        throw ValidationError("prior quadrature mass is " + std::to_string(s) + ", not 1");
    for (auto& w : rule_.weights) w /= s;
}

PriorSpec PriorSpec::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ValidationError("prior: expected an object with \"kind\"");
    auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "uniform") return uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
        if (kind == "tabulated")
            return tabulated(j.at("nodes").get<std::vector<double>>(),
                             j.at("densities").get<std::vector<double>>(), j.value("normalize", false));
        if (kind == "point_mass") return tabulated({j.at("at").get<double>()}, {1.0});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("prior: ") + e.what());
    }
    throw ValidationError("prior: unknown kind \"" + kind + "\" (uniform, tabulated, point_mass)");
}

json PriorSpec::to_json() const {
    if (kind_ == Kind::uniform_interval) return {{"kind", "uniform"}, {"lo", nodes_[0]}, {"hi", nodes_[1]}};
    if (point_mass()) return {{"kind", "point_mass"}, {"at", nodes_[0]}};
    return {{"kind", "tabulated"}, {"nodes", nodes_}, {"densities", densities_}};
}

// ---- shared machinery ----------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Setup {
    std::size_t k = 0;  // interest coordinate
    std::vector<ParamPoint> thetas;  // theta0 with the interest set to each node
    std::vector<double> w;            // prior masses
    std::vector<double> lod;          // l_ob(theta_q) - l_ob(theta0)
    std::vector<double> post;         // posterior masses
    double log_a1 = 0.0;              // log sum w e^lod
    double log_a2 = 0.0;              // log sum w e^-lod
    bool exact = false;
};

Setup make_setup(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0,
                 const PriorSpec& prior, const McConfig& mc) {
    if (mc.nuisance == NuisancePolicy::average_over_prior)
        throw UnsupportedError(
            "nuisance policy average_over_prior is not available: priors are one-dimensional; "
            "use fix_at_null_mle");
    Setup s;
    s.k = scalar_interest(model);
    const auto& lay = model.layout();
    if (prior.lower() < lay.lower[s.k] || prior.upper() > lay.upper[s.k])
        throw ValidationError("prior support [" + std::to_string(prior.lower()) + ", " +
                              std::to_string(prior.upper()) + "] leaves the parameter range of " +
                              lay.names[s.k]);
    switch (mc.method) {
        case BayesMethod::exact:
            if (!model.has_exact_lod_moments())
                throw UnsupportedError("model " + model.tag() + " has no exact completed-data lod moments");
            s.exact = true;
            break;
        case BayesMethod::monte_carlo: s.exact = false; break;
        case BayesMethod::automatic: s.exact = model.has_exact_lod_moments(); break;
    }
    const auto& rule = prior.rule();
    const double l0 = dataset_loglik_obs(model, data, theta0);
    if (!std::isfinite(l0)) throw ValidationError("observed log-likelihood at theta0 is not finite");
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        s.thetas.push_back(theta0.with(s.k, rule.nodes[q]));
        s.w.push_back(rule.weights[q]);
        s.lod.push_back(dataset_loglik_obs(model, data, s.thetas.back()) - l0);
    }
    std::vector<double> neg(s.lod.size());
    for (std::size_t q = 0; q < neg.size(); ++q) neg[q] = -s.lod[q];
    s.log_a1 = numeric::log_sum_exp(s.lod, s.w);
    s.log_a2 = numeric::log_sum_exp(neg, s.w);
    s.post.resize(s.w.size());
    for (std::size_t q = 0; q < s.w.size(); ++q)
        s.post[q] = s.w[q] > 0 ? std::exp(std::log(s.w[q]) + s.lod[q] - s.log_a1) : 0.0;
    return s;
}

// Batch-means standard error of a statistic of the draws.
template <class Stat>
double batch_se(std::size_t n, std::size_t batches, Stat stat) {
    if (batches < 2 || n < 2 * batches) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> vals;
    const std::size_t size = n / batches;
    for (std::size_t b = 0; b < batches; ++b) vals.push_back(stat(b * size, (b + 1) * size));
    double m = std::accumulate(vals.begin(), vals.end(), 0.0) / batches, v = 0.0;
    for (double x : vals) v += (x - m) * (x - m);
    return std::sqrt(v / (batches - 1) / batches);
}

double mean_of(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    return s / static_cast<double>(hi - lo);
}

double var_of(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    const double m = mean_of(x, lo, hi);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += (x[i] - m) * (x[i] - m);
    return s / static_cast<double>(hi - lo - 1);
}

// Complete-data log-likelihoods of one imputed data set at theta0 and every node.
struct Imputed {
    double at_theta0 = 0.0;
    std::vector<double> at_nodes;
};

Imputed impute(const IncompleteModel& model, const UnitDataset& data, const Setup& s,
               const ParamPoint& theta0, std::span<const double> draw_at, Rng& rng) {
    Imputed out;
    out.at_nodes.assign(s.thetas.size(), 0.0);
    for (const auto& u : data.units) {
        auto c = model.sample_missing(*u, draw_at, rng);
        out.at_theta0 += model.loglik_comp(*c, theta0.values());
        for (std::size_t q = 0; q < s.thetas.size(); ++q)
            out.at_nodes[q] += model.loglik_comp(*c, s.thetas[q].values());
    }
    return out;
}

double ess(const std::vector<double>& g) {
    double s = 0.0, s2 = 0.0;
    for (double x : g) {
        s += x;
        s2 += x * x;
    }
    return s2 > 0 ? s * s / s2 : 0.0;
}

std::size_t draw_index(const std::vector<double>& cdf, Rng& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& p) {
    std::vector<double> c(p.size());
    std::partial_sum(p.begin(), p.end(), c.begin());
    return c;
}

void check_finite_lod(const Setup& s) {
    for (std::size_t q = 0; q < s.lod.size(); ++q)
        if (s.w[q] > 0 && !std::isfinite(s.lod[q]))
            throw HeavyTailError(
                "observed likelihood vanishes inside the prior support, so the posterior variance "
                "of the likelihood ratio is infinite; use bi2");
}

}  // namespace

// ---- BI1 -------------------------------------------------------------------

namespace {

// Log posterior variances of LR(theta0, theta | .) up to the common factor
// A1^-2: log_v_ob exactly, log_v_co exactly or per imputed data set.
struct Bi1Parts {
    double log_v_ob = 0.0;
    double log_a1 = 0.0;
    bool exact = false;
    double log_b2 = 0.0;    // exact path
    std::vector<double> g;  // MC path: B2 draws scaled by exp(-shift)
    double shift = 0.0;
    double ess = 0.0;
    std::vector<std::string> flags;

    double log_b2_of(std::size_t lo, std::size_t hi) const {
        return exact ? log_b2 : std::log(mean_of(g, lo, hi)) + shift;
    }
};

// log(e^x - 1) for x >= 0
double log_expm1(double x) { return x > 0.0 ? x + std::log(-std::expm1(-x)) : -kInf; }

Bi1Parts bi1_parts(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0,
                   const PriorSpec& prior, const McConfig& mc, Rng rng) {
    auto s = make_setup(model, data, theta0, prior, mc);
    check_finite_lod(s);
    Bi1Parts p;
    p.log_a1 = s.log_a1;
    p.log_v_ob = s.log_a1 + s.log_a2;
    p.exact = s.exact;
    if (s.exact) {
        std::vector<double> lg(s.thetas.size());
        for (std::size_t q = 0; q < lg.size(); ++q) {
            auto m = dataset_lod_moments(model, data, theta0.values(), theta0.values(), s.thetas[q].values());
            lg[q] = m->log_mgf;
        }
        p.log_b2 = numeric::log_sum_exp(lg, s.w);
        if (!std::isfinite(p.log_b2))
            throw HeavyTailError("posterior variance of the completed-data likelihood ratio is infinite; use bi2");
        std::vector<double> terms(lg.size());
        for (std::size_t q = 0; q < lg.size(); ++q) terms[q] = s.w[q] * std::exp(lg[q] - p.log_b2);
        p.ess = ess(terms);
        if (p.ess < 5.0)
            p.flags.push_back("completed-data likelihood-ratio variance is carried by a few prior nodes (ess " +
                              std::to_string(p.ess) + "); bi1 is unstable here, prefer bi2");
        return p;
    }
    // B2 = E_{Y_mis | Y_ob, theta0} sum_q w_q exp(l_co(theta0) - l_co(theta_q))
    std::vector<double> logg(mc.draws);
    for (std::size_t d = 0; d < mc.draws; ++d) {
        auto imp = impute(model, data, s, theta0, theta0.values(), rng);
        std::vector<double> x(imp.at_nodes.size());
        for (std::size_t q = 0; q < x.size(); ++q) x[q] = imp.at_theta0 - imp.at_nodes[q];
        logg[d] = numeric::log_sum_exp(x, s.w);
    }
    p.shift = *std::max_element(logg.begin(), logg.end());
    p.g.resize(mc.draws);
    for (std::size_t d = 0; d < mc.draws; ++d) p.g[d] = std::exp(logg[d] - p.shift);
    p.ess = ess(p.g);
    if (p.ess < mc.ess_threshold)
        throw HeavyTailError("effective sample size " + std::to_string(p.ess) +
                             " of completed-data likelihood-ratio weights is below " +
                             std::to_string(mc.ess_threshold) +
                             "; the variance in the denominator may not exist, use bi2");
    return p;
}

// sum_i V_ob,i / sum_i V_co,i over draws [lo, hi)
double bi1_ratio(const std::vector<Bi1Parts>& parts, std::size_t lo, std::size_t hi) {
    std::vector<double> num, den;
    for (auto& p : parts) {
        num.push_back(log_expm1(p.log_v_ob) - 2 * p.log_a1);
        den.push_back(log_expm1(p.log_a1 + p.log_b2_of(lo, hi)) - 2 * p.log_a1);
    }
    const double ln = numeric::log_sum_exp(num), ld = numeric::log_sum_exp(den);
    if (!std::isfinite(ld) && !std::isfinite(ln))
        throw ValidationError("no information in data or model: both posterior variances are zero");
    return std::clamp(std::exp(ln - ld), 0.0, 1.0);
}

// Runs body(i) for i < n on up to hardware_concurrency threads; each index
// writes only its own slot.
template <class F>
void parallel_for(std::size_t n, F body) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < workers; ++t)
        jobs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        }));
    for (auto& j : jobs) j.get();  // rethrows the first failure in index order of workers
}

BayesValue finish_bi1(const std::vector<Bi1Parts>& parts, const McConfig& mc) {
    BayesValue out;
    out.exact = std::all_of(parts.begin(), parts.end(), [](auto& p) { return p.exact; });
    out.value = bi1_ratio(parts, 0, mc.draws);
    if (!out.exact)
        out.se = batch_se(mc.draws, mc.batches, [&](std::size_t lo, std::size_t hi) { return bi1_ratio(parts, lo, hi); });
    out.ess = kInf;
    for (auto& p : parts) {
        out.ess = std::min(out.ess, p.ess);
        for (auto& f : p.flags) out.flags.push_back(f);
    }
    return out;
}

}  // namespace

BayesValue compute_bi1(const IncompleteModel& model, const UnitDataset& data,
                       const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc) {
    std::vector<Bi1Parts> parts{
        bi1_parts(model, data, theta0, prior, mc, substream(mc.seed, {stream_tag("bi1"), mc.stream}))};
    return finish_bi1(parts, mc);
}

BayesValue compute_bi1_combined(const IncompleteModel& model, const UnitDataset& data,
                                const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc) {
    std::vector<Bi1Parts> parts(data.size());
    parallel_for(data.size(), [&](std::size_t i) {
        const std::size_t idx[1] = {i};
        parts[i] = bi1_parts(model, data.subset(idx), theta0, prior, mc,
                             substream(mc.seed, {stream_tag("bi1_unit"), mc.stream, i}));
    });
    auto out = finish_bi1(parts, mc);
    // one flag line per unit would swamp the report
    if (out.flags.size() > 1) {
        const auto n = out.flags.size();
        out.flags = {std::to_string(n) + " units have their completed-data likelihood-ratio variance carried by a few prior nodes"};
    }
    return out;
}

BayesValue compute_bi1_covform(const IncompleteModel& model, const UnitDataset& data,
                               const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc) {
    auto s = make_setup(model, data, theta0, prior, mc);
    check_finite_lod(s);
    BayesValue out;
    // numerator: -Cov_pi(L, 1/L) with L = f(Y_ob|theta)/f(Y_ob|theta0), centred sums
    const double a1 = std::exp(s.log_a1), a2 = std::exp(s.log_a2);
    double cov_ob = 0.0;
    for (std::size_t q = 0; q < s.w.size(); ++q)
        cov_ob += s.w[q] * (std::exp(s.lod[q]) - a1) * (std::exp(-s.lod[q]) - a2);
    const double num = -cov_ob;
    // denominator: -Cov_pi(L_co, 1/L_co) with both prior means averaged over
    // Y_mis drawn at theta0
    Rng rng = substream(mc.seed, {stream_tag("bi1_cov"), mc.stream});
    const std::size_t n = mc.draws;
    std::vector<double> m1(n), m2(n);
    for (std::size_t d = 0; d < n; ++d) {
        auto imp = impute(model, data, s, theta0, theta0.values(), rng);
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t q = 0; q < s.w.size(); ++q) {
            const double lc = imp.at_nodes[q] - imp.at_theta0;
            e1 += s.w[q] * std::exp(lc);
            e2 += s.w[q] * std::exp(-lc);
        }
        m1[d] = e1;
        m2[d] = e2;
    }
    out.ess = ess(m2);
    if (out.ess < mc.ess_threshold)
        throw HeavyTailError("effective sample size " + std::to_string(out.ess) +
                             " of completed-data likelihood-ratio weights is below " +
                             std::to_string(mc.ess_threshold) + "; use bi2");
    auto ratio = [&](std::size_t lo, std::size_t hi) {
        const double den = mean_of(m1, lo, hi) * mean_of(m2, lo, hi) - 1.0;
        if (!(den > 0.0) && !(num > 0.0))
            throw ValidationError("no information in data or model: both posterior variances are zero");
        return std::clamp(num / den, 0.0, 1.0);
    };
    out.value = ratio(0, n);
    out.se = batch_se(n, mc.batches, ratio);
    return out;
}

// ---- BI2 -------------------------------------------------------------------

namespace {

// Posterior variance of lod_ob and of the missing-data log ratio, the latter
// exactly or as per-draw values.
struct Bi2Parts {
    double v1 = 0.0;
    bool exact = false;
    double v2 = 0.0;
    std::vector<double> dmis;

    double v2_of(std::size_t lo, std::size_t hi) const { return exact ? v2 : var_of(dmis, lo, hi); }
};

Bi2Parts bi2_parts(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0,
                   const PriorSpec& prior, const McConfig& mc, Rng rng) {
    auto s = make_setup(model, data, theta0, prior, mc);
    Bi2Parts p;
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t q = 0; q < s.w.size(); ++q) {
        if (s.post[q] == 0.0) continue;
        m1 += s.post[q] * s.lod[q];
        m2 += s.post[q] * s.lod[q] * s.lod[q];
    }
    p.v1 = std::max(0.0, m2 - m1 * m1);
    p.exact = s.exact;
    if (s.exact) {
        // Var[D_mis] = E_post[Var_q D] + Var_post[E_q D - lod_q], D = l_co(theta_q) - l_co(theta0)
        double ev = 0.0, em = 0.0, em2 = 0.0;
        for (std::size_t q = 0; q < s.w.size(); ++q) {
            if (s.post[q] == 0.0) continue;
            auto m = dataset_lod_moments(model, data, s.thetas[q].values(), s.thetas[q].values(),
                                         theta0.values());
            const double c = m->mean - s.lod[q];
            ev += s.post[q] * m->variance;
            em += s.post[q] * c;
            em2 += s.post[q] * c * c;
        }
        p.v2 = ev + std::max(0.0, em2 - em * em);
        return p;
    }
    const auto cdf = cumulative(s.post);
    p.dmis.resize(mc.draws);
    for (std::size_t d = 0; d < mc.draws; ++d) {
        const std::size_t q = draw_index(cdf, rng);
        double lq = 0.0, l0 = 0.0;
        for (const auto& u : data.units) {
            auto c = model.sample_missing(*u, s.thetas[q].values(), rng);
            lq += model.loglik_comp(*c, s.thetas[q].values());
            l0 += model.loglik_comp(*c, theta0.values());
        }
        p.dmis[d] = lq - l0 - s.lod[q];
    }
    return p;
}

double bi2_ratio(const std::vector<Bi2Parts>& parts, std::size_t lo, std::size_t hi) {
    double v1 = 0.0, v2 = 0.0;
    for (auto& p : parts) {
        v1 += p.v1;
        v2 += p.v2_of(lo, hi);
    }
    if (!(v1 + v2 > 0.0))
        throw ValidationError("no information in data or model: both posterior variances are zero");
    return v1 / (v1 + v2);
}

BayesValue finish_bi2(const std::vector<Bi2Parts>& parts, const McConfig& mc) {
    BayesValue out;
    out.exact = std::all_of(parts.begin(), parts.end(), [](auto& p) { return p.exact; });
    out.value = bi2_ratio(parts, 0, mc.draws);
    if (!out.exact) {
        out.se = batch_se(mc.draws, mc.batches, [&](std::size_t lo, std::size_t hi) { return bi2_ratio(parts, lo, hi); });
        out.ess = static_cast<double>(mc.draws);
    }
    return out;
}

}  // namespace

BayesValue compute_bi2(const IncompleteModel& model, const UnitDataset& data,
                       const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc) {
    std::vector<Bi2Parts> parts{
        bi2_parts(model, data, theta0, prior, mc, substream(mc.seed, {stream_tag("bi2"), mc.stream}))};
    return finish_bi2(parts, mc);
}

BayesValue compute_bi2_combined(const IncompleteModel& model, const UnitDataset& data,
                                const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc) {
    std::vector<Bi2Parts> parts(data.size());
    parallel_for(data.size(), [&](std::size_t i) {
        const std::size_t idx[1] = {i};
        parts[i] = bi2_parts(model, data.subset(idx), theta0, prior, mc,
                             substream(mc.seed, {stream_tag("bi2_unit"), mc.stream, i}));
    });
    return finish_bi2(parts, mc);
}

// ---- shrinking-prior limits ---------------------------------------------------

double compute_bi0(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0) {
    const std::size_t k = scalar_interest(model);
    const double s = dataset_score(model, data, theta0.values())[k];
    const double imi = dataset_info_missing(model, data, theta0.values())(k, k);
    const double den = s * s + imi;
    if (!(den > 0.0)) throw ValidationError("no information in data or model: score and missing information are zero");
    return s * s / den;
}

double compute_bi_s(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0) {
    const std::size_t k = scalar_interest(model);
    double ss = 0.0, imi = 0.0;
    for (const auto& u : data.units) {
        const double s = model.score_obs(*u, theta0.values())[k];
        ss += s * s;
        imi += model.info_missing(*u, theta0.values())(k, k);
    }
    const double den = ss + imi;
    if (!(den > 0.0)) throw ValidationError("no information in data or model: scores and missing information are zero");
    return ss / den;
}

TiltingBi0 compute_bi0_tilting(const UnitDataset& families) {
    double s = 0.0, g2 = 0.0, v = 0.0;
    for (const auto& up : families.units) {
        const auto& u = unit_as<TiltingUnit>(*up, "tilting");
        s += u.gamma * u.w();
        g2 += u.gamma * u.gamma;
        v += u.gamma * u.gamma * u.var_null_h();
    }
    if (!(g2 > 0.0)) throw ValidationError("tilting families carry no weight");
    TiltingBi0 r;
    r.w = s / std::sqrt(g2);
    r.var_z = v / g2;
    r.approximation = 1.0 - r.var_z;
    const double den = r.w * r.w + r.var_z;
    if (!(den > 0.0)) throw ValidationError("all families are uninformative: W and Var(Z | data) are zero");
    r.bi0 = r.w * r.w / den;
    return r;
}

// ---- Bayes factor identities ----------------------------------------------

double bayes_factor_quadrature(const IncompleteModel& model, const UnitDataset& data,
                               const ParamPoint& theta0, const PriorSpec& prior) {
    McConfig mc;
    mc.method = BayesMethod::monte_carlo;  // no moments needed
    return std::exp(-make_setup(model, data, theta0, prior, mc).log_a1);
}

BayesFactorReport bayes_factor_ob(const IncompleteModel& model, const UnitDataset& data,
                                  const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc) {
    auto s = make_setup(model, data, theta0, prior, mc);
    BayesFactorReport r;
    r.bf_quadrature = std::exp(-s.log_a1);
    if (std::isfinite(s.log_a2)) r.var_lr_ob = std::expm1(s.log_a1 + s.log_a2) * std::exp(-2 * s.log_a1);
    else r.var_lr_ob = kInf;

    if (s.exact) {
        std::vector<double> lg(s.thetas.size());
        for (std::size_t q = 0; q < lg.size(); ++q)
            lg[q] = dataset_lod_moments(model, data, theta0.values(), theta0.values(), s.thetas[q].values())
                        ->log_mgf;
        const double log_b2 = numeric::log_sum_exp(lg, s.w);
        r.var_lr_co = std::isfinite(log_b2) ? std::expm1(s.log_a1 + log_b2) * std::exp(-2 * s.log_a1) : kInf;
        r.var_lr_co_exact = true;
    }

    Rng rng = substream(mc.seed, {stream_tag("bayes_factor"), mc.stream});
    const auto cdf = cumulative(s.post);
    const std::size_t n = mc.draws;
    std::vector<double> lr_ob(n), lr_co(n), bf_co(n);
    for (std::size_t d = 0; d < n; ++d) {
        const std::size_t q = draw_index(cdf, rng);
        auto imp = impute(model, data, s, theta0, s.thetas[q].values(), rng);
        lr_ob[d] = std::exp(-s.lod[q]);
        lr_co[d] = std::exp(imp.at_theta0 - imp.at_nodes[q]);
        std::vector<double> x(imp.at_nodes.size());
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = imp.at_nodes[j] - imp.at_theta0;
        bf_co[d] = std::exp(-numeric::log_sum_exp(x, s.w));
    }
    auto summarize = [&](const std::vector<double>& v) {
        return McMean{mean_of(v, 0, n),
                      batch_se(n, mc.batches, [&](std::size_t lo, std::size_t hi) { return mean_of(v, lo, hi); })};
    };
    r.lr_ob = summarize(lr_ob);
    r.lr_co = summarize(lr_co);
    r.bf_co = summarize(bf_co);
    r.var_bf_co = {var_of(bf_co, 0, n),
                   batch_se(n, mc.batches, [&](std::size_t lo, std::size_t hi) { return var_of(bf_co, lo, hi); })};
    if (!r.var_lr_co_exact) r.var_lr_co = var_of(lr_co, 0, n);

    for (auto [name, m] : {std::pair{"LR_ob", r.lr_ob}, {"LR_co", r.lr_co}, {"BF_co", r.bf_co}}) {
        const double z = std::abs(m.mean - r.bf_quadrature) / std::max(m.se, 1e-300);
        if (m.se > 0 && z > 4.0)
            r.flags.push_back(std::string("posterior mean of ") + name + " differs from the quadrature Bayes factor by " +
                              std::to_string(z) + " SE");
    }
    // Var BF_co <= Var LR_co and Var LR_ob <= Var LR_co; BF_co is compared allowing its MC error.
    const double tol = 1e-9 * std::max(1.0, r.var_lr_co);
    r.variance_ordering_holds = r.var_lr_ob <= r.var_lr_co + tol &&
                                r.var_bf_co.mean - 3.0 * r.var_bf_co.se <= r.var_lr_co + tol;
    if (!r.variance_ordering_holds) r.flags.push_back("variance ordering of the likelihood ratios failed");
    if (!r.var_lr_co_exact) r.flags.push_back("Var LR_co estimated by Monte Carlo");
    return r;
}

// ---- shrink convergence ------------------------------------------------------

ShrinkTable shrink_convergence(const IncompleteModel& model, const UnitDataset& data,
                               const ParamPoint& theta0, const std::vector<double>& deltas,
                               const McConfig& mc) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw ValidationError("shrink_convergence: deltas must be positive");
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw ValidationError("shrink_convergence: deltas must be decreasing");
    }
    ShrinkTable t;
    t.bi0 = compute_bi0(model, data, theta0);
    const std::size_t k = scalar_interest(model);
    std::vector<std::future<ShrinkRow>> jobs;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] {
            McConfig c = mc;
            c.stream = mc.stream * 1000 + i;
            auto prior = PriorSpec::uniform(theta0[k] - deltas[i], theta0[k] + deltas[i]);
            ShrinkRow row;
            row.delta = deltas[i];
            row.bi1 = compute_bi1(model, data, theta0, prior, c);
            row.bi2 = compute_bi2(model, data, theta0, prior, c);
            return row;
        }));
    }
    for (auto& j : jobs) t.rows.push_back(j.get());
    for (auto& row : t.rows) {
        row.gap1 = std::abs(row.bi1.value - t.bi0);
        row.gap2 = std::abs(row.bi2.value - t.bi0);
    }
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
        const auto &a = t.rows[i], &b = t.rows[i + 1];
        t.decay1.push_back(a.gap1 / b.gap1);
        t.decay2.push_back(a.gap2 / b.gap2);
        if (b.gap1 > a.gap1 + 2 * (a.bi1.se + b.bi1.se) || b.gap2 > a.gap2 + 2 * (a.bi2.se + b.bi2.se)) {
            t.monotone = false;
            t.flags.push_back("gap grows from delta " + std::to_string(a.delta) + " to " +
                              std::to_string(b.delta) + " beyond 2 SE");
        }
    }
    return t;
}

}  // namespace missinfo
