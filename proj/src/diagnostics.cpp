#include "missinfo/diagnostics.hpp"

#include "missinfo/errors.hpp"
#include "missinfo/large_sample.hpp"
#include "missinfo/rng.hpp"

#include <cmath>
#include <limits>

namespace missinfo {

double compute_ri_e(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob) {
    auto info = info_decomposition(model, data, theta_ob);
    try {
        return fraction_observed_information(info, scalar_interest(model));
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) +
                             "; RI_E needs an interior maximum of the observed likelihood, and I_ob "
                             "away from the MLE (for example at theta0) need not be positive");
    }
}

bool ExpansionCheck::decay_ok() const {
    if (exact) return true;
    if (decay_ratios.empty()) return false;
    for (double r : decay_ratios)
        if (!(r >= band_lo && r <= band_hi)) return false;
    return true;
}

namespace {

struct Coefficients {
    double ri_e, i_ob, i_co, l3, q30, q21;
    bool noisy;
};

Coefficients coefficients(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob) {
    if (model.dim() != 1)
        throw UnsupportedError("expansion checks are implemented for scalar-parameter models; " +
                               model.tag() + " has nuisance parameters");
    Coefficients c{};
    auto info = info_decomposition(model, data, theta_ob);
    c.i_ob = info.I_ob(0, 0);
    c.i_co = info.I_co(0, 0);
    if (!(c.i_ob > 0.0)) throw NumericalError("observed information at theta_ob is not positive");
    c.ri_e = c.i_ob / c.i_co;
    auto l3 = loglik_derivative(model, data, 3, theta_ob);
    auto q30 = q_derivative(model, data, 3, 0, theta_ob);
    auto q21 = q_derivative(model, data, 2, 1, theta_ob);
    c.l3 = l3.value;
    c.q30 = q30.value;
    c.q21 = q21.value;
    c.noisy = l3.noisy || q30.noisy || q21.noisy;
    return c;
}

std::vector<double> default_deltas(const IncompleteModel& model, const ParamPoint& theta_ob) {
    const double s = model.coordinate_scale(theta_ob.values(), 0);
    return {0.08 * s, 0.04 * s, 0.02 * s, 0.01 * s};
}

void fill(ExpansionCheck& ex, const Coefficients& c, double coeff) {
    ex.ri_e = c.ri_e;
    ex.i_ob = c.i_ob;
    ex.i_co = c.i_co;
    ex.l3 = c.l3;
    ex.q30 = c.q30;
    ex.q21 = c.q21;
    if (c.noisy) {
        ex.noisy = true;
        ex.band_lo = 2.0;
        ex.band_hi = 8.0;
        ex.flags.push_back("finite-difference noise in third derivatives; acceptance band widened to [2, 8]");
    }
    double biggest = 0.0;
    for (std::size_t i = 0; i < ex.deltas.size(); ++i) {
        ex.errors.push_back(ex.values[i] - c.ri_e - coeff * ex.deltas[i]);
        biggest = std::max(biggest, std::abs(ex.errors.back()));
    }
    // A residual at rounding level means the first-order expansion is exact.
    if (biggest <= 1e-9 * (1.0 + std::abs(c.ri_e))) {
        ex.exact = true;
        ex.flags.push_back("residuals vanish to rounding at every delta; decay ratio undefined");
    }
    for (std::size_t i = 0; i + 1 < ex.errors.size(); ++i)
        ex.decay_ratios.push_back(ex.errors[i] / ex.errors[i + 1]);
    ex.decay_ratio = ex.decay_ratios.empty() ? std::numeric_limits<double>::quiet_NaN() : ex.decay_ratios.back();
}

void check_deltas(const IncompleteModel& model, const ParamPoint& theta_ob, const std::vector<double>& deltas) {
    const auto& lay = model.layout();
    for (double d : deltas) {
        double t = theta_ob[0] + d;
        if (d == 0.0 || !(t > lay.lower[0] && t < lay.upper[0]))
            throw ValidationError("expansion check: theta_ob + delta must be interior and delta nonzero");
    }
}

}  // namespace

ExpansionCheck expansion_check_ri1(const IncompleteModel& model, const UnitDataset& data,
                                   const ParamPoint& theta_ob, std::vector<double> deltas) {
    if (deltas.empty()) deltas = default_deltas(model, theta_ob);
    check_deltas(model, theta_ob, deltas);
    auto c = coefficients(model, data, theta_ob);
    ExpansionCheck ex;
    ex.deltas = deltas;
    for (double d : deltas) ex.values.push_back(compute_ri1(model, data, theta_ob, theta_ob.with(0, theta_ob[0] + d)).value);
    ex.coeff_ri1 = (c.q30 * c.ri_e - c.l3) / (3.0 * c.i_co);
    ex.coeff_ri0 = (3.0 * c.ri_e * (c.q30 + c.q21) - 2.0 * c.l3 - c.q30 * c.ri_e * c.ri_e) / (3.0 * c.i_co);
    fill(ex, c, ex.coeff_ri1);
    return ex;
}

ExpansionCheck expansion_check_ri0(const IncompleteModel& model, const UnitDataset& data,
                                   const ParamPoint& theta_ob, std::vector<double> deltas) {
    if (deltas.empty()) deltas = default_deltas(model, theta_ob);
    check_deltas(model, theta_ob, deltas);
    auto c = coefficients(model, data, theta_ob);
    ExpansionCheck ex;
    ex.deltas = deltas;
    FitConfig cfg;
    cfg.loglik_tol = 1e-14;
    for (double d : deltas) {
        auto theta0 = theta_ob.with(0, theta_ob[0] + d);
        ex.values.push_back(compute_ri0(model, data, theta_ob, theta0, cfg).value);
        auto tq = maximize_q(model, data, theta0, cfg).theta_hat[0];
        ex.theta_q.push_back(tq);
        const double lo = std::min(theta_ob[0], theta0[0]), hi = std::max(theta_ob[0], theta0[0]);
        const double slack = 1e-12 * (1.0 + std::abs(hi));
        if (!(tq >= lo - slack && tq <= hi + slack)) {
            ex.bracketing = false;
            ex.flags.push_back("theta_Q = " + std::to_string(tq) + " outside [theta0, theta_ob] at delta " +
                               std::to_string(d));
        }
    }
    ex.coeff_ri1 = (c.q30 * c.ri_e - c.l3) / (3.0 * c.i_co);
    ex.coeff_ri0 = (3.0 * c.ri_e * (c.q30 + c.q21) - 2.0 * c.l3 - c.q30 * c.ri_e * c.ri_e) / (3.0 * c.i_co);
    fill(ex, c, ex.coeff_ri0);
    return ex;
}

bool EmIdentityReport::all_pass() const {
    for (auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

EmIdentityReport em_identity_suite(const IncompleteModel& model, const UnitDataset& data,
                                   const ParamPoint& theta_ob, std::uint64_t seed, int n_random,
                                   double tolerance) {
    EmIdentityReport rep;
    const std::size_t k = scalar_interest(model);
    const int coord = static_cast<int>(k);
    auto info = info_decomposition(model, data, theta_ob);
    const double i_co = info.I_co(k, k);
    const double scale = model.coordinate_scale(theta_ob.values(), k);

    auto add = [&](std::string name, const ParamPoint& at, double lhs, double rhs, double err, double floor) {
        IdentityCheck c;
        c.name = std::move(name);
        c.at = at.vec();
        c.lhs = lhs;
        c.rhs = rhs;
        c.fd_error = err;
        const double denom = std::max({std::abs(lhs), std::abs(rhs), floor});
        c.relative_violation = denom > 0 ? std::abs(lhs - rhs) / denom : 0.0;
        c.pass = c.relative_violation < tolerance;
        rep.checks.push_back(std::move(c));
    };

    auto q10 = q_derivative(model, data, 1, 0, theta_ob, coord);
    add("Q10 = 0 at theta_ob", theta_ob, q10.value, 0.0, q10.error, std::abs(i_co) * scale);
    auto q20 = q_derivative(model, data, 2, 0, theta_ob, coord);
    add("Q20 = -I_co at theta_ob", theta_ob, q20.value, -i_co, q20.error, 0.0);

    std::vector<ParamPoint> points{theta_ob};
    Rng rng = substream(seed, {stream_tag("em_identity")});
    const auto& lay = model.layout();
    for (int r = 0; r < n_random; ++r) {
        std::vector<double> t = theta_ob.vec();
        for (std::size_t a = 0; a < t.size(); ++a) {
            const double ia = info.I_ob(a, a);
            double spread = ia > 0 ? 2.0 / std::sqrt(ia) : model.coordinate_scale(theta_ob.values(), a);
            double lo = lay.lower[a], hi = lay.upper[a];
            if (std::isfinite(lo) && std::isfinite(hi)) spread = std::min(spread, 0.25 * (hi - lo));
            double x = t[a] + std::uniform_real_distribution<double>(-spread, spread)(rng);
            // keep clear of the bounds so every stencil stays admissible
            const double margin = 0.05 * std::max(spread, 1e-3);
            if (std::isfinite(lo)) x = std::max(x, lo + margin);
            if (std::isfinite(hi)) x = std::min(x, hi - margin);
            t[a] = x;
        }
        points.push_back(theta_ob.with_values(std::move(t)));
    }
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto& at = points[p];
        const std::string where = p == 0 ? "theta_ob" : "random point " + std::to_string(p);
        auto l1 = loglik_derivative(model, data, 1, at, coord);
        auto g10 = q_derivative(model, data, 1, 0, at, coord);
        auto a20 = q_derivative(model, data, 2, 0, at, coord);
        auto a11 = q_derivative(model, data, 1, 1, at, coord);
        auto l2 = loglik_derivative(model, data, 2, at, coord);
        add("l' = Q10 at " + where, at, g10.value, l1.value, g10.error, std::abs(a20.value) * scale);
        add("Q20 + Q11 = l'' at " + where, at, a20.value + a11.value, l2.value,
            a20.error + a11.error + l2.error, 0.0);
    }
    return rep;
}

}  // namespace missinfo
