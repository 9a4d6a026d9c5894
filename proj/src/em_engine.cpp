#include "missinfo/em_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace missinfo {

namespace {

bool on_lower(double x, double lo) { return std::isfinite(lo) && x <= lo + 1e-9 * (1.0 + std::abs(lo)); }
bool on_upper(double x, double hi) { return std::isfinite(hi) && x >= hi - 1e-9 * (1.0 + std::abs(hi)); }

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<std::vector<double>(std::span<const double>)>;

// Maximizes obj over the free coordinates of x (others held).
std::vector<double> polish(const IncompleteModel& model, const Objective& obj, const Gradient& grad,
                           std::vector<double> x, const std::vector<bool>& free) {
    const auto& L = model.layout();
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < free.size(); ++k)
        if (free[k]) idx.push_back(k);
    if (idx.empty()) return x;
    auto full = [&](std::span<const double> r) {
        std::vector<double> y = x;
        for (std::size_t a = 0; a < idx.size(); ++a) y[idx[a]] = r[a];
        return y;
    };
    std::vector<double> r0, lo, hi, steps;
    for (auto k : idx) {
        r0.push_back(x[k]);
        lo.push_back(L.lower[k]);
        hi.push_back(L.upper[k]);
        steps.push_back(model.coordinate_scale(x, k));
    }
    numeric::FnN f = [&](std::span<const double> r) { return obj(full(r)); };
    numeric::GradN g = [&](std::span<const double> r) {
        auto gf = grad(full(r));
        std::vector<double> out;
        for (auto k : idx) out.push_back(gf[k]);
        return out;
    };
    const double f0 = f(r0);
    std::vector<double> best = r0;
    double fbest = f0;
    if (idx.size() == 1) {
        numeric::Fn1 f1 = [&](double t) { return f(std::span<const double>(&t, 1)); };
        numeric::Fn1 d1 = [&](double t) { return g(std::span<const double>(&t, 1))[0]; };
        auto opt = numeric::maximize_scalar(f1, r0[0], 1e-2 * steps[0], lo[0], hi[0], &d1);
        if (opt.fx >= fbest) best = {opt.x}, fbest = opt.fx;
    } else {
        std::vector<double> nm_steps;
        for (double s : steps) nm_steps.push_back(1e-3 * s);
        auto nm = numeric::nelder_mead_max(f, r0, nm_steps, lo, hi, 1e-15, 400 * static_cast<int>(idx.size()));
        if (nm.fx >= fbest) best = nm.x, fbest = nm.fx;
    }
    std::vector<double> hsteps;
    for (std::size_t a = 0; a < idx.size(); ++a)
        hsteps.push_back(1e-5 * std::max(steps[a], 1e-3 * std::abs(best[a])));
    auto nt = numeric::newton_polish_max(f, g, best, hsteps, lo, hi);
    if (nt.fx >= fbest - 1e-12 * (1.0 + std::abs(fbest))) best = nt.x;
    return full(best);
}

std::vector<double> numeric_m_step(const IncompleteModel& model, const UnitDataset& data,
                                   std::span<const double> anchor, const std::vector<bool>& free,
                                   std::vector<double> start) {
    std::vector<double> a(anchor.begin(), anchor.end());
    Objective obj = [&](std::span<const double> x) { return dataset_q(model, data, x, a); };
    Gradient grad = [&](std::span<const double> x) {
        std::vector<double> steps;
        for (std::size_t k = 0; k < x.size(); ++k) steps.push_back(1e-6 * model.coordinate_scale(x, k));
        return numeric::fd_gradient([&](std::span<const double> y) { return obj(y); }, x, steps);
    };
    return polish(model, obj, grad, std::move(start), free);
}

std::vector<double> em_step(const IncompleteModel& model, const UnitDataset& data,
                            std::span<const double> anchor, const std::vector<bool>& free,
                            const std::vector<double>& start) {
    if (auto s = model.m_step(data, anchor, free, start)) return *s;
    return numeric_m_step(model, data, anchor, free, start);
}

double grad_norm(const std::vector<double>& g, const std::vector<double>& x, const std::vector<bool>& free,
                 const ParamLayout& L, bool& boundary) {
    double s = 0.0;
    boundary = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!free[k]) continue;
        bool lo = on_lower(x[k], L.lower[k]), hi = on_upper(x[k], L.upper[k]);
        boundary = boundary || lo || hi;
        if ((lo && g[k] <= 0) || (hi && g[k] >= 0)) continue;  // KKT at an active bound
        s += g[k] * g[k];
    }
    return std::sqrt(s);
}

bool flat_along_free(const IncompleteModel& model, const Objective& obj, const std::vector<double>& x,
                     const std::vector<bool>& free) {
    const auto& L = model.layout();
    const double f0 = obj(x);
    bool any = false;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!free[k]) continue;
        any = true;
        double s = model.coordinate_scale(x, k);
        for (double sign : {-1.0, 1.0}) {
            std::vector<double> y = x;
            y[k] = std::clamp(x[k] + sign * s, L.lower[k], L.upper[k]);
            if (std::abs(obj(y) - f0) > 1e-12 * (1.0 + std::abs(f0))) return false;
        }
    }
    return any;
}

FitResult fit_free(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& start,
                   const std::vector<bool>& free, const FitConfig& cfg) {
    const auto& L = model.layout();
    if (start.size() != model.dim()) throw ValidationError("start point has the wrong dimension");
    std::vector<double> x = start.vec();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], L.lower[k], L.upper[k]);
    Objective ll = [&](std::span<const double> t) { return dataset_loglik_obs(model, data, t); };
    Gradient score = [&](std::span<const double> t) { return dataset_score(model, data, t); };

    FitResult r;
    double cur = ll(x), gain = std::numeric_limits<double>::infinity();
    if (!std::isfinite(cur)) throw NumericalError("start point has zero likelihood");
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
        auto next = em_step(model, data, x, free, x);
        double val = ll(next);
        if (val < cur - 1e-9 * (1.0 + std::abs(cur))) {
            r.notes.push_back("EM step decreased the log-likelihood; stopped early");
            break;
        }
        gain = val - cur;
        x = std::move(next);
        cur = std::max(val, cur);
        if (gain <= cfg.loglik_tol) break;
    }
    r.iterations = it + 1;
    bool em_settled = gain <= cfg.loglik_tol;
    if (cfg.polish) {
        auto y = polish(model, ll, score, x, free);
        double v = ll(y);
        if (v >= cur - 1e-12 * (1.0 + std::abs(cur))) {
            gain = std::max(0.0, v - cur);
            x = std::move(y);
            cur = v;
        }
    }
    r.theta_hat = ParamPoint(x, L.roles);
    r.loglik = cur;
    r.gradient_norm = grad_norm(score(x), x, free, L, r.boundary);
    r.converged = r.gradient_norm <= cfg.grad_tol && (em_settled || gain <= cfg.loglik_tol);
    if (r.boundary) r.notes.push_back("maximizer lies on the parameter boundary");
    r.flat = flat_along_free(model, ll, x, free);
    if (r.flat) r.notes.push_back("non-identifiable: the log-likelihood is flat in the free parameters");
    if (!r.converged) r.notes.push_back("did not reach the gradient/log-likelihood tolerance");
    return r;
}

}  // namespace

std::size_t scalar_interest(const IncompleteModel& model) {
    auto idx = model.layout().interest();
    if (idx.size() != 1)
        throw UnsupportedError("operation needs exactly one interest coordinate; model " + model.tag() +
                               " has " + std::to_string(idx.size()));
    return idx[0];
}

FitResult fit_mle(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& start,
                  const FitConfig& cfg) {
    return fit_free(model, data, start, std::vector<bool>(model.dim(), true), cfg);
}

FitResult fit_mle(const IncompleteModel& model, const UnitDataset& data, const FitConfig& cfg) {
    return fit_mle(model, data, model.point(model.initial_point(data)), cfg);
}

FitResult fit_null_mle(const IncompleteModel& model, const UnitDataset& data,
                       const HypothesisSpec& hyp, const ParamPoint& start, const FitConfig& cfg) {
    hyp.validate(model.layout());
    auto idx = model.layout().interest();
    std::vector<double> x = start.vec();
    std::vector<bool> free(model.dim(), true);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        x[idx[i]] = hyp.null_values[i];
        free[idx[i]] = false;
    }
    return fit_free(model, data, start.with_values(x), free, cfg);
}

FitResult fit_null_mle(const IncompleteModel& model, const UnitDataset& data,
                       const HypothesisSpec& hyp, const FitConfig& cfg) {
    return fit_null_mle(model, data, hyp, model.point(model.initial_point(data)), cfg);
}

FitResult maximize_q(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& anchor,
                     const FitConfig& cfg) {
    const auto& L = model.layout();
    std::vector<bool> free(model.dim(), true);
    std::vector<double> a = anchor.vec();
    Objective q = [&](std::span<const double> t) { return dataset_q(model, data, t, a); };
    auto x = em_step(model, data, a, free, a);
    FitResult r;
    r.iterations = 1;
    r.theta_hat = ParamPoint(x, L.roles);
    r.loglik = q(x);
    double q0 = q(a);
    if (r.loglik < q0) {  // never worse than staying put
        x = a;
        r.theta_hat = anchor;
        r.loglik = q0;
    }
    std::vector<double> steps;
    for (std::size_t k = 0; k < x.size(); ++k) steps.push_back(1e-6 * model.coordinate_scale(x, k));
    auto g = numeric::fd_gradient([&](std::span<const double> t) { return q(t); }, x, steps);
    r.gradient_norm = grad_norm(g, x, free, L, r.boundary);
    // FD gradient noise scales with |Q|; judge against that floor
    double floor = 1e-9 * (1.0 + std::abs(r.loglik)) / steps[0];
    r.converged = r.gradient_norm <= std::max(cfg.grad_tol, floor);
    r.flat = flat_along_free(model, q, x, free);
    if (r.flat) r.notes.push_back("Q surface is flat: maximizer not unique");
    if (r.boundary) r.notes.push_back("Q maximizer lies on the parameter boundary");
    return r;
}

namespace {

int resolve_coord(const IncompleteModel& model, int coord) {
    if (coord >= 0) {
        if (static_cast<std::size_t>(coord) >= model.dim()) throw ValidationError("coordinate out of range");
        return coord;
    }
    return static_cast<int>(scalar_interest(model));
}

// Largest step no larger than h keeping x +- reach*h admissible.
double admissible_step(const IncompleteModel& model, const ParamPoint& at, int k, double h, int reach) {
    const auto& L = model.layout();
    double x = at[k];
    while ((x - reach * h <= L.lower[k] || x + reach * h >= L.upper[k]) && h > 0) h *= 0.5;
    if (!(h > 1e-12 * (1.0 + std::abs(x))))
        throw NumericalError("finite-difference step underflows next to the parameter boundary at " +
                             model.layout().names[k] + " = " + std::to_string(x));
    return h;
}

}  // namespace

QDerivative q_derivative(const IncompleteModel& model, const UnitDataset& data, int i, int j,
                         const ParamPoint& at, int coord) {
    if (i < 0 || j < 0 || i + j > 4) throw ValidationError("q_derivative: need i, j >= 0 and i + j <= 4");
    const int k = resolve_coord(model, coord);
    const bool high = i + j >= 3;
    const double scale = model.coordinate_scale(at.values(), k);
    double h = admissible_step(model, at, k, (high ? 1e-2 : 1e-3) * scale, 2);
    std::vector<double> t1 = at.vec(), t2 = at.vec();
    numeric::Fn2 f = [&](double x, double y) {
        t1[k] = x;
        t2[k] = y;
        return dataset_q(model, data, t1, t2);
    };
    auto d = numeric::mixed_partial(f, at[k], at[k], i, j, h, high ? 2 : 1);
    if (!std::isfinite(d.value)) throw NumericalError("Q derivative is not finite");
    QDerivative out{d.value, d.error, h, false};
    const double q = std::abs(dataset_q(model, data, at, at));
    const double rounding = 1e-15 * (1.0 + q) / std::pow(h, i + j);
    out.noisy = d.error > std::max(1e-3 * std::abs(d.value), 100.0 * rounding);
    return out;
}

QDerivative loglik_derivative(const IncompleteModel& model, const UnitDataset& data, int order,
                              const ParamPoint& at, int coord) {
    if (order < 1 || order > 5) throw ValidationError("loglik_derivative: order must be in [1, 5]");
    const int k = resolve_coord(model, coord);
    std::vector<double> t = at.vec();
    numeric::Fn1 s = [&](double x) {
        t[k] = x;
        return dataset_score(model, data, t)[k];
    };
    if (order == 1) return {s(at[k]), 0.0, 0.0, false};
    const bool high = order >= 3;
    const double scale = model.coordinate_scale(at.values(), k);
    double h = admissible_step(model, at, k, (high ? 1e-2 : 1e-4) * scale, 2);
    auto d = numeric::derivative(s, at[k], order - 1, h, high ? 2 : 1);
    if (!std::isfinite(d.value)) throw NumericalError("log-likelihood derivative is not finite");
    return {d.value, d.error, h, d.error > 1e-3 * std::abs(d.value) + 1e-9};
}

Eigen::MatrixXd observed_hessian(const IncompleteModel& model, const UnitDataset& data,
                                 std::span<const double> theta) {
    const std::size_t d = theta.size();
    Eigen::MatrixXd H(d, d);
    ParamPoint at = model.point({theta.begin(), theta.end()});
    std::vector<double> t(theta.begin(), theta.end());
    for (std::size_t k = 0; k < d; ++k) {
        double h = admissible_step(model, at, static_cast<int>(k), 1e-4 * model.coordinate_scale(theta, k), 2);
        auto column = [&](double step) {
            t[k] = theta[k] + step;
            auto gp = dataset_score(model, data, t);
            t[k] = theta[k] - step;
            auto gm = dataset_score(model, data, t);
            t[k] = theta[k];
            Eigen::VectorXd c(d);
            for (std::size_t a = 0; a < d; ++a) c[a] = (gp[a] - gm[a]) / (2 * step);
            return c;
        };
        Eigen::VectorXd c1 = column(h), c2 = column(h / 2);
        H.col(k) = (4 * c2 - c1) / 3;
    }
    return 0.5 * (H + H.transpose());
}

InfoDecomposition info_decomposition(const IncompleteModel& model, const UnitDataset& data,
                                     const ParamPoint& at) {
    InfoDecomposition r;
    r.eval_point = at;
    r.I_ob = -observed_hessian(model, data, at.values());
    r.I_mi = dataset_info_missing(model, data, at.values());
    r.I_co = r.I_ob + r.I_mi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.I_ob);
    r.I_ob_indefinite = es.eigenvalues().minCoeff() < -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
    return r;
}

namespace {

double efficient(const Eigen::MatrixXd& I, std::size_t k) {
    const auto d = I.rows();
    if (d == 1) return I(0, 0);
    std::vector<Eigen::Index> rest;
    for (Eigen::Index a = 0; a < d; ++a)
        if (a != static_cast<Eigen::Index>(k)) rest.push_back(a);
    Eigen::MatrixXd nn(rest.size(), rest.size());
    Eigen::VectorXd pn(rest.size());
    for (std::size_t a = 0; a < rest.size(); ++a) {
        pn[a] = I(k, rest[a]);
        for (std::size_t b = 0; b < rest.size(); ++b) nn(a, b) = I(rest[a], rest[b]);
    }
    return I(k, k) - pn.dot(nn.ldlt().solve(pn));
}

}  // namespace

double fraction_observed_information(const InfoDecomposition& info, std::size_t coord) {
    double ob = efficient(info.I_ob, coord), co = efficient(info.I_co, coord);
    if (!(ob > 0.0))
        throw NumericalError("observed information for the interest parameter is not positive (" +
                             std::to_string(ob) + "); the point is not an interior maximum");
    if (!(co > 0.0)) throw NumericalError("complete-data information is not positive");
    return ob / co;
}

}  // namespace missinfo
