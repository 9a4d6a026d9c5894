#include "missinfo/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace missinfo::numeric {

double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

double log_sum_exp(std::span<const double> xs, std::span<const double> ws) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ws[i] > 0.0) m = std::max(m, xs[i]);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ws[i] > 0.0) s += ws[i] * std::exp(xs[i] - m);
    return m + std::log(s);
}

QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

namespace {

struct Stencil {
    std::vector<int> offsets;
    std::vector<double> weights;
};

const Stencil& stencil(int order) {
    static const Stencil s[5] = {
        {{0}, {1.0}},
        {{-1, 1}, {-0.5, 0.5}},
        {{-1, 0, 1}, {1.0, -2.0, 1.0}},
        {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
        {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
    };
    if (order < 0 || order > 4) throw std::invalid_argument("derivative order must be in [0, 4]");
    return s[order];
}

}  // namespace

DerivativeEstimate mixed_partial(const Fn2& f, double x0, double y0, int i, int j, double h,
                                 int levels) {
    const Stencil& si = stencil(i);
    const Stencil& sj = stencil(j);
    const int n = std::max(levels, 1) + 1;
    std::vector<double> d(n);
    for (int k = 0; k < n; ++k) {
        double hk = h / std::ldexp(1.0, k);
        double acc = 0.0;
        for (std::size_t a = 0; a < si.offsets.size(); ++a)
            for (std::size_t b = 0; b < sj.offsets.size(); ++b)
                acc += si.weights[a] * sj.weights[b] *
                       f(x0 + si.offsets[a] * hk, y0 + sj.offsets[b] * hk);
        d[k] = acc / std::pow(hk, i + j);
    }
    if (i + j == 0) return {d[0], 0.0};
    // Richardson table on the h² error series
    std::vector<double> prev = d;
    double best = d[0], before = d.size() > 1 ? d[1] : d[0];
    for (int m = 1; m <= levels && static_cast<int>(prev.size()) > 1; ++m) {
        double p = std::ldexp(1.0, 2 * m);
        std::vector<double> next(prev.size() - 1);
        for (std::size_t k = 0; k + 1 < prev.size(); ++k)
            next[k] = (p * prev[k + 1] - prev[k]) / (p - 1.0);
        before = prev.back();
        best = next[0];
        prev = std::move(next);
    }
    if (levels == 0) {
        best = d[0];
        before = d[1];
    }
    return {best, std::abs(best - before)};
}

DerivativeEstimate derivative(const Fn1& f, double x0, int order, double h, int levels) {
    return mixed_partial([&](double x, double) { return f(x); }, x0, 0.0, order, 0, h, levels);
}

namespace {

constexpr double kGolden = 0.6180339887498949;

bool near_bound(double x, double b) { return std::abs(x - b) <= 1e-10 * (1.0 + std::abs(b)); }

}  // namespace

ScalarOptimum maximize_scalar(const Fn1& f, double x0, double step, double lo, double hi,
                              const Fn1* df, double xtol) {
    ScalarOptimum out;
    int evals = 0;
    auto F = [&](double x) {
        ++evals;
        double v = f(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    x0 = std::clamp(x0, lo, hi);
    step = std::max(std::abs(step), 1e-12 * (1.0 + std::abs(x0)));
    double fm = F(x0), xm = x0;
    double xr = std::min(hi, x0 + step), xl = std::max(lo, x0 - step);
    double fr = xr > x0 ? F(xr) : -INFINITY, fl = xl < x0 ? F(xl) : -INFINITY;
    double left = xl, right = xr;
    auto expand = [&](double dir, double xa, double fa) {
        // xa is ahead of xm in direction dir and fa > fm
        double prevx = xm;
        xm = xa;
        fm = fa;
        for (int it = 0; it < 200; ++it) {
            double nx = xm + dir * (1.0 + 1.0 / kGolden) * std::abs(xm - prevx);
            nx = std::clamp(nx, lo, hi);
            if (nx == xm) return std::pair{prevx, xm};
            double fn = F(nx);
            if (fn < fm) return std::pair{prevx, nx};
            prevx = xm;
            xm = nx;
            fm = fn;
        }
        return std::pair{prevx, xm};
    };
    if (fr > fm && fr >= fl) {
        auto [a, b] = expand(1.0, xr, fr);
        left = a;
        right = b;
    } else if (fl > fm) {
        auto [a, b] = expand(-1.0, xl, fl);
        left = b;
        right = a;
    }
    if (left > right) std::swap(left, right);

    // golden-section on [left, right]
    double a = left, b = right;
    double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
    double fc = F(c), fd = F(d);
    for (int it = 0; it < 300 && (b - a) > xtol * (1.0 + std::abs(c)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = F(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = F(d);
        }
    }
    double xbest = fc >= fd ? c : d, fbest = std::max(fc, fd);
    for (double cand : {left, right, xm}) {
        double fv = cand == xm ? fm : F(cand);
        if (fv > fbest) xbest = cand, fbest = fv;
    }

    if (df) {
        // refine the stationary point of f with Newton on df
        double x = xbest;
        double g = (*df)(x);
        for (int it = 0; it < 30; ++it) {
            double e = 1e-6 * std::max(1.0, std::abs(x));
            double xp = std::min(hi, x + e), xq = std::max(lo, x - e);
            double gp = (*df)(xp), gq = (*df)(xq);
            double g2 = (gp - gq) / (xp - xq);
            if (!(g2 < 0.0)) break;
            double nx = std::clamp(x - g / g2, left, right);
            double ng = (*df)(nx);
            if (!(std::abs(ng) < std::abs(g))) break;
            double moved = std::abs(nx - x);
            x = nx;
            g = ng;
            if (moved <= 1e-15 * (1.0 + std::abs(x))) break;
        }
        double fx = F(x);
        if (fx >= fbest - 1e-12 * (1.0 + std::abs(fbest))) xbest = x, fbest = fx;
    }
    out.x = xbest;
    out.fx = fbest;
    out.at_lower = near_bound(xbest, lo);
    out.at_upper = near_bound(xbest, hi);
    out.evaluations = evals;
    return out;
}

VectorOptimum nelder_mead_max(const FnN& f, std::vector<double> x0, std::span<const double> steps,
                              std::span<const double> lo, std::span<const double> hi, double ftol,
                              int max_eval) {
    const std::size_t n = x0.size();
    int evals = 0;
    auto clampv = [&](std::vector<double>& x) {
        for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(x[k], lo[k], hi[k]);
    };
    auto F = [&](std::vector<double>& x) {
        clampv(x);
        ++evals;
        double v = f(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    if (n == 0) return {x0, f(x0), 1};
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        pts[k + 1][k] += steps[k];
        if (pts[k + 1][k] > hi[k]) pts[k + 1][k] = x0[k] - steps[k];
    }
    for (std::size_t k = 0; k <= n; ++k) vals[k] = F(pts[k]);
    std::vector<std::size_t> idx(n + 1);
    while (evals < max_eval) {
        for (std::size_t k = 0; k <= n; ++k) idx[k] = k;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
        const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
        if (std::abs(vals[best] - vals[worst]) <= ftol * (1.0 + std::abs(vals[best]))) {
            double spread = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                spread = std::max(spread, std::abs(pts[worst][k] - pts[best][k]));
            if (spread < 1e-9 * (1.0 + std::abs(pts[best][0])) || !std::isfinite(vals[best])) break;
            if (std::abs(vals[best] - vals[worst]) == 0.0) break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k)
            if (k != worst)
                for (std::size_t c = 0; c < n; ++c) centroid[c] += pts[k][c] / n;
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t c = 0; c < n; ++c) x[c] = centroid[c] + t * (pts[worst][c] - centroid[c]);
            return x;
        };
        auto xr = along(-1.0);
        double fr = F(xr);
        if (fr > vals[best]) {
            auto xe = along(-2.0);
            double fe = F(xe);
            if (fe > fr) pts[worst] = xe, vals[worst] = fe;
            else pts[worst] = xr, vals[worst] = fr;
        } else if (fr > vals[second]) {
            pts[worst] = xr, vals[worst] = fr;
        } else {
            auto xc = fr > vals[worst] ? along(-0.5) : along(0.5);
            double fcv = F(xc);
            if (fcv > std::max(fr, vals[worst])) {
                pts[worst] = xc, vals[worst] = fcv;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    for (std::size_t c = 0; c < n; ++c)
                        pts[k][c] = pts[best][c] + 0.5 * (pts[k][c] - pts[best][c]);
                    vals[k] = F(pts[k]);
                }
            }
        }
    }
    std::size_t b = std::max_element(vals.begin(), vals.end()) - vals.begin();
    return {pts[b], vals[b], evals};
}

std::vector<double> fd_gradient(const FnN& f, std::span<const double> x,
                                std::span<const double> steps) {
    std::vector<double> g(x.size()), xx(x.begin(), x.end());
    for (std::size_t k = 0; k < x.size(); ++k) {
        double h = steps[k];
        xx[k] = x[k] + h;
        double fp = f(xx);
        xx[k] = x[k] - h;
        double fm = f(xx);
        xx[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

VectorOptimum newton_polish_max(const FnN& f, const GradN& grad, std::vector<double> x,
                                std::span<const double> steps, std::span<const double> lo,
                                std::span<const double> hi, int max_iter) {
    const std::size_t n = x.size();
    int evals = 0;
    double fx = f(x);
    ++evals;
    auto g = grad(x);
    auto gnorm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    };
    for (int it = 0; it < max_iter && n > 0; ++it) {
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < n; ++k) {
            bool pinned_lo = x[k] <= lo[k] && g[k] < 0.0;
            bool pinned_hi = x[k] >= hi[k] && g[k] > 0.0;
            if (!pinned_lo && !pinned_hi) active.push_back(k);
        }
        if (active.empty()) break;
        const std::size_t m = active.size();
        Eigen::MatrixXd H(m, m);
        Eigen::VectorXd gv(m);
        std::vector<double> xx = x;
        for (std::size_t a = 0; a < m; ++a) {
            std::size_t k = active[a];
            gv(a) = g[k];
            double h = steps[k];
            xx[k] = x[k] + h;
            auto gp = grad(xx);
            xx[k] = x[k] - h;
            auto gm = grad(xx);
            xx[k] = x[k];
            for (std::size_t b = 0; b < m; ++b) H(b, a) = (gp[active[b]] - gm[active[b]]) / (2.0 * h);
        }
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(-H);
        Eigen::VectorXd dir;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0).all()) {
            dir = ldlt.solve(gv);
        } else {
            break;
        }
        const double g0 = gnorm(g);
        bool accepted = false;
        for (double t = 1.0; t > 1e-6; t *= 0.5) {
            std::vector<double> nx = x;
            for (std::size_t a = 0; a < m; ++a)
                nx[active[a]] = std::clamp(x[active[a]] + t * dir(a), lo[active[a]], hi[active[a]]);
            double nf = f(nx);
            ++evals;
            if (!std::isfinite(nf)) continue;
            auto ng = grad(nx);
            bool higher = nf > fx;
            bool tie = std::abs(nf - fx) <= 1e-13 * (1.0 + std::abs(fx)) && gnorm(ng) < g0;
            if (higher || tie) {
                double moved = 0.0;
                for (std::size_t k = 0; k < n; ++k) moved = std::max(moved, std::abs(nx[k] - x[k]));
                x = std::move(nx);
                fx = std::max(nf, fx);
                g = std::move(ng);
                accepted = moved > 1e-16;
                break;
            }
        }
        if (!accepted) break;
    }
    return {x, f(x), evals + 1};
}

}  // namespace missinfo::numeric
