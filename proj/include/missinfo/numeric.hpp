#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace missinfo::numeric {

double log_sum_exp(std::span<const double> xs);
// log Σ w_i exp(x_i) for w_i ≥ 0; zero weights are skipped.
double log_sum_exp(std::span<const double> xs, std::span<const double> ws);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss–Legendre rule mapped to [lo, hi].
QuadratureRule gauss_legendre(std::size_t n, double lo, double hi);

struct DerivativeEstimate {
    double value = 0.0;
    double error = 0.0;
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

// ∂^i_x ∂^j_y f at (x0, y0) from second-order central stencils and `levels`
// rounds of Richardson extrapolation in h². error = |R_best - R_previous|.
DerivativeEstimate mixed_partial(const Fn2& f, double x0, double y0, int i, int j, double h,
                                 int levels);
DerivativeEstimate derivative(const Fn1& f, double x0, int order, double h, int levels);

struct ScalarOptimum {
    double x = 0.0;
    double fx = 0.0;
    bool at_lower = false;
    bool at_upper = false;
    int evaluations = 0;
};

// Maximizes f on [lo, hi] starting near x0: bracket by expansion, then
// golden-section. If df is given, a safeguarded Newton/secant pass on df
// refines the golden-section result.
ScalarOptimum maximize_scalar(const Fn1& f, double x0, double step, double lo, double hi,
                              const Fn1* df = nullptr, double xtol = 1e-12);

struct VectorOptimum {
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
};

using FnN = std::function<double(std::span<const double>)>;
using GradN = std::function<std::vector<double>(std::span<const double>)>;

VectorOptimum nelder_mead_max(const FnN& f, std::vector<double> x0, std::span<const double> steps,
                              std::span<const double> lo, std::span<const double> hi,
                              double ftol = 1e-13, int max_eval = 20000);

// Newton ascent with box clamping. grad must be accurate; the Hessian is a
// central difference of grad with per-coordinate steps.
VectorOptimum newton_polish_max(const FnN& f, const GradN& grad, std::vector<double> x0,
                                std::span<const double> steps, std::span<const double> lo,
                                std::span<const double> hi, int max_iter = 50);

// Central-difference gradient with per-coordinate steps.
std::vector<double> fd_gradient(const FnN& f, std::span<const double> x,
                                std::span<const double> steps);

}  // namespace missinfo::numeric
