#pragma once

#include "missinfo/model_api.hpp"
#include "missinfo/numeric.hpp"

#include <string>
#include <vector>

namespace missinfo {

struct FitConfig {
    int max_iter = 5000;
    double loglik_tol = 1e-10;
    double grad_tol = 1e-6;
    bool polish = true;
};

struct FitResult {
    ParamPoint theta_hat;
    double loglik = 0.0;  // for maximize_q: the attained Q value
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    bool boundary = false;  // some free coordinate sits on its bound
    bool flat = false;      // objective does not move along some free coordinate
    std::vector<std::string> notes;
};

struct InfoDecomposition {
    Eigen::MatrixXd I_ob, I_mi, I_co;
    ParamPoint eval_point;
    bool I_ob_indefinite = false;
};

FitResult fit_mle(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& start,
                  const FitConfig& cfg = {});
FitResult fit_mle(const IncompleteModel& model, const UnitDataset& data, const FitConfig& cfg = {});

FitResult fit_null_mle(const IncompleteModel& model, const UnitDataset& data,
                       const HypothesisSpec& hyp, const ParamPoint& start, const FitConfig& cfg = {});
FitResult fit_null_mle(const IncompleteModel& model, const UnitDataset& data,
                       const HypothesisSpec& hyp, const FitConfig& cfg = {});

// argmax_theta Q(theta | anchor) over all coordinates.
FitResult maximize_q(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& anchor,
                     const FitConfig& cfg = {});

struct QDerivative {
    double value = 0.0;
    double error = 0.0;
    double step = 0.0;
    bool noisy = false;  // error estimate large relative to the value and rounding floor
};

// d^{i+j} Q(t1 | t2) / dt1^i dt2^j at t1 = t2 = at along one coordinate
// (default: the single interest coordinate), other coordinates held at `at`.
QDerivative q_derivative(const IncompleteModel& model, const UnitDataset& data, int i, int j,
                         const ParamPoint& at, int coord = -1);
// k-th derivative of the observed log-likelihood along one coordinate.
QDerivative loglik_derivative(const IncompleteModel& model, const UnitDataset& data, int k,
                              const ParamPoint& at, int coord = -1);

InfoDecomposition info_decomposition(const IncompleteModel& model, const UnitDataset& data,
                                     const ParamPoint& at);

// I_ob / I_co for the interest coordinate, using efficient (Schur-complement)
// information when nuisance coordinates are present.
double fraction_observed_information(const InfoDecomposition& info, std::size_t coord);

// Observed-data Hessian from central differences of the score.
Eigen::MatrixXd observed_hessian(const IncompleteModel& model, const UnitDataset& data,
                                 std::span<const double> theta);

std::size_t scalar_interest(const IncompleteModel& model);

}  // namespace missinfo
