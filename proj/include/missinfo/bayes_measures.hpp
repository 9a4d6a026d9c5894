#pragma once

#include "missinfo/model_api.hpp"
#include "missinfo/numeric.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace missinfo {

// Prior on the scalar interest coordinate. Nuisance coordinates stay at the
// values carried by theta0.
class PriorSpec {
public:
    enum class Kind { uniform_interval, tabulated };

    static PriorSpec uniform(double lo, double hi);
    // Piecewise-linear density through (nodes, densities). A single node is a
    // point mass. With normalize = false the density must already integrate to 1.
    static PriorSpec tabulated(std::vector<double> nodes, std::vector<double> densities,
                               bool normalize = false);
    static PriorSpec from_json(const json& j);
    json to_json() const;

    Kind kind() const { return kind_; }
    double lower() const { return nodes_.front(); }
    double upper() const { return nodes_.back(); }
    double normalization() const { return normalization_; }
    bool point_mass() const { return nodes_.size() == 1; }

    // Nodes and prior masses summing to 1; 201-point Gauss–Legendre for a
    // uniform prior, split across segments for a tabulated one.
    const numeric::QuadratureRule& rule() const { return rule_; }

private:
    Kind kind_ = Kind::uniform_interval;
    std::vector<double> nodes_, densities_;
    double normalization_ = 1.0;
    numeric::QuadratureRule rule_;
    void build_rule();
};

enum class BayesMethod { automatic, exact, monte_carlo };

struct McConfig {
    std::uint64_t seed = 20240601;
    std::size_t draws = 4096;
    std::size_t batches = 16;  // batch-means standard errors
    BayesMethod method = BayesMethod::automatic;
    double ess_threshold = 50.0;
    NuisancePolicy nuisance = NuisancePolicy::fix_at_null_mle;
    std::uint64_t stream = 0;  // extra substream key (e.g. delta index)
};

struct BayesValue {
    double value = 0.0;
    double se = 0.0;  // 0 when computed without Monte Carlo
    bool exact = false;
    double ess = 0.0;  // effective sample size of the LR weights (MC only)
    std::vector<std::string> flags;
};

// Ratio of posterior variances of LR(theta0, theta | Y_ob) and LR(theta0, theta | Y_co).
BayesValue compute_bi1(const IncompleteModel& model, const UnitDataset& data,
                       const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc = {});
// Per-unit posteriors: sums the numerator and denominator variances of every
// unit before taking the ratio.
BayesValue compute_bi1_combined(const IncompleteModel& model, const UnitDataset& data,
                                const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc = {});
// Same ratio written with prior covariances of L(theta)/L(theta0) and its reciprocal.
BayesValue compute_bi1_covform(const IncompleteModel& model, const UnitDataset& data,
                               const ParamPoint& theta0, const PriorSpec& prior,
                               const McConfig& mc = {});
// Var[lod_ob] / (Var[lod_ob] + Var[log f(Y_mis|Y_ob,theta)/f(Y_mis|Y_ob,theta0)]).
BayesValue compute_bi2(const IncompleteModel& model, const UnitDataset& data,
                       const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc = {});
// Unit-by-unit version of compute_bi2, summed like compute_bi1_combined.
BayesValue compute_bi2_combined(const IncompleteModel& model, const UnitDataset& data,
                                const ParamPoint& theta0, const PriorSpec& prior, const McConfig& mc = {});

// S^2 / (S^2 + I_mi) at theta0, interest coordinate.
double compute_bi0(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0);
// sum_i S_i^2 / (sum_i S_i^2 + I_mi).
double compute_bi_s(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta0);

struct TiltingBi0 {
    double bi0 = 0.0;
    double w = 0.0;
    double var_z = 0.0;        // sum gamma^2 Var_p(Z) / sum gamma^2
    double approximation = 0.0;  // 1 - var_z
};
TiltingBi0 compute_bi0_tilting(const UnitDataset& families);

struct McMean {
    double mean = 0.0;
    double se = 0.0;
};

struct BayesFactorReport {
    double bf_quadrature = 0.0;  // f(Y_ob|theta0) / f_pi(Y_ob)
    McMean lr_ob;                // posterior mean of LR(theta0, theta | Y_ob)
    McMean lr_co;                // posterior mean of LR(theta0, theta | Y_co)
    McMean bf_co;                // posterior mean of f(Y_co|theta0) / f_pi(Y_co)
    double var_lr_ob = 0.0;
    double var_lr_co = 0.0;
    McMean var_bf_co;
    bool var_lr_co_exact = false;
    bool variance_ordering_holds = false;
    std::vector<std::string> flags;
};
// f(Y_ob|theta0) / f_pi(Y_ob) by quadrature alone.
double bayes_factor_quadrature(const IncompleteModel& model, const UnitDataset& data,
                               const ParamPoint& theta0, const PriorSpec& prior);
BayesFactorReport bayes_factor_ob(const IncompleteModel& model, const UnitDataset& data,
                                  const ParamPoint& theta0, const PriorSpec& prior,
                                  const McConfig& mc = {});

struct ShrinkRow {
    double delta = 0.0;
    BayesValue bi1, bi2;
    double gap1 = 0.0, gap2 = 0.0;
};
struct ShrinkTable {
    double bi0 = 0.0;
    std::vector<ShrinkRow> rows;
    std::vector<double> decay1, decay2;  // gap(delta_k) / gap(delta_{k+1})
    bool monotone = true;
    std::vector<std::string> flags;
};
// Uniform priors theta0 +- delta for each delta; runs the deltas concurrently.
ShrinkTable shrink_convergence(const IncompleteModel& model, const UnitDataset& data,
                               const ParamPoint& theta0, const std::vector<double>& deltas,
                               const McConfig& mc = {});

struct BayesReport {
    BayesValue bi1, bi2;
    double bi0 = 0.0, bi_s = 0.0;
    double bf_ob = 0.0;
    bool heavy_tail = false;
    std::vector<std::string> flags;
};

}  // namespace missinfo
