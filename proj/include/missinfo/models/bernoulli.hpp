#pragma once

#include "missinfo/model_api.hpp"

namespace missinfo {

// y_1..y_n iid Bernoulli(p); the last n - n0 are missing completely at random.
struct BernoulliUnit : ObservedUnit {
    std::vector<int> observed;
    long n_missing = 0;
    long successes = 0;

    long n_observed() const { return static_cast<long>(observed.size()); }
    long n_total() const { return n_observed() + n_missing; }
};

struct BernoulliCompleted : CompletedUnit {
    long successes = 0;
    long n = 0;
};

class BernoulliMcarModel : public IncompleteModel {
public:
    BernoulliMcarModel();

    std::string tag() const override { return "bernoulli_mcar"; }
    const ParamLayout& layout() const override { return layout_; }

    double loglik_obs(const ObservedUnit&, std::span<const double>) const override;
    double q_fn(const ObservedUnit&, std::span<const double>, std::span<const double>) const override;
    std::unique_ptr<CompletedUnit> sample_missing(const ObservedUnit&, std::span<const double>,
                                                  Rng&) const override;
    double loglik_comp(const CompletedUnit&, std::span<const double>) const override;
    std::vector<double> score_obs(const ObservedUnit&, std::span<const double>) const override;
    Eigen::MatrixXd info_missing(const ObservedUnit&, std::span<const double>) const override;

    std::optional<LodMoments> completed_lod_moments(const ObservedUnit&, std::span<const double>,
                                                    std::span<const double>,
                                                    std::span<const double>) const override;
    bool has_exact_lod_moments() const override { return true; }
    std::optional<std::vector<double>> m_step(const UnitDataset&, std::span<const double>,
                                              const std::vector<bool>&,
                                              std::span<const double>) const override;
    std::optional<CompletedStatistics> completed_statistics(const UnitDataset&,
                                                            std::span<const double>,
                                                            std::span<const double>) const override;

    std::vector<double> initial_point(const UnitDataset&) const override;
    double coordinate_scale(std::span<const double>, std::size_t) const override;

    std::vector<std::string> check_unit(const json&, double) const override;
    UnitPtr parse_unit(const json&, double) const override;
    json unit_to_json(const ObservedUnit&) const override;

    static std::shared_ptr<BernoulliUnit> make_unit(std::vector<int> observed, long n_missing);

private:
    ParamLayout layout_;
};

struct BernoulliStatistics {
    double t_ob = 0.0;
    double t_alt = 0.0;   // T1*: missing imputed at the observed mean
    double t_null = 0.0;  // T0*: missing imputed at p0
    double r_hat_alt = 0.0;   // (T_ob / T1*)^2
    double r_hat_null = 0.0;  // (T0* / T_ob)^2
    bool boundary = false;    // observed mean is 0 or 1
    bool degenerate = false;  // observed mean equals p0; ratios undefined (NaN)
};

// Squared statistics are formed in exact rational arithmetic from the
// binary expansion of p0, so both ratios reproduce n0/n to the last bit.
BernoulliStatistics bernoulli_statistics(long successes, long n_observed, long n_total, double p0);
BernoulliStatistics bernoulli_statistics(const BernoulliUnit& unit, double p0);

}  // namespace missinfo
