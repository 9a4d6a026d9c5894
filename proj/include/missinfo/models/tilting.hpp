#pragma once

#include "missinfo/model_api.hpp"

namespace missinfo {

// One family (pedigree) summarized by a standardized sharing statistic Z on a
// finite support: its null distribution P0 and its conditional distribution
// given the marker data under the null, p(z).
struct TiltingUnit : ObservedUnit {
    std::vector<double> support;
    std::vector<double> null_probs;
    std::vector<double> posterior_probs;
    double gamma = 1.0;
    std::vector<double> omega_posterior;  // optional, used by the entropy measure

    std::vector<double> log_null, log_post;
    double w() const;          // E_p[Z]
    double var_null_h() const; // Var_p[Z]
};

struct TiltingCompleted : CompletedUnit {
    const TiltingUnit* unit = nullptr;
    double z = 0.0;
};

// P_theta(Z = z) = P0(z) c(theta) exp(theta gamma z) for each family; the
// complete data are the Z values.
class TiltingModel : public IncompleteModel {
public:
    explicit TiltingModel(double theta_max = 20.0);

    std::string tag() const override { return "tilting"; }
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

    std::vector<double> initial_point(const UnitDataset&) const override { return {0.0}; }
    double coordinate_scale(std::span<const double>, std::size_t) const override { return 1.0; }

    std::vector<std::string> check_unit(const json&, double) const override;
    UnitPtr parse_unit(const json&, double) const override;
    json unit_to_json(const ObservedUnit&) const override;

    static std::shared_ptr<TiltingUnit> make_unit(std::vector<double> support,
                                                  std::vector<double> null_probs,
                                                  std::vector<double> posterior_probs,
                                                  double gamma = 1.0);

private:
    ParamLayout layout_;
};

// Sum over families of log[c_i(theta) sum_z p_i(z) exp(theta gamma_i z)].
double tilting_loglik(const UnitDataset& data, double theta);

struct TiltingScore {
    std::vector<double> w_i;  // E_p[Z_i]
    double w = 0.0;           // sum gamma_i W_i / sqrt(sum gamma_i^2)
};
TiltingScore tilting_w_statistic(const UnitDataset& data);

// Standardized sib-pair IBD sharing, Z = sqrt(2) (IBD - 1), with null (1/4, 1/2, 1/4).
std::shared_ptr<TiltingUnit> sibpair_unit(std::vector<double> ibd_posterior, double gamma = 1.0);
// Parents and both sibs identical-by-state for one heterozygous genotype:
// sharing 0 or 2 IBD with equal probability, never 1.
std::shared_ptr<TiltingUnit> tilting_sibpair_ibs_unit();
// n pairs sharing 0 IBD, n sharing 2, all fully informative, plus one
// uninformative pair.
UnitDataset sibpair_cancellation_dataset(int n);

// Sib pairs whose true IBD follows the tilted null at theta_true, each observed
// through a symmetric noisy channel with informativeness drawn from [q_lo, q_hi].
UnitDataset simulate_sibpairs(int n, double theta_true, Rng& rng, double q_lo = 0.2,
                              double q_hi = 0.9);

}  // namespace missinfo
