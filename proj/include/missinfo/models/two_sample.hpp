#pragma once

#include "missinfo/model_api.hpp"

namespace missinfo {

// Allele counts for cases (allele 1, allele 2) and controls, plus chromosomes
// whose allele is unobserved in each group.
struct TwoSampleUnit : ObservedUnit {
    double case1 = 0, case2 = 0;
    double control1 = 0, control2 = 0;
    double missing_case = 0, missing_control = 0;
};

struct TwoSampleCompleted : CompletedUnit {
    double case1 = 0, case2 = 0, control1 = 0, control2 = 0;
};

// theta = (psi, eta): psi = log odds ratio of allele 1 (interest), eta =
// control logit (nuisance). Case frequency a = expit(eta + psi), control u = expit(eta).
class TwoSampleCountsModel : public IncompleteModel {
public:
    TwoSampleCountsModel();

    std::string tag() const override { return "two_sample_counts"; }
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

    std::vector<std::string> check_unit(const json&, double) const override;
    UnitPtr parse_unit(const json&, double) const override;
    json unit_to_json(const ObservedUnit&) const override;

    static std::shared_ptr<TwoSampleUnit> make_unit(double case1, double case2, double control1,
                                                    double control2, double missing_case,
                                                    double missing_control);
    static double case_freq(std::span<const double> th);
    static double control_freq(std::span<const double> th);
    static std::vector<double> from_freqs(double a, double u);

private:
    ParamLayout layout_;
};

struct TwoSampleLrt {
    double chi2_obs = 0.0;
    double chi2_joint_em = 0.0;     // missing chromosomes imputed at the pooled frequency
    double chi2_separate_em = 0.0;  // imputed at the per-group frequencies
    double pooled = 0.0, case_freq = 0.0, control_freq = 0.0;
};

// Likelihood-ratio chi-square for a 2x2 allele table (G statistic).
double allele_table_chi2(double case1, double case2, double control1, double control2);
TwoSampleLrt two_sample_lrt(const TwoSampleUnit& unit);
// Aggregates every unit of the dataset into one table first.
TwoSampleLrt two_sample_lrt(const UnitDataset& data);

}  // namespace missinfo
