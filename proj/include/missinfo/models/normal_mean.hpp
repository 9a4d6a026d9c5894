#pragma once

#include "missinfo/model_api.hpp"

#include <optional>

namespace missinfo {

// n_total iid N(mu, sigma2) draws of which `observed` are seen.
struct NormalUnit : ObservedUnit {
    std::vector<double> observed;
    long n_total = 0;
    double mean = 0.0;  // of observed
    double ss = 0.0;    // sum of squared deviations from `mean`

    long m() const { return static_cast<long>(observed.size()); }
    long n_missing() const { return n_total - m(); }
};

struct NormalCompleted : CompletedUnit {
    long n = 0;
    double mean = 0.0;
    double ss = 0.0;
};

// theta = (mu, sigma2) with mu the interest; with a known variance theta = (mu).
class NormalMeanModel : public IncompleteModel {
public:
    explicit NormalMeanModel(std::optional<double> known_variance = std::nullopt);

    std::string tag() const override { return "normal_mean"; }
    const ParamLayout& layout() const override { return layout_; }
    std::optional<double> known_variance() const { return known_; }

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

    std::vector<double> initial_point(const UnitDataset&) const override;
    double coordinate_scale(std::span<const double>, std::size_t) const override;

    std::vector<std::string> check_unit(const json&, double) const override;
    UnitPtr parse_unit(const json&, double) const override;
    json unit_to_json(const ObservedUnit&) const override;

    static std::shared_ptr<NormalUnit> make_unit(std::vector<double> observed, long n_total);

private:
    double var(std::span<const double> th) const { return known_ ? *known_ : th[1]; }
    ParamLayout layout_;
    std::optional<double> known_;
};

struct NormalClosedForms {
    double ri1 = 0.0, ri0 = 0.0, bi0 = 0.0, bi_s = 0.0, t0 = 0.0;
    double r = 0.0;
};

// Closed-form measures for testing mu = mu0 with sigma2 a nuisance, from the
// pooled observed values of every unit (m observed out of n).
NormalClosedForms normal_closed_forms(const UnitDataset& data, double mu0);
NormalClosedForms normal_closed_forms(const NormalUnit& unit, double mu0);

// Splits a unit into one unit per observation plus one empty unit per missing value.
UnitDataset normal_split_units(const NormalUnit& unit);

}  // namespace missinfo
