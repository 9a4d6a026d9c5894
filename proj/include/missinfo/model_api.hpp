#pragma once

#include "missinfo/errors.hpp"
#include "missinfo/rng.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace missinfo {

using json = nlohmann::json;

enum class Role { interest, nuisance };

struct ParamLayout {
    std::vector<std::string> names;
    std::vector<Role> roles;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return names.size(); }
    std::vector<std::size_t> interest() const;
    std::vector<std::size_t> nuisance() const;
    bool admissible(std::span<const double> theta) const;
};

class ParamPoint {
public:
    ParamPoint() = default;
    ParamPoint(std::vector<double> values, std::vector<Role> roles);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& vec() const { return values_; }
    const std::vector<Role>& roles() const { return roles_; }
    std::vector<std::size_t> interest_indices() const;
    std::vector<std::size_t> nuisance_indices() const;

    ParamPoint with(std::size_t k, double v) const;
    ParamPoint with_values(std::vector<double> values) const;

private:
    std::vector<double> values_;
    std::vector<Role> roles_;
};

enum class NuisancePolicy { fix_at_null_mle, average_over_prior };

struct HypothesisSpec {
    std::vector<double> null_values;
    NuisancePolicy nuisance_policy = NuisancePolicy::fix_at_null_mle;

    void validate(const ParamLayout& layout) const;
};

// Model-defined observed-data payload for one independent unit.
class ObservedUnit {
public:
    virtual ~ObservedUnit() = default;
};

// A unit with its missing part filled in by sample_missing.
class CompletedUnit {
public:
    virtual ~CompletedUnit() = default;
};

using UnitPtr = std::shared_ptr<const ObservedUnit>;

struct UnitDataset {
    std::vector<UnitPtr> units;
    std::vector<double> weights;

    std::size_t size() const { return units.size(); }
    void validate() const;
    UnitDataset subset(std::span<const std::size_t> which) const;
};

// Moments of D = l_co(a) - l_co(b) under f(Y_mis | Y_ob, phi).
struct LodMoments {
    double mean = 0.0;
    double variance = 0.0;
    double log_mgf = 0.0;  // log E[exp(D)], +inf when it does not exist
};

// Squared standardized statistics before and after imputing the missing part.
struct CompletedStatistics {
    double observed = 0.0;
    double imputed_alt = 0.0;   // missing part imputed at theta_ob
    double imputed_null = 0.0;  // missing part imputed at theta_0
};

class IncompleteModel {
public:
    virtual ~IncompleteModel() = default;

    virtual std::string tag() const = 0;
    virtual const ParamLayout& layout() const = 0;
    std::size_t dim() const { return layout().dim(); }

    virtual double loglik_obs(const ObservedUnit& unit, std::span<const double> theta) const = 0;
    // Q(t1 | t2) = E[l_co(t1) | Y_ob, t2]
    virtual double q_fn(const ObservedUnit& unit, std::span<const double> t1,
                        std::span<const double> t2) const = 0;
    virtual std::unique_ptr<CompletedUnit> sample_missing(const ObservedUnit& unit,
                                                          std::span<const double> theta,
                                                          Rng& rng) const = 0;
    virtual double loglik_comp(const CompletedUnit& unit, std::span<const double> theta) const = 0;

    // Central differences with h = max(1e-5, 1e-5 |theta_k|) unless overridden.
    virtual std::vector<double> score_obs(const ObservedUnit& unit,
                                          std::span<const double> theta) const;
    // Defaults to info_missing_mc with 4096 draws on a fixed substream.
    virtual Eigen::MatrixXd info_missing(const ObservedUnit& unit,
                                         std::span<const double> theta) const;

    struct McInfo {
        Eigen::MatrixXd value;
        Eigen::MatrixXd se;
    };
    McInfo info_missing_mc(const ObservedUnit& unit, std::span<const double> theta, Rng& rng,
                           std::size_t draws = 4096) const;

    // Optional capabilities.
    virtual std::optional<LodMoments> completed_lod_moments(const ObservedUnit&,
                                                            std::span<const double> /*phi*/,
                                                            std::span<const double> /*a*/,
                                                            std::span<const double> /*b*/) const {
        return std::nullopt;
    }
    virtual bool has_exact_lod_moments() const { return false; }

    // argmax over the free coordinates of sum_i Q(. | anchor); others stay at start.
    virtual std::optional<std::vector<double>> m_step(const UnitDataset&,
                                                      std::span<const double> /*anchor*/,
                                                      const std::vector<bool>& /*free*/,
                                                      std::span<const double> /*start*/) const {
        return std::nullopt;
    }
    virtual std::optional<CompletedStatistics> completed_statistics(
        const UnitDataset&, std::span<const double> /*theta_ob*/,
        std::span<const double> /*theta_0*/) const {
        return std::nullopt;
    }

    virtual std::vector<double> initial_point(const UnitDataset& data) const = 0;
    // Typical magnitude of coordinate k near theta; sets finite-difference steps.
    virtual double coordinate_scale(std::span<const double> theta, std::size_t k) const;

    // Serialization. check_unit lists invariant violations without throwing;
    // parse_unit throws ValidationError carrying them.
    virtual std::vector<std::string> check_unit(const json& j, double weight) const = 0;
    virtual UnitPtr parse_unit(const json& j, double weight) const = 0;
    virtual json unit_to_json(const ObservedUnit& unit) const = 0;

    ParamPoint point(std::vector<double> values) const;
};

template <class U>
const U& unit_as(const ObservedUnit& u, const char* model) {
    auto p = dynamic_cast<const U*>(&u);
    if (!p) throw ValidationError(std::string("unit does not belong to model ") + model);
    return *p;
}

template <class U>
const U& completed_as(const CompletedUnit& u, const char* model) {
    auto p = dynamic_cast<const U*>(&u);
    if (!p) throw ValidationError(std::string("completed unit does not belong to model ") + model);
    return *p;
}

double dataset_loglik_obs(const IncompleteModel& model, const UnitDataset& data,
                          std::span<const double> theta);
double dataset_q(const IncompleteModel& model, const UnitDataset& data,
                 std::span<const double> t1, std::span<const double> t2);
std::vector<double> dataset_score(const IncompleteModel& model, const UnitDataset& data,
                                  std::span<const double> theta);
Eigen::MatrixXd dataset_info_missing(const IncompleteModel& model, const UnitDataset& data,
                                     std::span<const double> theta);
// Sum of per-unit exact moments, or nullopt if the model has none.
std::optional<LodMoments> dataset_lod_moments(const IncompleteModel& model, const UnitDataset& data,
                                              std::span<const double> phi,
                                              std::span<const double> a,
                                              std::span<const double> b);

inline double dataset_loglik_obs(const IncompleteModel& m, const UnitDataset& d,
                                 const ParamPoint& t) {
    return dataset_loglik_obs(m, d, t.values());
}
inline double dataset_q(const IncompleteModel& m, const UnitDataset& d, const ParamPoint& t1,
                        const ParamPoint& t2) {
    return dataset_q(m, d, t1.values(), t2.values());
}

}  // namespace missinfo
