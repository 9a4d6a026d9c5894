#include "missinfo/model_api.hpp"

#include <cmath>
#include <sstream>

namespace missinfo {

std::vector<std::size_t> ParamLayout::interest() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < roles.size(); ++k)
        if (roles[k] == Role::interest) out.push_back(k);
    return out;
}

std::vector<std::size_t> ParamLayout::nuisance() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < roles.size(); ++k)
        if (roles[k] == Role::nuisance) out.push_back(k);
    return out;
}

bool ParamLayout::admissible(std::span<const double> theta) const {
    if (theta.size() != dim()) return false;
    for (std::size_t k = 0; k < dim(); ++k)
        if (!(theta[k] >= lower[k] && theta[k] <= upper[k])) return false;
    return true;
}

ParamPoint::ParamPoint(std::vector<double> values, std::vector<Role> roles)
    : values_(std::move(values)), roles_(std::move(roles)) {
    if (values_.size() != roles_.size())
        throw ValidationError("ParamPoint: values and roles differ in length");
    bool any = false;
    for (auto r : roles_) any = any || r == Role::interest;
    if (!any) throw ValidationError("ParamPoint: no interest coordinate");
}

std::vector<std::size_t> ParamPoint::interest_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < roles_.size(); ++k)
        if (roles_[k] == Role::interest) out.push_back(k);
    return out;
}

std::vector<std::size_t> ParamPoint::nuisance_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < roles_.size(); ++k)
        if (roles_[k] == Role::nuisance) out.push_back(k);
    return out;
}

ParamPoint ParamPoint::with(std::size_t k, double v) const {
    ParamPoint p = *this;
    p.values_.at(k) = v;
    return p;
}

ParamPoint ParamPoint::with_values(std::vector<double> values) const {
    return ParamPoint(std::move(values), roles_);
}

void HypothesisSpec::validate(const ParamLayout& layout) const {
    if (null_values.size() != layout.interest().size()) {
        std::ostringstream os;
        os << "hypothesis has " << null_values.size() << " null values but the model has "
           << layout.interest().size() << " interest coordinates";
        throw ValidationError(os.str());
    }
    auto idx = layout.interest();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        double v = null_values[i];
        if (!(v >= layout.lower[idx[i]] && v <= layout.upper[idx[i]]))
            throw ValidationError("null value for " + layout.names[idx[i]] +
                                  " lies outside the parameter range");
    }
}

void UnitDataset::validate() const {
    if (weights.size() != units.size())
        throw ValidationError("dataset: weights and units differ in length");
    bool positive = false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw ValidationError("dataset: weight " + std::to_string(i) + " is negative or not finite");
        positive = positive || weights[i] > 0.0;
    }
    if (!units.empty() && !positive) throw ValidationError("dataset: all weights are zero");
}

UnitDataset UnitDataset::subset(std::span<const std::size_t> which) const {
    UnitDataset out;
    for (auto i : which) {
        out.units.push_back(units.at(i));
        out.weights.push_back(weights.at(i));
    }
    return out;
}

std::vector<double> IncompleteModel::score_obs(const ObservedUnit& unit,
                                               std::span<const double> theta) const {
    std::vector<double> t(theta.begin(), theta.end()), g(theta.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        double h = std::max(1e-5, 1e-5 * std::abs(theta[k]));
        t[k] = theta[k] + h;
        double fp = loglik_obs(unit, t);
        t[k] = theta[k] - h;
        double fm = loglik_obs(unit, t);
        t[k] = theta[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

IncompleteModel::McInfo IncompleteModel::info_missing_mc(const ObservedUnit& unit,
                                                         std::span<const double> theta, Rng& rng,
                                                         std::size_t draws) const {
    const std::size_t d = theta.size();
    std::vector<double> t(theta.begin(), theta.end());
    Eigen::MatrixXd scores(draws, d);
    for (std::size_t s = 0; s < draws; ++s) {
        auto comp = sample_missing(unit, theta, rng);
        for (std::size_t k = 0; k < d; ++k) {
            double h = std::max(1e-5, 1e-5 * std::abs(theta[k]));
            t[k] = theta[k] + h;
            double fp = loglik_comp(*comp, t);
            t[k] = theta[k] - h;
            double fm = loglik_comp(*comp, t);
            t[k] = theta[k];
            scores(s, k) = (fp - fm) / (2.0 * h);
        }
    }
    Eigen::RowVectorXd mean = scores.colwise().mean();
    Eigen::MatrixXd c = scores.rowwise() - mean;
    McInfo out;
    out.value = (c.transpose() * c) / static_cast<double>(draws - 1);
    out.se = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            Eigen::ArrayXd prod = c.col(a).array() * c.col(b).array();
            double m = prod.mean();
            double v = (prod - m).square().sum() / (draws - 1);
            out.se(a, b) = std::sqrt(v / draws);
        }
    return out;
}

Eigen::MatrixXd IncompleteModel::info_missing(const ObservedUnit& unit,
                                              std::span<const double> theta) const {
    Rng rng = substream(0x5eed, {stream_tag("info_missing")});
    return info_missing_mc(unit, theta, rng).value;
}

double IncompleteModel::coordinate_scale(std::span<const double> theta, std::size_t k) const {
    return std::max(1.0, std::abs(theta[k]));
}

ParamPoint IncompleteModel::point(std::vector<double> values) const {
    if (values.size() != dim())
        throw ValidationError("parameter vector has length " + std::to_string(values.size()) +
                              ", model " + tag() + " expects " + std::to_string(dim()));
    return ParamPoint(std::move(values), layout().roles);
}

double dataset_loglik_obs(const IncompleteModel& model, const UnitDataset& data,
                          std::span<const double> theta) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.units.size(); ++i) {
        double v = model.loglik_obs(*data.units[i], theta);
        if (!std::isfinite(v)) {
            if (v == -INFINITY) return v;  // outside the support: a legal log-likelihood value
            throw NumericalError("observed log-likelihood is not finite for unit " + std::to_string(i));
        }
        total += v;
    }
    return total;
}

double dataset_q(const IncompleteModel& model, const UnitDataset& data,
                 std::span<const double> t1, std::span<const double> t2) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.units.size(); ++i) {
        double v = model.q_fn(*data.units[i], t1, t2);
        if (!std::isfinite(v)) {
            if (v == -INFINITY) return v;
            throw NumericalError("Q is not finite for unit " + std::to_string(i));
        }
        total += v;
    }
    return total;
}

std::vector<double> dataset_score(const IncompleteModel& model, const UnitDataset& data,
                                  std::span<const double> theta) {
    std::vector<double> g(theta.size(), 0.0);
    for (auto& u : data.units) {
        auto s = model.score_obs(*u, theta);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += s[k];
    }
    return g;
}

Eigen::MatrixXd dataset_info_missing(const IncompleteModel& model, const UnitDataset& data,
                                     std::span<const double> theta) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(theta.size(), theta.size());
    for (auto& u : data.units) m += model.info_missing(*u, theta);
    return m;
}

std::optional<LodMoments> dataset_lod_moments(const IncompleteModel& model, const UnitDataset& data,
                                              std::span<const double> phi,
                                              std::span<const double> a,
                                              std::span<const double> b) {
    LodMoments total;
    for (auto& u : data.units) {
        auto m = model.completed_lod_moments(*u, phi, a, b);
        if (!m) return std::nullopt;
        total.mean += m->mean;
        total.variance += m->variance;
        total.log_mgf += m->log_mgf;
    }
    return total;
}

}  // namespace missinfo
