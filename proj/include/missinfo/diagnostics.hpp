#pragma once

#include "missinfo/em_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace missinfo {

// I_ob / I_co at theta_ob for the interest coordinate.
double compute_ri_e(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob);

struct ExpansionCheck {
    double ri_e = 0.0;
    double coeff_ri1 = 0.0;
    double coeff_ri0 = 0.0;
    double i_ob = 0.0, i_co = 0.0;
    double l3 = 0.0, q30 = 0.0, q21 = 0.0;  // derivatives at theta_ob
    std::vector<double> deltas;              // theta0 = theta_ob + delta
    std::vector<double> values;              // RI(delta)
    std::vector<double> errors;              // RI(delta) - ri_e - coeff * delta
    std::vector<double> decay_ratios;        // errors[k] / errors[k+1]
    double decay_ratio = 0.0;                // last of decay_ratios
    double band_lo = 2.5, band_hi = 6.0;
    bool exact = false;        // residuals vanish to rounding: RI is linear (or constant) in delta
    bool noisy = false;        // finite-difference noise in third derivatives; band widened
    bool bracketing = true;    // theta_Q between theta0 and theta_ob at every delta (RI0 only)
    std::vector<double> theta_q;
    std::vector<std::string> flags;

    bool decay_ok() const;
};

// Scalar-parameter models only. Deltas default to {0.08, 0.04, 0.02, 0.01}
// times the coordinate scale at theta_ob.
ExpansionCheck expansion_check_ri1(const IncompleteModel& model, const UnitDataset& data,
                                   const ParamPoint& theta_ob, std::vector<double> deltas = {});
ExpansionCheck expansion_check_ri0(const IncompleteModel& model, const UnitDataset& data,
                                   const ParamPoint& theta_ob, std::vector<double> deltas = {});

struct IdentityCheck {
    std::string name;
    std::vector<double> at;
    double lhs = 0.0, rhs = 0.0;
    double relative_violation = 0.0;
    double fd_error = 0.0;  // finite-difference error estimate of lhs - rhs
    bool pass = false;
};

struct EmIdentityReport {
    std::vector<IdentityCheck> checks;
    bool all_pass() const;
};

// Q10 = 0 and Q20 = -I_co at theta_ob; l' = Q10 and Q20 + Q11 = l'' at theta_ob
// and at n_random seeded interior points.
EmIdentityReport em_identity_suite(const IncompleteModel& model, const UnitDataset& data,
                                   const ParamPoint& theta_ob, std::uint64_t seed = 1,
                                   int n_random = 10, double tolerance = 1e-4);

}  // namespace missinfo
