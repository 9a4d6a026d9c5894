#pragma once

#include "missinfo/em_engine.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace missinfo {

struct RiValue {
    double value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    bool limit_used = false;  // degenerate test, RI_E returned instead
    std::vector<std::string> flags;
};

// [l_ob(theta_ob) - l_ob(theta0)] / [Q(theta_ob|theta_ob) - Q(theta0|theta_ob)]
RiValue compute_ri1(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                    const ParamPoint& theta0);
// max_theta [Q(theta|theta0) - Q(theta0|theta0)] / [l_ob(theta_ob) - l_ob(theta0)]
RiValue compute_ri0(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                    const ParamPoint& theta0, const FitConfig& cfg = {});
// sqrt of the Q-only ratio; equals sqrt(ri0 * ri1)
RiValue compute_ri_half(const IncompleteModel& model, const UnitDataset& data,
                        const ParamPoint& theta_ob, const ParamPoint& theta0, const FitConfig& cfg = {});

struct CurvePoint {
    ParamPoint theta;
    double ri = 0.0;
    std::string flag;
};
struct RiCurve {
    std::vector<CurvePoint> points;
    std::vector<std::string> omitted;  // grid points dropped, with the reason
};
RiCurve ri_curve(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                 const std::vector<ParamPoint>& grid);
void write_curve_csv(std::ostream& out, const RiCurve& curve, std::size_t coord);

// [sum lod_i / ri_i / sum lod_i]^-1; negative lods are kept and reported in flags.
double combine_harmonic(const std::vector<double>& lods, const std::vector<double>& ris,
                        std::vector<std::string>* flags = nullptr);
// sum lod_c_i ri_i / sum lod_c_i
double combine_arithmetic(const std::vector<double>& lod_cs, const std::vector<double>& ris);

struct CompletedRatio {
    double r_from_alt = 0.0;   // observed / imputed-at-theta_ob statistic
    double r_from_null = 0.0;  // imputed-at-theta0 / observed statistic
    CompletedStatistics stats;
};
CompletedRatio completed_stat_ratio(const IncompleteModel& model, const UnitDataset& data,
                                    const ParamPoint& theta_ob, const ParamPoint& theta0);

struct UnitTerms {
    double lod = 0.0;
    double lod_c = 0.0;
    double ri1 = 0.0;
};

struct LargeSampleReport {
    double ri1 = 0.0, ri0 = 0.0, ri_half = 0.0;
    double lod_ob = 0.0;
    double expected_lod_co = 0.0;  // Q(theta_ob|theta_ob) - Q(theta0|theta_ob)
    double q_gain_at_null = 0.0;   // max_theta Q(theta|theta0) - Q(theta0|theta0)
    ParamPoint theta_q;
    std::vector<UnitTerms> per_unit;
    double ri1_harmonic = 0.0, ri1_arithmetic = 0.0;
    std::vector<std::string> flags;
};

// Evaluates everything above and asserts the two ordering properties
// q_gain_at_null <= lod_ob <= expected_lod_co (NumericalError if violated
// beyond rounding).
LargeSampleReport large_sample_report(const IncompleteModel& model, const UnitDataset& data,
                                      const ParamPoint& theta_ob, const ParamPoint& theta0,
                                      const FitConfig& cfg = {});

}  // namespace missinfo
