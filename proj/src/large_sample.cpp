#include "missinfo/large_sample.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace missinfo {

namespace {

double tiny_for(double magnitude) { return 1e-10 * (1.0 + std::abs(magnitude)); }

bool same_point(const ParamPoint& a, const ParamPoint& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
        if (std::abs(a[k] - b[k]) > 1e-10 * (1.0 + std::abs(a[k]))) return false;
    return true;
}

RiValue ri_e_limit(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& at,
                   const std::string& why) {
    RiValue r;
    auto info = info_decomposition(model, data, at);
    r.value = fraction_observed_information(info, scalar_interest(model));
    r.limit_used = true;
    r.flags.push_back(why + "; returned the fraction of observed information RI_E");
    return r;
}

double checked_lod(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                   const ParamPoint& theta0) {
    double l1 = dataset_loglik_obs(model, data, theta_ob), l0 = dataset_loglik_obs(model, data, theta0);
    double lod = l1 - l0;
    if (lod < -tiny_for(l1) * 10)
        throw NumericalError("theta_ob has lower observed likelihood than theta0 (lod = " + std::to_string(lod) +
                             "); pass the unconstrained MLE as theta_ob");
    return lod;
}

struct Ri0Parts {
    RiValue value;
    ParamPoint theta_q;
};

Ri0Parts ri0_parts(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                   const ParamPoint& theta0, const FitConfig& cfg) {
    Ri0Parts out;
    double lod = checked_lod(model, data, theta_ob, theta0);
    auto fit = maximize_q(model, data, theta0, cfg);
    out.theta_q = fit.theta_hat;
    double q00 = dataset_q(model, data, theta0, theta0);
    double num = std::max(0.0, fit.loglik - q00);
    if (same_point(theta_ob, theta0) || lod <= tiny_for(dataset_loglik_obs(model, data, theta_ob))) {
        out.value = ri_e_limit(model, data, theta_ob, "observed lod is zero");
        return out;
    }
    out.value.numerator = num;
    out.value.denominator = lod;
    out.value.value = num / lod;
    for (auto& n : fit.notes) out.value.flags.push_back(n);
    if (out.value.value > 1.0 + 1e-8) out.value.flags.push_back("RI0 exceeds 1 beyond rounding");
    return out;
}

}  // namespace

RiValue compute_ri1(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                    const ParamPoint& theta0) {
    if (same_point(theta_ob, theta0)) return ri_e_limit(model, data, theta_ob, "theta_ob equals theta0");
    double lod = checked_lod(model, data, theta_ob, theta0);
    double qq = dataset_q(model, data, theta_ob, theta_ob);
    double den = qq - dataset_q(model, data, theta0, theta_ob);
    if (lod <= tiny_for(qq) && den <= tiny_for(qq))
        return ri_e_limit(model, data, theta_ob, "observed and expected complete-data lods vanish");
    if (!(den > 0.0))
        throw NumericalError("expected complete-data lod is not positive (" + std::to_string(den) + ")");
    RiValue r;
    r.numerator = lod;
    r.denominator = den;
    r.value = lod / den;
    if (r.value > 1.0 + 1e-8) r.flags.push_back("RI1 exceeds 1 beyond rounding");
    return r;
}

RiValue compute_ri0(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                    const ParamPoint& theta0, const FitConfig& cfg) {
    return ri0_parts(model, data, theta_ob, theta0, cfg).value;
}

RiValue compute_ri_half(const IncompleteModel& model, const UnitDataset& data,
                        const ParamPoint& theta_ob, const ParamPoint& theta0, const FitConfig& cfg) {
    double qq = dataset_q(model, data, theta_ob, theta_ob);
    double den = qq - dataset_q(model, data, theta0, theta_ob);
    if (same_point(theta_ob, theta0) || den <= tiny_for(qq)) {
        if (same_point(theta_ob, theta0) || std::abs(den) <= tiny_for(qq))
            return ri_e_limit(model, data, theta_ob, "degenerate test: expected complete-data lod is zero");
        throw NumericalError("expected complete-data lod is negative; degenerate test");
    }
    auto fit = maximize_q(model, data, theta0, cfg);
    double num = std::max(0.0, fit.loglik - dataset_q(model, data, theta0, theta0));
    RiValue r;
    r.numerator = num;
    r.denominator = den;
    r.value = std::sqrt(num / den);
    return r;
}

RiCurve ri_curve(const IncompleteModel& model, const UnitDataset& data, const ParamPoint& theta_ob,
                 const std::vector<ParamPoint>& grid) {
    RiCurve c;
    const double l1 = dataset_loglik_obs(model, data, theta_ob);
    const double qq = dataset_q(model, data, theta_ob, theta_ob);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& th = grid[i];
        if (same_point(th, theta_ob)) {
            c.omitted.push_back("grid point " + std::to_string(i) + " equals theta_ob");
            continue;
        }
        double num = l1 - dataset_loglik_obs(model, data, th);
        double den = qq - dataset_q(model, data, th, theta_ob);
        if (!(den > tiny_for(qq))) {
            c.omitted.push_back("grid point " + std::to_string(i) + ": zero expected complete-data lod");
            continue;
        }
        CurvePoint p{th, num / den, ""};
        if (num < 0) p.flag = "negative_lod";
        else if (p.ri > 1.0 + 1e-8) p.flag = "above_one";
        c.points.push_back(std::move(p));
    }
    return c;
}

void write_curve_csv(std::ostream& out, const RiCurve& curve, std::size_t coord) {
    out << "theta,ri,flag\n";
    char buf[64];
    for (auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,", p.theta[coord], p.ri);
        out << buf << p.flag << "\n";
    }
}

double combine_harmonic(const std::vector<double>& lods, const std::vector<double>& ris,
                        std::vector<std::string>* flags) {
    if (lods.size() != ris.size() || lods.empty()) throw ValidationError("combine_harmonic: size mismatch");
    double s = 0.0, t = 0.0;
    for (std::size_t i = 0; i < lods.size(); ++i) {
        if (!(ris[i] > 0.0 && ris[i] <= 1.0 + 1e-8))
            throw ValidationError("combine_harmonic: ri values must lie in (0, 1]");
        if (lods[i] < 0 && flags) flags->push_back("unit " + std::to_string(i) + " has a negative lod");
        s += lods[i];
        t += lods[i] / ris[i];
    }
    if (s == 0.0 || t == 0.0) throw ValidationError("combine_harmonic: lods sum to zero");
    return s / t;
}

double combine_arithmetic(const std::vector<double>& lod_cs, const std::vector<double>& ris) {
    if (lod_cs.size() != ris.size() || lod_cs.empty()) throw ValidationError("combine_arithmetic: size mismatch");
    double s = 0.0, t = 0.0;
    for (std::size_t i = 0; i < lod_cs.size(); ++i) {
        if (!(ris[i] > 0.0 && ris[i] <= 1.0 + 1e-8))
            throw ValidationError("combine_arithmetic: ri values must lie in (0, 1]");
        s += lod_cs[i];
        t += lod_cs[i] * ris[i];
    }
    if (s == 0.0) throw ValidationError("combine_arithmetic: weights sum to zero");
    return t / s;
}

CompletedRatio completed_stat_ratio(const IncompleteModel& model, const UnitDataset& data,
                                    const ParamPoint& theta_ob, const ParamPoint& theta0) {
    auto st = model.completed_statistics(data, theta_ob.values(), theta0.values());
    if (!st)
        throw UnsupportedError("model " + model.tag() +
                               " has no scalar test statistic for imputed-as-real ratios");
    CompletedRatio r;
    r.stats = *st;
    r.r_from_alt = st->observed / st->imputed_alt;
    r.r_from_null = st->imputed_null / st->observed;
    return r;
}

LargeSampleReport large_sample_report(const IncompleteModel& model, const UnitDataset& data,
                                      const ParamPoint& theta_ob, const ParamPoint& theta0,
                                      const FitConfig& cfg) {
    LargeSampleReport rep;
    auto r1 = compute_ri1(model, data, theta_ob, theta0);
    auto r0 = ri0_parts(model, data, theta_ob, theta0, cfg);
    rep.ri1 = r1.value;
    rep.ri0 = r0.value.value;
    rep.theta_q = r0.theta_q;
    for (auto& f : r1.flags) rep.flags.push_back("ri1: " + f);
    for (auto& f : r0.value.flags) rep.flags.push_back("ri0: " + f);

    const double l1 = dataset_loglik_obs(model, data, theta_ob);
    rep.lod_ob = l1 - dataset_loglik_obs(model, data, theta0);
    const double qq = dataset_q(model, data, theta_ob, theta_ob);
    rep.expected_lod_co = qq - dataset_q(model, data, theta0, theta_ob);
    rep.q_gain_at_null =
        dataset_q(model, data, r0.theta_q, theta0) - dataset_q(model, data, theta0, theta0);
    rep.ri_half = rep.expected_lod_co > 0 ? std::sqrt(std::max(0.0, rep.q_gain_at_null) / rep.expected_lod_co)
                                          : rep.ri1;

    const double tol = 1e-8 * (1.0 + std::abs(l1));
    if (rep.q_gain_at_null > rep.lod_ob + tol)
        throw NumericalError("null-imputed expected lod exceeds the observed lod");
    if (rep.expected_lod_co < rep.lod_ob - tol)
        throw NumericalError("expected complete-data lod at theta_ob is below the observed lod");

    std::vector<double> lods, lcs, ris;
    bool all_positive = true;
    for (std::size_t i = 0; i < data.units.size(); ++i) {
        const auto& u = *data.units[i];
        UnitTerms t;
        t.lod = model.loglik_obs(u, theta_ob.values()) - model.loglik_obs(u, theta0.values());
        t.lod_c = model.q_fn(u, theta_ob.values(), theta_ob.values()) -
                  model.q_fn(u, theta0.values(), theta_ob.values());
        t.ri1 = t.lod_c > 0 ? t.lod / t.lod_c : std::numeric_limits<double>::quiet_NaN();
        if (t.lod < 0) rep.flags.push_back("unit " + std::to_string(i) + " has a negative lod");
        all_positive = all_positive && t.lod_c > 0 && t.ri1 > 0 && t.ri1 <= 1.0 + 1e-8;
        rep.per_unit.push_back(t);
        lods.push_back(t.lod);
        lcs.push_back(t.lod_c);
        ris.push_back(t.ri1);
    }
    rep.ri1_harmonic = rep.ri1_arithmetic = std::numeric_limits<double>::quiet_NaN();
    if (all_positive && !lods.empty()) {
        rep.ri1_harmonic = combine_harmonic(lods, ris, &rep.flags);
        rep.ri1_arithmetic = combine_arithmetic(lcs, ris);
    } else if (!lods.empty()) {
        rep.flags.push_back("per-unit RI1 outside (0, 1] for some unit; combining rules not applied");
    }
    return rep;
}

}  // namespace missinfo
