#include "missinfo/report.hpp"

#include <cmath>
#include <cstdio>

namespace missinfo {

std::string manifest_hash(const json& doc) {
    const std::string s = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

namespace {

json numbers(const std::vector<double>& xs) {
    json a = json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
}

}  // namespace

json to_json(const FitResult& f) {
    return {{"theta", numbers(f.theta_hat.vec())},
            {"loglik", number(f.loglik)},
            {"iterations", f.iterations},
            {"converged", f.converged},
            {"gradient_norm", number(f.gradient_norm)},
            {"boundary", f.boundary},
            {"flat", f.flat},
            {"notes", f.notes}};
}

json to_json(const RiValue& v) {
    return {{"value", number(v.value)},
            {"numerator", number(v.numerator)},
            {"denominator", number(v.denominator)},
            {"limit_used", v.limit_used},
            {"flags", v.flags}};
}

json to_json(const LargeSampleReport& r) {
    json units = json::array();
    for (auto& u : r.per_unit) units.push_back({{"lod", number(u.lod)}, {"lod_c", number(u.lod_c)}, {"ri1", number(u.ri1)}});
    return {{"ri1", number(r.ri1)},
            {"ri0", number(r.ri0)},
            {"ri_half", number(r.ri_half)},
            {"ri_gap", number(std::abs(r.ri1 - r.ri0))},
            {"lod_ob", number(r.lod_ob)},
            {"expected_lod_co", number(r.expected_lod_co)},
            {"q_gain_at_null", number(r.q_gain_at_null)},
            {"theta_q", numbers(r.theta_q.vec())},
            {"ri1_harmonic", number(r.ri1_harmonic)},
            {"ri1_arithmetic", number(r.ri1_arithmetic)},
            {"per_unit", units},
            {"flags", r.flags}};
}

json to_json(const CompletedRatio& r) {
    return {{"r_from_alt", number(r.r_from_alt)},
            {"r_from_null", number(r.r_from_null)},
            {"statistic_observed", number(r.stats.observed)},
            {"statistic_imputed_alt", number(r.stats.imputed_alt)},
            {"statistic_imputed_null", number(r.stats.imputed_null)}};
}

json to_json(const BayesValue& v) {
    json j = {{"value", number(v.value)}, {"mc_se", number(v.se)}, {"exact", v.exact}, {"flags", v.flags}};
    if (v.ess > 0) j["ess"] = number(v.ess);
    return j;
}

json to_json(const BayesFactorReport& r) {
    auto mm = [](const McMean& m) { return json{{"mean", number(m.mean)}, {"mc_se", number(m.se)}}; };
    return {{"bf_quadrature", number(r.bf_quadrature)},
            {"posterior_mean_lr_ob", mm(r.lr_ob)},
            {"posterior_mean_lr_co", mm(r.lr_co)},
            {"posterior_mean_bf_co", mm(r.bf_co)},
            {"var_lr_ob", number(r.var_lr_ob)},
            {"var_lr_co", number(r.var_lr_co)},
            {"var_lr_co_exact", r.var_lr_co_exact},
            {"var_bf_co", mm(r.var_bf_co)},
            {"variance_ordering_holds", r.variance_ordering_holds},
            {"flags", r.flags}};
}

json to_json(const ShrinkTable& t) {
    json rows = json::array();
    for (auto& r : t.rows)
        rows.push_back({{"delta", r.delta},
                        {"bi1", to_json(r.bi1)},
                        {"bi2", to_json(r.bi2)},
                        {"gap1", number(r.gap1)},
                        {"gap2", number(r.gap2)}});
    return {{"bi0", number(t.bi0)},
            {"rows", rows},
            {"decay1", numbers(t.decay1)},
            {"decay2", numbers(t.decay2)},
            {"monotone", t.monotone},
            {"flags", t.flags}};
}

json to_json(const ExpansionCheck& e) {
    json j = {{"ri_e", number(e.ri_e)},
              {"coeff_ri1", number(e.coeff_ri1)},
              {"coeff_ri0", number(e.coeff_ri0)},
              {"deltas", numbers(e.deltas)},
              {"values", numbers(e.values)},
              {"errors", numbers(e.errors)},
              {"decay_ratios", numbers(e.decay_ratios)},
              {"band", {e.band_lo, e.band_hi}},
              {"exact", e.exact},
              {"noisy", e.noisy},
              {"pass", e.decay_ok()},
              {"flags", e.flags}};
    if (!e.theta_q.empty()) {
        j["theta_q"] = numbers(e.theta_q);
        j["bracketing"] = e.bracketing;
    }
    return j;
}

json to_json(const EmIdentityReport& r) {
    json checks = json::array();
    for (auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"at", numbers(c.at)},
                          {"lhs", number(c.lhs)},
                          {"rhs", number(c.rhs)},
                          {"relative_violation", number(c.relative_violation)},
                          {"fd_error", number(c.fd_error)},
                          {"pass", c.pass}});
    return {{"pass", r.all_pass()}, {"checks", checks}};
}

json to_json(const TiltingBi0& t) {
    return {{"bi0", number(t.bi0)}, {"w", number(t.w)}, {"var_z", number(t.var_z)}, {"approximation", number(t.approximation)}};
}

}  // namespace missinfo
