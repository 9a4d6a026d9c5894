#include "missinfo/models/haplotype.hpp"

#include "json_util.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace missinfo {

namespace {

const char* kTag = "haplotype_cc";
constexpr double kBound = 20.0;
constexpr int kT[4] = {1, 1, 0, 0};  // carries T at SNP1
constexpr int kX[4] = {1, 0, 1, 0};  // carries X at SNP2
const char* kNames[4] = {"TX", "T0", "CX", "C0"};

template <class F>
void for_pairs(std::uint16_t mask, F&& f) {
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (mask & (1u << (4 * a + b))) f(a, b);
}

double pair_loglik(std::uint16_t mask, const std::array<double, 4>& h) {
    double s = 0.0;
    for_pairs(mask, [&](int a, int b) { s += h[a] * h[b]; });
    return std::log(s);
}

}  // namespace

const char* haplotype_name(int h) { return kNames[h]; }

int haplotype_from_name(const std::string& s) {
    for (int h = 0; h < 4; ++h)
        if (s == kNames[h]) return h;
    throw ValidationError("unknown haplotype \"" + s + "\" (expected TX, T0, CX or C0)");
}

std::uint16_t HaplotypeSubject::compatible_mask() const {
    std::uint16_t mask = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            bool ok;
            if (phased[0] >= 0)
                ok = (a == phased[0] && b == phased[1]) || (a == phased[1] && b == phased[0]);
            else
                ok = (snp1 < 0 || kT[a] + kT[b] == snp1) && (snp2 < 0 || kX[a] + kX[b] == snp2);
            if (ok) mask |= static_cast<std::uint16_t>(1u << (4 * a + b));
        }
    return mask;
}

void HaplotypeUnit::rebuild_patterns() {
    std::map<std::pair<bool, std::uint16_t>, double> counts;
    for (auto& s : subjects) counts[{s.is_case, s.compatible_mask()}] += 1.0;
    patterns.clear();
    for (auto& [key, c] : counts) patterns.push_back({key.first, key.second, c});
}

HaplotypeCCModel::HaplotypeCCModel(int interest, int reference)
    : interest_(interest), reference_(reference) {
    if (interest < 0 || interest > 3 || reference < 0 || reference > 3 || interest == reference)
        throw ValidationError("haplotype_cc: interest and reference must be two distinct haplotypes");
    int k = 0;
    for (int h = 0; h < 4; ++h)
        if (h != reference_) others_[k++] = h;
    for (int k2 = 0; k2 < 3; ++k2) {
        layout_.names.push_back(std::string("beta_") + kNames[others_[k2]]);
        layout_.roles.push_back(others_[k2] == interest_ ? Role::interest : Role::nuisance);
    }
    for (int k2 = 0; k2 < 3; ++k2) {
        layout_.names.push_back(std::string("eta_") + kNames[others_[k2]]);
        layout_.roles.push_back(Role::nuisance);
    }
    layout_.lower.assign(6, -kBound);
    layout_.upper.assign(6, kBound);
}

std::array<std::array<double, 4>, 2> HaplotypeCCModel::frequencies(std::span<const double> th) const {
    std::array<double, 4> sa{}, su{};
    for (int k = 0; k < 3; ++k) {
        su[others_[k]] = th[3 + k];
        sa[others_[k]] = th[3 + k] + th[k];
    }
    auto softmax = [](std::array<double, 4> s) {
        double m = std::max({s[0], s[1], s[2], s[3]}), z = 0.0;
        for (auto& v : s) z += (v = std::exp(v - m));
        for (auto& v : s) v /= z;
        return s;
    };
    return {softmax(sa), softmax(su)};
}

std::vector<double> HaplotypeCCModel::from_frequencies(const std::array<double, 4>& fa,
                                                       const std::array<double, 4>& fu) const {
    std::vector<double> th(6);
    for (int k = 0; k < 3; ++k) {
        int h = others_[k];
        double eta = std::log(fu[h] / fu[reference_]);
        th[3 + k] = std::clamp(eta, -kBound, kBound);
        th[k] = std::clamp(std::log(fa[h] / fa[reference_]) - eta, -kBound, kBound);
    }
    return th;
}

double HaplotypeCCModel::loglik_obs(const ObservedUnit& unit, std::span<const double> th) const {
    auto& u = unit_as<HaplotypeUnit>(unit, kTag);
    auto f = frequencies(th);
    double s = 0.0;
    for (auto& p : u.patterns) s += p.count * pair_loglik(p.mask, f[p.is_case ? 0 : 1]);
    return s;
}

HaplotypeCCModel::Expected HaplotypeCCModel::expected_counts(const HaplotypeUnit& u,
                                                             std::span<const double> th) const {
    auto f = frequencies(th);
    Expected e;
    for (auto& p : u.patterns) {
        auto& h = f[p.is_case ? 0 : 1];
        auto& out = p.is_case ? e.a : e.u;
        double z = 0.0;
        for_pairs(p.mask, [&](int a, int b) { z += h[a] * h[b]; });
        for_pairs(p.mask, [&](int a, int b) {
            double w = p.count * h[a] * h[b] / z;
            out[a] += w;
            out[b] += w;
        });
    }
    return e;
}

HaplotypeCCModel::Expected HaplotypeCCModel::expected_counts(const UnitDataset& data,
                                                             std::span<const double> th) const {
    Expected e;
    for (auto& up : data.units) {
        auto x = expected_counts(unit_as<HaplotypeUnit>(*up, kTag), th);
        for (int h = 0; h < 4; ++h) {
            e.a[h] += x.a[h];
            e.u[h] += x.u[h];
        }
    }
    return e;
}

double HaplotypeCCModel::q_fn(const ObservedUnit& unit, std::span<const double> t1,
                              std::span<const double> t2) const {
    auto e = expected_counts(unit_as<HaplotypeUnit>(unit, kTag), t2);
    auto f = frequencies(t1);
    double s = 0.0;
    for (int h = 0; h < 4; ++h) s += detail::xlogy(e.a[h], f[0][h]) + detail::xlogy(e.u[h], f[1][h]);
    return s;
}

std::unique_ptr<CompletedUnit> HaplotypeCCModel::sample_missing(const ObservedUnit& unit,
                                                                std::span<const double> th,
                                                                Rng& rng) const {
    auto& u = unit_as<HaplotypeUnit>(unit, kTag);
    auto f = frequencies(th);
    auto c = std::make_unique<HaplotypeCompleted>();
    for (auto& p : u.patterns) {
        auto& h = f[p.is_case ? 0 : 1];
        auto& out = p.is_case ? c->case_counts : c->control_counts;
        std::vector<double> w;
        std::vector<std::pair<int, int>> pairs;
        for_pairs(p.mask, [&](int a, int b) {
            w.push_back(h[a] * h[b]);
            pairs.emplace_back(a, b);
        });
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        for (long s = 0; s < std::lround(p.count); ++s) {
            auto [a, b] = pairs[pick(rng)];
            out[a] += 1;
            out[b] += 1;
        }
    }
    return c;
}

double HaplotypeCCModel::loglik_comp(const CompletedUnit& unit, std::span<const double> th) const {
    auto& c = completed_as<HaplotypeCompleted>(unit, kTag);
    auto f = frequencies(th);
    double s = 0.0;
    for (int h = 0; h < 4; ++h)
        s += detail::xlogy(c.case_counts[h], f[0][h]) + detail::xlogy(c.control_counts[h], f[1][h]);
    return s;
}

std::vector<double> HaplotypeCCModel::score_obs(const ObservedUnit& unit,
                                                std::span<const double> th) const {
    // Fisher's identity: the observed score is the expected complete-data score.
    auto e = expected_counts(unit_as<HaplotypeUnit>(unit, kTag), th);
    auto f = frequencies(th);
    double na = 0.0, nu = 0.0;
    for (int h = 0; h < 4; ++h) na += e.a[h], nu += e.u[h];
    std::vector<double> g(6);
    for (int k = 0; k < 3; ++k) {
        int h = others_[k];
        double ga = e.a[h] - na * f[0][h], gu = e.u[h] - nu * f[1][h];
        g[k] = ga;
        g[3 + k] = ga + gu;
    }
    return g;
}

Eigen::MatrixXd HaplotypeCCModel::info_missing(const ObservedUnit& unit,
                                               std::span<const double> th) const {
    auto& u = unit_as<HaplotypeUnit>(unit, kTag);
    auto f = frequencies(th);
    Eigen::Matrix4d va = Eigen::Matrix4d::Zero(), vu = Eigen::Matrix4d::Zero();
    for (auto& p : u.patterns) {
        auto& h = f[p.is_case ? 0 : 1];
        double z = 0.0;
        for_pairs(p.mask, [&](int a, int b) { z += h[a] * h[b]; });
        Eigen::Vector4d mean = Eigen::Vector4d::Zero();
        Eigen::Matrix4d second = Eigen::Matrix4d::Zero();
        for_pairs(p.mask, [&](int a, int b) {
            double w = h[a] * h[b] / z;
            Eigen::Vector4d c = Eigen::Vector4d::Zero();
            c[a] += 1;
            c[b] += 1;
            mean += w * c;
            second += w * c * c.transpose();
        });
        (p.is_case ? va : vu) += p.count * (second - mean * mean.transpose());
    }
    // score = Ja c_case + Ju c_control + const
    Eigen::Matrix<double, 6, 4> ja = Eigen::Matrix<double, 6, 4>::Zero(), ju = ja;
    for (int k = 0; k < 3; ++k) {
        ja(k, others_[k]) = 1;
        ja(3 + k, others_[k]) = 1;
        ju(3 + k, others_[k]) = 1;
    }
    return ja * va * ja.transpose() + ju * vu * ju.transpose();
}

std::optional<LodMoments> HaplotypeCCModel::completed_lod_moments(const ObservedUnit& unit,
                                                                  std::span<const double> phi,
                                                                  std::span<const double> a,
                                                                  std::span<const double> b) const {
    auto& u = unit_as<HaplotypeUnit>(unit, kTag);
    auto fp = frequencies(phi), fa = frequencies(a), fb = frequencies(b);
    LodMoments m;
    for (auto& p : u.patterns) {
        int g = p.is_case ? 0 : 1;
        std::vector<double> w, d;
        for_pairs(p.mask, [&](int x, int y) {
            w.push_back(fp[g][x] * fp[g][y]);
            d.push_back(std::log(fa[g][x] * fa[g][y]) - std::log(fb[g][x] * fb[g][y]));
        });
        double z = 0.0, mean = 0.0, var = 0.0;
        for (double x : w) z += x;
        for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] / z * d[i];
        for (std::size_t i = 0; i < w.size(); ++i) var += w[i] / z * (d[i] - mean) * (d[i] - mean);
        std::vector<double> lw(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) lw[i] = std::log(w[i] / z) + d[i];
        double mx = -std::numeric_limits<double>::infinity(), s = 0.0;
        for (double x : lw) mx = std::max(mx, x);
        for (double x : lw) s += std::exp(x - mx);
        m.mean += p.count * mean;
        m.variance += p.count * var;
        m.log_mgf += p.count * (mx + std::log(s));
    }
    return m;
}

std::optional<std::vector<double>> HaplotypeCCModel::m_step(const UnitDataset& data,
                                                            std::span<const double> anchor,
                                                            const std::vector<bool>& free,
                                                            std::span<const double> start) const {
    auto e = expected_counts(data, anchor);
    std::vector<double> th(start.begin(), start.end());
    auto objective = [&](std::span<const double> t) {
        auto f = frequencies(t);
        double s = 0.0;
        for (int h = 0; h < 4; ++h) s += detail::xlogy(e.a[h], f[0][h]) + detail::xlogy(e.u[h], f[1][h]);
        return s;
    };
    std::vector<int> act;
    for (int k = 0; k < 6; ++k)
        if (free[k]) act.push_back(k);
    if (act.empty()) return th;
    double na = 0.0, nu = 0.0;
    for (int h = 0; h < 4; ++h) na += e.a[h], nu += e.u[h];
    double fx = objective(th);
    for (int it = 0; it < 200; ++it) {
        auto f = frequencies(th);
        Eigen::VectorXd g(6);
        Eigen::Matrix3d ha, hu;
        for (int k = 0; k < 3; ++k) {
            int h = others_[k];
            double ga = e.a[h] - na * f[0][h], gu = e.u[h] - nu * f[1][h];
            g[k] = ga;
            g[3 + k] = ga + gu;
            for (int l = 0; l < 3; ++l) {
                int h2 = others_[l];
                ha(k, l) = -na * ((h == h2 ? f[0][h] : 0.0) - f[0][h] * f[0][h2]);
                hu(k, l) = -nu * ((h == h2 ? f[1][h] : 0.0) - f[1][h] * f[1][h2]);
            }
        }
        Eigen::MatrixXd H(6, 6);
        H << ha, ha, ha, ha + hu;
        const int m = static_cast<int>(act.size());
        Eigen::MatrixXd Hs(m, m);
        Eigen::VectorXd gs(m);
        for (int i = 0; i < m; ++i) {
            gs[i] = g[act[i]];
            for (int j = 0; j < m; ++j) Hs(i, j) = H(act[i], act[j]);
        }
        if (gs.norm() < 1e-12 * (1.0 + na + nu)) break;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(-Hs);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        Eigen::VectorXd step = ldlt.solve(gs);
        bool moved = false;
        for (double t = 1.0; t > 1e-8; t *= 0.5) {
            std::vector<double> next = th;
            for (int i = 0; i < m; ++i)
                next[act[i]] = std::clamp(th[act[i]] + t * step[i], -kBound, kBound);
            double fn = objective(next);
            if (fn >= fx) {
                moved = next != th;
                th = next;
                fx = fn;
                break;
            }
        }
        if (!moved || step.lpNorm<Eigen::Infinity>() < 1e-13) break;
    }
    return th;
}

std::vector<double> HaplotypeCCModel::initial_point(const UnitDataset& data) const {
    auto em = haplotype_em(data, HaplotypeGrouping::separate, 200, 1e-8);
    std::array<double, 4> fa, fu;
    for (int h = 0; h < 4; ++h) {
        fa[h] = 0.99 * em.case_freq[h] + 0.0025;
        fu[h] = 0.99 * em.control_freq[h] + 0.0025;
    }
    return from_frequencies(fa, fu);
}

std::vector<std::string> HaplotypeCCModel::check_unit(const json& j, double) const {
    std::vector<std::string> out;
    detail::check_schema(j, "haplotype_cc.unit/1", out);
    if (!j.is_object()) return out;
    if (!detail::need_array(j, "subjects", out)) return out;
    std::size_t i = 0;
    for (auto& s : j["subjects"]) {
        std::string where = "subject " + std::to_string(i++) + ": ";
        if (!s.is_object()) {
            out.push_back(where + "not an object");
            continue;
        }
        if (!s.contains("case") || !s["case"].is_boolean()) out.push_back(where + "\"case\" must be true or false");
        if (s.contains("haplotypes")) {
            auto& h = s["haplotypes"];
            if (!h.is_array() || h.size() != 2) {
                out.push_back(where + "\"haplotypes\" must list two haplotypes");
            } else {
                for (auto& x : h)
                    if (!x.is_string() || (x != "TX" && x != "T0" && x != "CX" && x != "C0"))
                        out.push_back(where + "haplotypes must be TX, T0, CX or C0");
            }
            continue;
        }
        int g[2] = {-1, -1};
        const char* keys[2] = {"snp1", "snp2"};
        for (int k = 0; k < 2; ++k) {
            if (!s.contains(keys[k]) || s[keys[k]].is_null()) continue;
            auto& v = s[keys[k]];
            if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 2)
                out.push_back(where + keys[k] + " must be 0, 1, 2 or null");
            else
                g[k] = v.get<int>();
        }
        bool ambiguous = g[0] == 1 && g[1] == 1;
        if (s.contains("phase_ambiguous") && (!s["phase_ambiguous"].is_boolean() || s["phase_ambiguous"] != ambiguous))
            out.push_back(where + "phase_ambiguous must be true exactly for doubly heterozygous subjects");
    }
    return out;
}

UnitPtr HaplotypeCCModel::parse_unit(const json& j, double w) const {
    detail::throw_if_any(check_unit(j, w), "haplotype_cc unit");
    auto u = std::make_shared<HaplotypeUnit>();
    for (auto& s : j["subjects"]) {
        HaplotypeSubject sub;
        sub.is_case = s["case"].get<bool>();
        if (s.contains("haplotypes")) {
            sub.phased = {haplotype_from_name(s["haplotypes"][0]), haplotype_from_name(s["haplotypes"][1])};
            sub.snp1 = kT[sub.phased[0]] + kT[sub.phased[1]];
            sub.snp2 = kX[sub.phased[0]] + kX[sub.phased[1]];
        } else {
            if (s.contains("snp1") && !s["snp1"].is_null()) sub.snp1 = s["snp1"].get<int>();
            if (s.contains("snp2") && !s["snp2"].is_null()) sub.snp2 = s["snp2"].get<int>();
        }
        u->subjects.push_back(sub);
    }
    u->rebuild_patterns();
    return u;
}

json HaplotypeCCModel::unit_to_json(const ObservedUnit& unit) const {
    auto& u = unit_as<HaplotypeUnit>(unit, kTag);
    json subjects = json::array();
    for (auto& s : u.subjects) {
        json o = {{"case", s.is_case}};
        if (s.phased[0] >= 0) {
            o["haplotypes"] = {kNames[s.phased[0]], kNames[s.phased[1]]};
        } else {
            o["snp1"] = s.snp1 < 0 ? json(nullptr) : json(s.snp1);
            o["snp2"] = s.snp2 < 0 ? json(nullptr) : json(s.snp2);
            if (s.phase_ambiguous()) o["phase_ambiguous"] = true;
        }
        subjects.push_back(o);
    }
    return {{"schema", "haplotype_cc.unit/1"}, {"subjects", subjects}};
}

HaplotypeEmResult haplotype_em(const UnitDataset& data, HaplotypeGrouping grouping, int max_iter,
                               double tol) {
    std::vector<const HaplotypeSubject*> subs;
    for (auto& up : data.units)
        for (auto& s : unit_as<HaplotypeUnit>(*up, kTag).subjects) subs.push_back(&s);
    std::vector<std::uint16_t> masks;
    for (auto* s : subs) masks.push_back(s->compatible_mask());
    const bool sep = grouping == HaplotypeGrouping::separate;
    auto group = [&](std::size_t i) { return sep && !subs[i]->is_case ? 1 : 0; };

    HaplotypeEmResult r;
    std::array<std::array<double, 4>, 2> f;
    for (auto& g : f) g.fill(0.25);
    r.subject_counts.assign(subs.size(), {});
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        std::array<std::array<double, 4>, 2> cnt{};
        double ll = 0.0;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            auto& h = f[group(i)];
            double z = 0.0;
            for_pairs(masks[i], [&](int a, int b) { z += h[a] * h[b]; });
            ll += std::log(z);
            auto& sc = r.subject_counts[i];
            sc.fill(0.0);
            for_pairs(masks[i], [&](int a, int b) {
                double w = h[a] * h[b] / z;
                sc[a] += w;
                sc[b] += w;
            });
            for (int k = 0; k < 4; ++k) cnt[group(i)][k] += sc[k];
        }
        r.loglik = ll;
        r.iterations = it;
        if (ll - prev < tol) {
            r.converged = true;
            break;
        }
        prev = ll;
        for (int g = 0; g < 2; ++g) {
            double tot = cnt[g][0] + cnt[g][1] + cnt[g][2] + cnt[g][3];
            if (tot > 0)
                for (int k = 0; k < 4; ++k) f[g][k] = cnt[g][k] / tot;
        }
    }
    r.case_freq = f[0];
    r.control_freq = sep ? f[1] : f[0];
    // a group without any subject whose unordered pair is determined cannot pin down phase
    for (int g = 0; g < (sep ? 2 : 1); ++g) {
        bool any = false, resolved = false;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (group(i) != g) continue;
            any = true;
            int distinct = 0;
            for_pairs(masks[i], [&](int a, int b) { distinct += a <= b ? 1 : 0; });
            resolved = resolved || distinct == 1;
        }
        if (any && !resolved) r.non_identifiable = true;
    }
    return r;
}

double allele_correlation(const std::array<double, 4>& h) {
    double pt = h[TX] + h[T0], px = h[TX] + h[CX];
    double d = h[TX] - pt * px;
    return d / std::sqrt(pt * (1 - pt) * px * (1 - px));
}

HaplotypeUnit simulate_two_snp(const TwoSnpSimulation& cfg, Rng& rng) {
    std::array<double, 4> case_f;
    double z = 0.0;
    for (int h = 0; h < 4; ++h) z += (case_f[h] = cfg.control_freq[h] * cfg.relative_risk[h]);
    for (auto& v : case_f) v /= z;
    std::discrete_distribution<int> draw_case(case_f.begin(), case_f.end());
    std::discrete_distribution<int> draw_control(cfg.control_freq.begin(), cfg.control_freq.end());
    std::bernoulli_distribution miss(cfg.missing_rate);
    HaplotypeUnit u;
    auto add = [&](bool is_case) {
        auto& d = is_case ? draw_case : draw_control;
        int a = d(rng), b = d(rng);
        HaplotypeSubject s;
        s.is_case = is_case;
        s.snp1 = kT[a] + kT[b];
        s.snp2 = kX[a] + kX[b];
        bool m1, m2;
        do {
            m1 = miss(rng);
            m2 = miss(rng);
        } while (m1 && m2);
        if (m1) s.snp1 = -1;
        if (m2) s.snp2 = -1;
        u.subjects.push_back(s);
    };
    for (int i = 0; i < cfg.n_cases; ++i) add(true);
    for (int i = 0; i < cfg.n_controls; ++i) add(false);
    u.rebuild_patterns();
    return u;
}

}  // namespace missinfo
