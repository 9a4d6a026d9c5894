#pragma once

#include "missinfo/model_api.hpp"

#include <array>
#include <cstdint>

namespace missinfo {

// Two biallelic markers: SNP1 alleles T/C, SNP2 alleles X/0.
// Haplotype index: 0 = TX, 1 = T0, 2 = CX, 3 = C0.
enum Haplotype : int { TX = 0, T0 = 1, CX = 2, C0 = 3 };
const char* haplotype_name(int h);
int haplotype_from_name(const std::string& s);

struct HaplotypeSubject {
    bool is_case = false;
    int snp1 = -1;  // copies of T, -1 when missing
    int snp2 = -1;  // copies of X, -1 when missing
    std::array<int, 2> phased{-1, -1};  // set when the haplotypes are known

    bool phase_ambiguous() const { return phased[0] < 0 && snp1 == 1 && snp2 == 1; }
    // ordered haplotype pairs (a, b) compatible with the record, bit 4a + b
    std::uint16_t compatible_mask() const;
};

struct HaplotypeUnit : ObservedUnit {
    std::vector<HaplotypeSubject> subjects;

    struct Pattern {
        bool is_case;
        std::uint16_t mask;
        double count;
    };
    std::vector<Pattern> patterns;  // subjects collapsed by (group, mask)
    void rebuild_patterns();
};

struct HaplotypeCompleted : CompletedUnit {
    std::array<double, 4> case_counts{};
    std::array<double, 4> control_counts{};
};

// Case and control haplotype frequencies under a multiplicative model:
// control h_k ∝ exp(eta_k), case h_k ∝ exp(eta_k + beta_k), with beta and eta
// zero for the reference haplotype. The interest is beta of the tested
// haplotype against the reference; the other betas and all etas are nuisance.
class HaplotypeCCModel : public IncompleteModel {
public:
    HaplotypeCCModel(int interest = TX, int reference = C0);

    std::string tag() const override { return "haplotype_cc"; }
    const ParamLayout& layout() const override { return layout_; }
    int interest_haplotype() const { return interest_; }
    int reference_haplotype() const { return reference_; }

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

    std::vector<std::string> check_unit(const json&, double) const override;
    UnitPtr parse_unit(const json&, double) const override;
    json unit_to_json(const ObservedUnit&) const override;

    // Frequencies (case, control) implied by theta.
    std::array<std::array<double, 4>, 2> frequencies(std::span<const double> theta) const;
    std::vector<double> from_frequencies(const std::array<double, 4>& case_freq,
                                         const std::array<double, 4>& control_freq) const;

private:
    struct Expected {
        std::array<double, 4> a{}, u{};
    };
    Expected expected_counts(const UnitDataset& data, std::span<const double> theta) const;
    Expected expected_counts(const HaplotypeUnit& u, std::span<const double> theta) const;

    int interest_, reference_;
    std::array<int, 3> others_;  // non-reference haplotypes in index order
    ParamLayout layout_;
};

enum class HaplotypeGrouping { joint, separate };

struct HaplotypeEmResult {
    std::array<double, 4> case_freq{}, control_freq{};
    std::vector<std::array<double, 4>> subject_counts;  // expected haplotype counts per subject
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    bool non_identifiable = false;
};

// Frequency EM under Hardy–Weinberg with either one frequency vector for all
// subjects (joint) or one per group (separate).
HaplotypeEmResult haplotype_em(const UnitDataset& data, HaplotypeGrouping grouping,
                               int max_iter = 10000, double tol = 1e-12);

struct TwoSnpSimulation {
    int n_cases = 1000;
    int n_controls = 1000;
    // control haplotype frequencies (TX, T0, CX, C0); the defaults give a T–X
    // allele correlation of about 0.85
    std::array<double, 4> control_freq{0.2685, 0.0315, 0.0315, 0.6685};
    std::array<double, 4> relative_risk{1.5, 1.5, 1.0, 1.0};
    double missing_rate = 0.035;  // per genotype; every subject keeps at least one
};

double allele_correlation(const std::array<double, 4>& freq);
HaplotypeUnit simulate_two_snp(const TwoSnpSimulation& cfg, Rng& rng);

}  // namespace missinfo
