#pragma once

// Diagonal Gaussian laws on Hermite coefficient space.
//
// A law is a positive sequence alpha_n; a sample is c_n = alpha_n g_n with
// g_n i.i.d. complex standard normals (E|g_n|^2 = 1).  The reference law mu0
// has alpha_n = (2n+1)^{-1/2}, i.e. the Gibbs measure of the linear
// harmonic-oscillator flow.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/rng.hpp"
#include "nlslab/spectral_basis.hpp"

namespace nlslab {

class CoefficientLaw {
public:
    enum class Kind : std::uint64_t { mu0 = 0, shifted = 1, scaled = 2, custom = 3 };

    static CoefficientLaw mu0() { return CoefficientLaw(Kind::mu0); }
    /// alpha_n = (2n+3)^{-1/2}
    static CoefficientLaw shifted() { return CoefficientLaw(Kind::shifted); }
    /// alpha_n = c (2n+1)^{-1/2}
    static CoefficientLaw scaled(double c);
    /// alpha_n = table[n]; requesting n beyond the table is an error.
    static CoefficientLaw custom(std::vector<double> table);

    double alpha(int n) const;
    Kind kind() const { return kind_; }
    std::string name() const;

private:
    explicit CoefficientLaw(Kind k) : kind_(k) {}
    Kind kind_;
    double scale_ = 1.0;
    std::vector<double> table_;
};

/// Law by name: "mu0", "shifted", "scaled:<c>".
CoefficientLaw parse_law(const std::string& spec);

SpectralState sample(const CoefficientLaw& law, int modes, const SampleStream& stream);

/// Samples stream.index, stream.index + 1, ..., stream.index + count - 1.
std::vector<SpectralState> sample_ensemble(const CoefficientLaw& law, int modes, int count, const SampleStream& stream);

// ---------------------------------------------------------------------------

enum class Equivalence { equivalent, singular, inconclusive };
std::string to_string(Equivalence v);

struct EquivalenceReport {
    std::vector<double> ratio_sums;   ///< partial sums of (a_n/b_n - 1)^2
    std::vector<double> log_sums;     ///< partial sums of (log a_n - log b_n)^2
    double tail_slope = 0.0;          ///< fitted d log(increment) / d log(n+1), tail half
    Equivalence verdict = Equivalence::inconclusive;
};

/// Hajek-Feldman type criterion for two diagonal Gaussian laws.
EquivalenceReport equivalence_diagnostic(const CoefficientLaw& a, const CoefficientLaw& b, int terms);

// ---------------------------------------------------------------------------

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

struct RotationReport {
    double statistic = 0.0;
    double p_value = 1.0;
    KsResult real_parts;
    KsResult moduli;
};

/// Compares (g_n) with (e^{-i(2n+1)t} g_n) drawn from independent streams.
/// With `modulus_control`, g_n is replaced by |g_n| in both ensembles, which
/// breaks rotation invariance and must be detected.
RotationReport rotation_invariance_test(double t, int modes, int samples, const SampleStream& stream,
                                        bool modulus_control = false);

// ---------------------------------------------------------------------------

struct TailPoint {
    double R = 0.0;
    double tail = 0.0;       ///< empirical P(sup_t ||e^{-itH}u||_{W^{sigma,inf}} >= R)
    double stderr_ = 0.0;
    bool censored = false;   ///< zero exceedances
};

struct TailReport {
    std::vector<TailPoint> points;
    std::vector<double> sup_norms;   ///< per sample
    double slope = 0.0;              ///< least squares d log(tail) / d R^2
    double intercept = 0.0;
    double median = 0.0;
    int fitted_points = 0;
};

struct TailConfig {
    double sigma = 0.1;
    int modes = 64;
    int nodes = 0;          ///< 0: 2 * modes
    int samples = 10000;
    int t_points = 32;
};

TailReport smoothing_tail_experiment(const TailConfig& cfg, const std::vector<double>& R_grid, const SampleStream& stream);

/// sup over the t-grid of ||H^{sigma/2} e^{-itH} u||_{L^inf(nodes)}.
double sup_smoothed_norm(const SpectralState& u, const BasisTable& basis, double sigma, int t_points);

// ---------------------------------------------------------------------------
// Binary ensemble records, little-endian:
//   header: u64 modes, u64 law id, u64 seed
//   blocks: u64 index, then modes x (f64 re, f64 im)

struct EnsembleHeader {
    std::uint64_t modes = 0;
    std::uint64_t law_id = 0;
    std::uint64_t seed = 0;
};

struct EnsembleRecord {
    std::uint64_t index = 0;
    SpectralState state;
};

void write_ensemble_header(std::ostream& out, const EnsembleHeader& header);
void write_ensemble_record(std::ostream& out, const EnsembleRecord& record);
EnsembleHeader read_ensemble_header(std::istream& in);
std::optional<EnsembleRecord> read_ensemble_record(std::istream& in, const EnsembleHeader& header);

} // namespace nlslab
