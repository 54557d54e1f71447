#pragma once

// The weighted measures nu_t on the N-mode truncation,
//
//   d nu_t = exp(-alpha(t, u)) d mu0,   alpha(t, u) = cos^{(p-5)/2}(2t)/(p+1) ||u||_{p+1}^{p+1},
//
// their Monte Carlo estimation, and the monotonicity inequality
//
//   nu_0(Phi(t,0)^{-1} A) <= nu_t(A)^{cos(2t)^{(5-p)/2}}   (1 <= p <= 5)
//   nu_0(Phi(t,0)^{-1} A) <= nu_t(A)                         (p >= 5).
//
// Lp norms are taken on the collocation nodes of the Galerkin flow, so the
// finite-dimensional energy and the solver agree.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/rng.hpp"
#include "nlslab/spectral_basis.hpp"

namespace nlslab {

struct CoefficientBounds {
    double re_lo = -std::numeric_limits<double>::infinity();
    double re_hi = std::numeric_limits<double>::infinity();
    double im_lo = -std::numeric_limits<double>::infinity();
    double im_hi = std::numeric_limits<double>::infinity();
    double phase = 0.0;   ///< the box constrains exp(i phase) c_n
};

class EventPredicate {
public:
    enum class Kind { lp_ball, sobolev_ball, coeff_box };

    /// ||u||_{L^q} <= R (q = infinity allowed); R = infinity is the whole space.
    static EventPredicate lp_ball(double q, double R);
    /// ||u||_{H^sigma} <= R
    static EventPredicate sobolev_ball(double sigma, double R);
    static EventPredicate coeff_box(std::vector<CoefficientBounds> bounds);

    bool contains(const SpectralState& u, const BasisTable& basis) const;

    /// The event Phi^{-1} A for the linear flow Phi = e^{-itH} (coefficient boxes only).
    EventPredicate rotated(double t) const;

    Kind kind() const { return kind_; }
    double radius() const { return radius_; }
    double exponent() const { return exponent_; }
    std::string describe() const;

private:
    Kind kind_ = Kind::lp_ball;
    double exponent_ = 2.0;
    double radius_ = std::numeric_limits<double>::infinity();
    std::vector<CoefficientBounds> bounds_;
};

struct WeightedEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long samples = 0;
    std::uint64_t seed = 0;
    bool censored = false;     ///< no sample hit the event
    long failed = 0;           ///< solver failures (pullback only)
    bool flagged = false;      ///< more than 1% failures
};

/// alpha(t, u) on the given basis' nodes.
double nu_exponent(double t, const SpectralState& u, double p, const BasisTable& basis);

/// exp(-alpha(t, u)) in (0, 1].
double nu_weight(double t, const SpectralState& u, double p, const BasisTable& basis);

struct EnsembleSpec {
    int modes = 8;
    int samples = 10000;
    SampleStream stream{};
};

/// nu_t(A) = E_mu0[1_A(u) exp(-alpha(t, u))]
WeightedEstimate estimate_event(double t, const EventPredicate& A, double p, const EnsembleSpec& ens);

/// nu_0(Phi(t,0)^{-1} A) = E_mu0[1_A(Phi(t,0) u) exp(-alpha(0, u))]
WeightedEstimate estimate_pullback(double t, const EventPredicate& A, double p, const EnsembleSpec& ens,
                                   const SolverConfig& solver);

/// Median of ||u||_{L^q} over the mu0 ensemble: the default event radius.
double median_radius(double q, const EnsembleSpec& ens);

/// x^{cos(2t)^{(5-p)/2}} for 1 <= p <= 5, x for p >= 5.
double monotonicity_bound(double p, double t, double x);

/// cos(2t)^{(5-p)/2} for p < 5, 1 otherwise.
double monotonicity_exponent(double p, double t);

struct HolderEnvelope {
    double k_star = 1.0;
    double value = 0.0;
};

/// min over k >= 1 of (k/e) F^{1 - 1/k}.
HolderEnvelope holder_envelope(double F);

enum class Verdict { holds, violated_within_noise, violated, censored };
std::string to_string(Verdict v);

struct MonotonicityReport {
    double p = 0.0;
    double t = 0.0;
    WeightedEstimate lhs;       ///< nu_0(Phi^{-1} A)
    WeightedEstimate event;     ///< nu_t(A)
    double exponent = 1.0;
    double rhs = 0.0;
    double rhs_stderr = 0.0;
    double combined_stderr = 0.0;
    Verdict verdict = Verdict::censored;
    std::string event_description;
};

MonotonicityReport monotonicity_experiment(double p, double t, const EventPredicate& A, const EnsembleSpec& ens,
                                           const SolverConfig& solver);

// ---------------------------------------------------------------------------
// Finite measures on m atoms

struct DiscreteMeasure {
    std::vector<double> atoms;

    int size() const { return static_cast<int>(atoms.size()); }
    double total() const;
    void validate() const;
};

struct WeakTail {
    double p = 0.0;
    double constant = 0.0;   ///< smallest C' with nu(f >= lambda) <= C' lambda^{-p}, lambda in {f_i}
};

struct RadonNikodymReport {
    std::vector<double> density;
    double sup = 0.0;
    std::vector<WeakTail> weak;
};

/// f_i = mu_i / nu_i (0 where both vanish).
RadonNikodymReport rn_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const std::vector<double>& weak_exponents = {});

struct PowerScanReport {
    double alpha = 1.0;
    double best_C = 0.0;              ///< max over nonempty A of mu(A)/nu(A)^alpha (inf if unbounded)
    std::vector<int> witness;         ///< atoms of a maximizing subset
};

/// Exhaustive 2^m scan, m <= 24.
PowerScanReport power_inequality_scan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha);

// ---------------------------------------------------------------------------

struct BourgainBudget {
    double tau = 0.0;
    double T = 0.0;
    std::int64_t steps = 0;          ///< 2 floor(T / tau) + 1
    double union_bound = 0.0;        ///< steps * C e^{-cR}
    double target = 0.0;             ///< C e^{-cR/2}
    double ratio = 0.0;              ///< union_bound / target
    double norm_level = 0.0;         ///< (R + 1)^{1/2}
    bool degenerate = false;         ///< tau > T
    bool saturated = false;          ///< step count beyond int64; ratio from the real-valued count
};

BourgainBudget bourgain_budget(double kappa, double c, double C, double R);

/// C (ln|t| + 1)^{1/2}
double bourgain_growth(double C, double t);

} // namespace nlslab
