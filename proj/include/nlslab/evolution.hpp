#pragma once

// Time integration in both pictures.
//
//   flat:      i dU/ds + d^2U/dy^2 = |U|^{p-1} U                 (periodic box)
//   harmonic:  i du/dt - H u = cos^{(p-5)/2}(2t) |u|^{p-1} u      (Hermite modes)
//
// Both solvers use Strang splitting: half a linear step (exact), a pointwise
// nonlinear phase, half a linear step.  The harmonic solver is a collocation
// scheme on N modes and the N Gauss-Hermite nodes, where the node-value map
// is orthogonal, so every substep conserves the discrete mass.

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/random_field.hpp"
#include "nlslab/spectral_basis.hpp"

namespace nlslab {

struct SolverConfig {
    double p = 3.0;
    double dt = 1e-3;
    double theta = 0.1;                                   ///< max nonlinear phase per substep
    double t_cap = std::numbers::pi / 4.0 - 0.05;
    PeriodicBox box{40.0, 4096};
    int record_every = 1;
    bool nonlinear = true;
    bool store_states = true;

    void validate() const;
};

/// cos^{(p-5)/2}(2t)
double nonlinearity_weight(double t, double p);

struct Diagnostics {
    double mass = 0.0;            ///< ||u||_{L^2}^2
    double energy = 0.0;
    double potential = 0.0;       ///< ||u||_{L^{p+1}}^{p+1}
    double sup_norm = 0.0;
    double boundary_mass = 0.0;   ///< flat runs only
};

template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;              ///< empty unless store_states
    std::vector<Diagnostics> diagnostics;
    State final_state;
    long substeps = 0;
    int boundary_warnings = 0;
};

using HarmonicTrajectory = Trajectory<SpectralState>;
using FlatTrajectory = Trajectory<GridState>;

// ---------------------------------------------------------------------------

/// c_n -> c_n exp(-i (2n+1) t)
SpectralState linear_harmonic(const SpectralState& state, double t);

/// Fourier multiplier exp(-i k^2 s) on the box.
GridState linear_free(const GridState& U, double s);

/// The N x N collocation basis the harmonic solver runs on.
BasisTable collocation_basis(int modes);

HarmonicTrajectory solve_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg);
HarmonicTrajectory solve_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg,
                                  const BasisTable& collocation);

/// Final state only; nothing is recorded.
SpectralState evolve_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg,
                              const BasisTable& collocation);

FlatTrajectory solve_flat(const GridState& U0, double s0, double s1, const SolverConfig& cfg);

// ---------------------------------------------------------------------------

struct EnergyValue {
    double value = 0.0;
    double kinetic = 0.0;     ///< 1/2 ||sqrt(H) u||^2
    double potential = 0.0;   ///< ||u||_{p+1}^{p+1}
    bool resolved = true;
};

/// 1/2 ||sqrt(H) u||^2 + cos^{(p-5)/2}(2t)/(p+1) ||u||_{p+1}^{p+1}
EnergyValue energy(double t, const SpectralState& u, double p, const BasisTable& basis);

/// 1/2 ||U_y||^2 + 1/(p+1) ||U||_{p+1}^{p+1}, conserved by the flat flow.
double flat_energy(const GridState& U, double p);

/// (5-p) sin(2t) cos^{(p-7)/2}(2t)/(p+1) * potential
double energy_rate(double t, double p, double potential);

struct EnergyDerivativeReport {
    std::vector<double> times;
    std::vector<double> residuals;
    double max_residual = 0.0;
};

/// Central differences of the recorded energy against energy_rate.
EnergyDerivativeReport energy_derivative_check(const HarmonicTrajectory& traj, double p);

// ---------------------------------------------------------------------------
// Experiments

struct FitBand {
    double value = 0.0;
    double stderr_ = 0.0;
};

struct DecayConfig {
    CoefficientLaw law = CoefficientLaw::mu0();
    double p = 5.0;
    std::vector<double> s_grid;
    int samples = 8;
    int modes = 64;
    SampleStream stream{};
    SolverConfig solver{};
};

struct DecayReport {
    std::vector<double> s_grid;
    std::vector<std::vector<double>> curves;          ///< ||U(s)||_{p+1} per sample
    std::vector<std::vector<double>> linear_curves;   ///< same data, free flow
    FitBand exponent;                                 ///< mean of per-sample fits
    FitBand linear_exponent;
    double pooled_exponent = 0.0;                     ///< fit of the mean log-curve
    double log_power = 0.0;                           ///< coefficient of log(1 + log<s>)
    double target_exponent = 0.0;                     ///< -(1/2 - 1/(p+1))
    int failed_samples = 0;
    std::vector<std::string> failures;
};

/// -(1/2 - 1/(p+1))
double decay_target_exponent(double p);

DecayReport decay_experiment(const DecayConfig& cfg);

struct ScatterConfig {
    double p = 5.0;
    std::vector<double> s_grid;
    SolverConfig solver{};
};

struct ScatterReport {
    std::vector<double> s_grid;
    std::vector<double> cauchy_residuals;   ///< ||V(s_j) - V(s_last)||_{L^2}
    std::vector<double> v_norms;            ///< ||V(s_j)||_{L^2}
    SpectralState w_plus;                   ///< V(s_last) in Hermite coefficients
    double eta_fit = 0.0;
    bool scattering_expected = true;        ///< false for p <= 3
    bool tail_monotone = false;
};

/// V(s) = e^{-is d^2} U(s) - U0.  Under the lens this equals e^{itH} u(t) - u0,
/// so the whole computation stays in the Hermite basis.
ScatterReport scattering_experiment(const SpectralState& u0, const ScatterConfig& cfg);

/// Samples W+ on a periodic box.
GridState w_plus_on_box(const ScatterReport& report, const PeriodicBox& box);

struct DispersionReport {
    std::vector<double> s_grid;
    std::vector<double> ratio;   ///< ||e^{is d^2} phi||_{p+1} |s|^{1/2-1/(p+1)} / ||phi||_{(p+1)'}
    double max_boundary_mass = 0.0;
};

/// Box states are propagated on the box; Hermite-node states through the lens.
DispersionReport dispersion_check(const GridState& phi, double p, const std::vector<double>& s_grid,
                                  const BasisTable* basis = nullptr);

struct Cutoff {
    double plateau = 2.0;    ///< chi = 1 on |y| <= plateau
    double transition = 1.0; ///< chi = 0 on |y| >= plateau + transition

    double operator()(double y) const;
};

struct LocalizedConfig {
    double sigma = 0.0;
    Cutoff chi{};
    std::vector<double> s_grid;
    PeriodicBox window{8.0, 512};
};

struct LocalizedReport {
    std::vector<double> s_grid;
    std::vector<double> localized;   ///< ||chi * e^{is d^2} u||_{H^sigma}
    std::vector<double> global_l2;   ///< ||e^{is d^2} u||_{L^2}
    double fitted_slope = 0.0;
    double reference_slope = -0.25;
};

LocalizedReport localized_decay_experiment(const SpectralState& u, const LocalizedConfig& cfg);

struct NormGrowthConfig {
    CoefficientLaw law = CoefficientLaw::mu0();
    double p = 5.0;
    double T_max = 100.0;
    double sigma = -0.1;   ///< tracked norm: H^{sigma} of the harmonic-picture state
    int points = 16;
    int samples = 4;
    int modes = 32;
    SampleStream stream{};
    SolverConfig solver{};
};

struct NormGrowthReport {
    std::vector<double> s_grid;
    std::vector<std::vector<double>> curves;
    std::vector<double> median_curve;
    double slope = 0.0;          ///< fit of median norm^2 against ln(s) + 1
    double intercept = 0.0;
    double r_squared = 0.0;
    int failed_samples = 0;
};

NormGrowthReport norm_growth_experiment(const NormGrowthConfig& cfg);

} // namespace nlslab
