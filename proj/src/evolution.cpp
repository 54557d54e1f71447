#include "nlslab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlslab/errors.hpp"
#include "nlslab/lens.hpp"
#include "nlslab/parallel.hpp"
#include "nlslab/periodic_box.hpp"
#include "nlslab/stats.hpp"

namespace nlslab {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;
constexpr double kBoundaryWarn = 1e-4;
constexpr double kBoundaryFail = 1e-2;

// |u|^{p-1} from |u|^2, with exact powers for odd integer p.
double modulus_power(double abs2, double p) {
    if (p == 3.0) return abs2;
    if (p == 5.0) return abs2 * abs2;
    if (p == 7.0) return abs2 * abs2 * abs2;
    if (abs2 == 0.0) return 0.0;
    return std::pow(abs2, 0.5 * (p - 1.0));
}

double abs_pow(double abs2, double q) {
    if (q == 2.0) return abs2;
    if (q == 4.0) return abs2 * abs2;
    if (q == 6.0) return abs2 * abs2 * abs2;
    if (q == 8.0) return abs2 * abs2 * abs2 * abs2;
    if (abs2 == 0.0) return 0.0;
    return std::pow(abs2, 0.5 * q);
}

int step_count(double span, double dt) {
    const double raw = std::abs(span) / dt;
    return std::max(1, static_cast<int>(std::ceil(raw - 1e-9)));
}

int substep_count(const SolverConfig& cfg, double weight, double sup, double h) {
    if (!cfg.nonlinear) return 1;
    const double phase = weight * std::pow(sup, cfg.p - 1.0) * std::abs(h);
    if (!std::isfinite(phase)) throw NumericalFailure("solver: nonlinear phase is not finite");
    return std::max(1, static_cast<int>(std::ceil(phase / cfg.theta)));
}

[[noreturn]] void blow_up(const char* solver, double time) {
    std::ostringstream msg;
    msg << solver << ": non-finite state at time " << time;
    throw NumericalFailure(msg.str());
}

// ---------------------------------------------------------------------------
// Harmonic picture

class HarmonicStepper {
public:
    HarmonicStepper(const BasisTable& basis, const SolverConfig& cfg, const SpectralState& u0)
        : basis_(basis), cfg_(cfg), weights_(basis.rule.scaled_weights.data(), basis.node_count()),
          re_(u0.coeffs.real()), im_(u0.coeffs.imag()) {}

    // Advances from t by h (either sign); returns the substep count.
    int step(double t, double h) {
        const double weight = nonlinearity_weight(t + 0.5 * h, cfg_.p);
        const int m = substep_count(cfg_, weight, sup_norm(), h);
        const double d = h / m;
        rotate(0.5 * d);
        for (int k = 0; k < m; ++k) {
            if (cfg_.nonlinear) nonlinear(nonlinearity_weight(t + (k + 0.5) * d, cfg_.p), d);
            rotate(k + 1 < m ? d : 0.5 * d);
        }
        return m;
    }

    double sup_norm() const {
        const Eigen::VectorXd ur = basis_.values.transpose() * re_;
        const Eigen::VectorXd ui = basis_.values.transpose() * im_;
        return (ur.array().square() + ui.array().square()).sqrt().maxCoeff();
    }

    SpectralState state() const {
        SpectralState s = SpectralState::zero(basis_.modes);
        s.coeffs.real() = re_;
        s.coeffs.imag() = im_;
        return s;
    }

    bool finite() const { return re_.allFinite() && im_.allFinite(); }

private:
    void rotate(double h) {
        for (int n = 0; n < basis_.modes; ++n) {
            const cplx z = cplx(re_[n], im_[n]) * std::polar(1.0, -(2.0 * n + 1.0) * h);
            re_[n] = z.real();
            im_[n] = z.imag();
        }
    }

    void nonlinear(double weight, double d) {
        Eigen::VectorXd ur = basis_.values.transpose() * re_;
        Eigen::VectorXd ui = basis_.values.transpose() * im_;
        for (Eigen::Index j = 0; j < ur.size(); ++j) {
            const double a2 = ur[j] * ur[j] + ui[j] * ui[j];
            const cplx z = cplx(ur[j], ui[j]) * unit_phase(-weight * modulus_power(a2, cfg_.p) * d);
            ur[j] = z.real() * weights_[j];
            ui[j] = z.imag() * weights_[j];
        }
        re_ = basis_.values * ur;
        im_ = basis_.values * ui;
    }

    const BasisTable& basis_;
    const SolverConfig& cfg_;
    Eigen::Map<const Eigen::VectorXd> weights_;
    Eigen::VectorXd re_, im_;
};

void check_harmonic_window(double t0, double t1, const SolverConfig& cfg) {
    if (!(std::abs(t0) < kQuarterPi && std::abs(t1) < kQuarterPi))
        throw InvalidArgument("solve_harmonic: times must satisfy |t| < pi/4");
    if (std::max(std::abs(t0), std::abs(t1)) > cfg.t_cap * (1.0 + 1e-12))
        throw InvalidArgument("solve_harmonic: time window exceeds t_cap");
}

Diagnostics harmonic_diagnostics(double t, const SpectralState& u, const SolverConfig& cfg, const BasisTable& basis) {
    Diagnostics d;
    const GridState g = synthesize(u, basis);
    d.mass = u.coeffs.squaredNorm();
    const EnergyValue e = energy(t, u, cfg.p, basis);
    d.energy = e.value;
    d.potential = e.potential;
    d.sup_norm = lp_norm(g, std::numeric_limits<double>::infinity());
    return d;
}

template <class Record>
HarmonicTrajectory run_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg,
                                const BasisTable& basis, Record record) {
    cfg.validate();
    check_harmonic_window(t0, t1, cfg);
    if (basis.modes != basis.node_count() || u0.modes() != basis.modes)
        throw InvalidArgument("solve_harmonic: state, modes and collocation nodes must agree");
    if (!u0.finite()) throw InvalidArgument("solve_harmonic: initial state is not finite");

    HarmonicTrajectory traj;
    HarmonicStepper stepper(basis, cfg, u0);
    const int steps = t1 == t0 ? 0 : step_count(t1 - t0, cfg.dt);
    const double h = steps ? (t1 - t0) / steps : 0.0;

    auto push = [&](double t) {
        if (!record) return;
        const SpectralState s = stepper.state();
        traj.times.push_back(t);
        traj.diagnostics.push_back(harmonic_diagnostics(t, s, cfg, basis));
        if (cfg.store_states) traj.states.push_back(s);
    };
    push(t0);
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * h;
        traj.substeps += stepper.step(t, h);
        if (!stepper.finite()) blow_up("solve_harmonic", t + h);
        if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) push(k + 1 == steps ? t1 : t + h);
    }
    traj.final_state = stepper.state();
    if (steps == 0) traj.final_state = u0;
    return traj;
}

// ---------------------------------------------------------------------------
// Flat picture

class FlatStepper {
public:
    FlatStepper(const GridState& U0, const SolverConfig& cfg) : cfg_(cfg), box_(U0.box()), values_(U0.values) {
        k2_ = wavenumbers(box_);
        for (double& k : k2_) k *= k;
    }

    int step(double h) {
        const int m = substep_count(cfg_, 1.0, sup_norm(), h);
        const double d = h / m;
        Eigen::VectorXcd spec = fft_forward(values_);
        multiply(spec, 0.5 * d);
        for (int k = 0; k < m; ++k) {
            if (cfg_.nonlinear) {
                values_ = fft_inverse(spec);
                nonlinear(d);
                spec = fft_forward(values_);
            }
            multiply(spec, k + 1 < m ? d : 0.5 * d);
        }
        values_ = fft_inverse(spec);
        return m;
    }

    double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }

    GridState state() const { return GridState{values_, box_}; }

    bool finite() const { return values_.allFinite(); }

private:
    void multiply(Eigen::VectorXcd& spec, double s) const {
        for (Eigen::Index j = 0; j < spec.size(); ++j) spec[j] *= unit_phase(-k2_[j] * s);
    }

    void nonlinear(double d) {
        for (Eigen::Index j = 0; j < values_.size(); ++j)
            values_[j] *= unit_phase(-modulus_power(std::norm(values_[j]), cfg_.p) * d);
    }

    const SolverConfig& cfg_;
    PeriodicBox box_;
    Eigen::VectorXcd values_;
    std::vector<double> k2_;
};

Diagnostics flat_diagnostics(const GridState& U, const SolverConfig& cfg) {
    Diagnostics d;
    d.mass = box_mass(U);
    d.energy = flat_energy(U, cfg.p);
    d.potential = lp_power(U, cfg.p + 1.0);
    d.sup_norm = U.values.size() ? U.values.cwiseAbs().maxCoeff() : 0.0;
    d.boundary_mass = boundary_mass_fraction(U);
    return d;
}

// Tail half of a grid, for asymptotic fits.
std::pair<std::size_t, std::size_t> fit_window(std::size_t n) { return {n / 2, n}; }

void check_increasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw InvalidArgument(std::string(what) + ": empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InvalidArgument(std::string(what) + ": grid must be strictly increasing");
}

} // namespace

// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
    if (!(p > 1.0)) throw InvalidArgument("solver: p must exceed 1");
    if (!(dt > 0.0)) throw InvalidArgument("solver: dt must be positive");
    if (!(theta > 0.0 && theta <= 0.5)) throw InvalidArgument("solver: theta must lie in (0, 0.5]");
    if (!(t_cap > 0.0 && t_cap < kQuarterPi)) throw InvalidArgument("solver: t_cap must lie in (0, pi/4)");
    if (record_every < 1) throw InvalidArgument("solver: record_every must be >= 1");
    if (!(box.half_width > 0.0) || box.points < 2) throw InvalidArgument("solver: invalid box");
}

double nonlinearity_weight(double t, double p) {
    if (p == 5.0) return 1.0;
    return std::pow(std::cos(2.0 * t), 0.5 * (p - 5.0));
}

SpectralState linear_harmonic(const SpectralState& state, double t) {
    SpectralState out = state;
    for (int n = 0; n < out.modes(); ++n) out.coeffs[n] *= unit_phase(-(2.0 * n + 1.0) * t);
    return out;
}

GridState linear_free(const GridState& U, double s) {
    if (!U.on_box()) throw InvalidArgument("linear_free: state must live on a periodic box");
    if (s == 0.0) return U;
    Eigen::VectorXcd spec = fft_forward(U.values);
    const auto k = wavenumbers(U.box());
    for (Eigen::Index j = 0; j < spec.size(); ++j) spec[j] *= unit_phase(-k[j] * k[j] * s);
    return GridState{fft_inverse(spec), U.geometry};
}

BasisTable collocation_basis(int modes) { return build_basis(modes, modes); }

HarmonicTrajectory solve_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg) {
    const BasisTable basis = collocation_basis(u0.modes());
    return solve_harmonic(u0, t0, t1, cfg, basis);
}

HarmonicTrajectory solve_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg,
                                  const BasisTable& collocation) {
    return run_harmonic(u0, t0, t1, cfg, collocation, true);
}

SpectralState evolve_harmonic(const SpectralState& u0, double t0, double t1, const SolverConfig& cfg,
                              const BasisTable& collocation) {
    return run_harmonic(u0, t0, t1, cfg, collocation, false).final_state;
}

FlatTrajectory solve_flat(const GridState& U0, double s0, double s1, const SolverConfig& cfg) {
    cfg.validate();
    if (!U0.on_box()) throw InvalidArgument("solve_flat: state must live on a periodic box");
    if (!U0.finite()) throw InvalidArgument("solve_flat: initial state is not finite");
    if (boundary_mass_fraction(U0) > 1e-8)
        throw InvalidArgument("solve_flat: initial data must keep its mass inside |y| <= L/2");

    FlatTrajectory traj;
    FlatStepper stepper(U0, cfg);
    const int steps = s1 == s0 ? 0 : step_count(s1 - s0, cfg.dt);
    const double h = steps ? (s1 - s0) / steps : 0.0;

    auto push = [&](double s, const GridState& U) {
        traj.times.push_back(s);
        traj.diagnostics.push_back(flat_diagnostics(U, cfg));
        if (cfg.store_states) traj.states.push_back(U);
    };
    push(s0, U0);
    for (int k = 0; k < steps; ++k) {
        traj.substeps += stepper.step(h);
        const double s = k + 1 == steps ? s1 : s0 + (k + 1) * h;
        if (!stepper.finite()) blow_up("solve_flat", s);
        const GridState U = stepper.state();
        const double edge = boundary_mass_fraction(U);
        if (edge > kBoundaryFail) {
            std::ostringstream msg;
            msg << "solve_flat: boundary mass " << edge << " at s = " << s << " exceeds " << kBoundaryFail;
            throw DomainEscape(msg.str(), edge);
        }
        if (edge > kBoundaryWarn) ++traj.boundary_warnings;
        if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) push(s, U);
    }
    traj.final_state = steps ? stepper.state() : U0;
    return traj;
}

// ---------------------------------------------------------------------------

EnergyValue energy(double t, const SpectralState& u, double p, const BasisTable& basis) {
    if (!(std::abs(t) < kQuarterPi)) throw InvalidArgument("energy: |t| must be below pi/4");
    EnergyValue e;
    for (int n = 0; n < u.modes(); ++n) e.kinetic += (2.0 * n + 1.0) * std::norm(u.coeffs[n]);
    e.kinetic *= 0.5;
    const GridState g = synthesize(u, basis);
    const auto& w = basis.rule.scaled_weights;
    for (int j = 0; j < g.size(); ++j) e.potential += w[j] * abs_pow(std::norm(g.values[j]), p + 1.0);
    e.value = e.kinetic + nonlinearity_weight(t, p) / (p + 1.0) * e.potential;
    e.resolved = resolved(u);
    return e;
}

double flat_energy(const GridState& U, double p) {
    const Eigen::VectorXcd spec = fft_forward(U.values);
    const auto k = wavenumbers(U.box());
    double grad = 0.0;
    for (Eigen::Index j = 0; j < spec.size(); ++j) grad += k[j] * k[j] * std::norm(spec[j]);
    grad *= U.box().spacing() / U.box().points;
    return 0.5 * grad + lp_power(U, p + 1.0) / (p + 1.0);
}

double energy_rate(double t, double p, double potential) {
    return (5.0 - p) * std::sin(2.0 * t) * std::pow(std::cos(2.0 * t), 0.5 * (p - 7.0)) / (p + 1.0) * potential;
}

EnergyDerivativeReport energy_derivative_check(const HarmonicTrajectory& traj, double p) {
    const auto& ts = traj.times;
    if (ts.size() < 3 || traj.diagnostics.size() != ts.size())
        throw InvalidArgument("energy_derivative_check: need at least three recorded times");
    const double h0 = ts[1] - ts[0];
    for (std::size_t k = 1; k + 1 < ts.size(); ++k)
        if (std::abs((ts[k + 1] - ts[k]) - h0) > 1e-9 * std::abs(h0) + 1e-15)
            throw InvalidArgument("energy_derivative_check: trajectory must be recorded at every step");
    EnergyDerivativeReport report;
    for (std::size_t k = 1; k + 1 < ts.size(); ++k) {
        const double fd = (traj.diagnostics[k + 1].energy - traj.diagnostics[k - 1].energy) / (ts[k + 1] - ts[k - 1]);
        const double r = std::abs(fd - energy_rate(ts[k], p, traj.diagnostics[k].potential));
        report.times.push_back(ts[k]);
        report.residuals.push_back(r);
        report.max_residual = std::max(report.max_residual, r);
    }
    return report;
}

// ---------------------------------------------------------------------------

double decay_target_exponent(double p) { return -(0.5 - 1.0 / (p + 1.0)); }

DecayReport decay_experiment(const DecayConfig& cfg) {
    check_increasing(cfg.s_grid, "decay_experiment");
    if (cfg.s_grid.front() <= 0.0) throw InvalidArgument("decay_experiment: s grid must be positive");
    if (cfg.samples < 1) throw InvalidArgument("decay_experiment: need at least one sample");
    if (cfg.s_grid.size() < 4) throw InvalidArgument("decay_experiment: need at least four grid points");
    SolverConfig solver = cfg.solver;
    solver.p = cfg.p;
    solver.store_states = false;
    solver.validate();
    std::vector<double> ts;
    for (double s : cfg.s_grid) ts.push_back(harmonic_time(s));
    if (ts.back() > solver.t_cap) throw InvalidArgument("decay_experiment: s grid reaches beyond t_cap");

    const BasisTable basis = collocation_basis(cfg.modes);
    const double q = cfg.p + 1.0;
    DecayReport report;
    report.s_grid = cfg.s_grid;
    report.target_exponent = decay_target_exponent(cfg.p);

    std::vector<std::vector<double>> curves(cfg.samples), linear(cfg.samples);
    std::vector<std::string> errors(cfg.samples);
    parallel_for(cfg.samples, [&](std::size_t j) {
        const SpectralState u0 = sample(cfg.law, cfg.modes, cfg.stream.at(cfg.stream.index + j));
        try {
            SpectralState u = u0;
            double t_prev = 0.0;
            for (double t : ts) {
                u = evolve_harmonic(u, t_prev, t, solver, basis);
                t_prev = t;
                curves[j].push_back(flat_lp_norm(u, basis, t, q));
                linear[j].push_back(flat_lp_norm(linear_harmonic(u0, t), basis, t, q));
            }
        } catch (const std::exception& e) {
            curves[j].clear();
            linear[j].clear();
            errors[j] = e.what();
        }
    });

    const auto [lo, hi] = fit_window(cfg.s_grid.size());
    std::vector<double> xs;
    for (std::size_t k = lo; k < hi; ++k) xs.push_back(0.5 * std::log1p(cfg.s_grid[k] * cfg.s_grid[k]));

    std::vector<double> exps, lin_exps;
    std::vector<double> mean_log(hi - lo, 0.0);
    int ok = 0;
    for (int j = 0; j < cfg.samples; ++j) {
        if (curves[j].empty()) {
            ++report.failed_samples;
            report.failures.push_back(errors[j]);
            continue;
        }
        std::vector<double> ys, ls;
        for (std::size_t k = lo; k < hi; ++k) {
            ys.push_back(std::log(curves[j][k]));
            ls.push_back(std::log(linear[j][k]));
            mean_log[k - lo] += ys.back();
        }
        exps.push_back(least_squares(xs, ys).slope);
        lin_exps.push_back(least_squares(xs, ls).slope);
        report.curves.push_back(curves[j]);
        report.linear_curves.push_back(linear[j]);
        ++ok;
    }
    if (ok == 0) return report;
    const MeanEstimate e = mean_and_stderr(exps);
    const MeanEstimate le = mean_and_stderr(lin_exps);
    report.exponent = {e.mean, e.stderr_};
    report.linear_exponent = {le.mean, le.stderr_};
    for (double& v : mean_log) v /= ok;
    report.pooled_exponent = least_squares(xs, mean_log).slope;

    // log <s>^b (1 + log <s>)^c: free log power
    if (xs.size() >= 3) {
        Eigen::MatrixXd A(xs.size(), 3);
        Eigen::VectorXd y(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = xs[i];
            A(i, 2) = std::log1p(xs[i]);
            y[i] = mean_log[i];
        }
        const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
        report.log_power = coef[2];
    }
    return report;
}

// ---------------------------------------------------------------------------

ScatterReport scattering_experiment(const SpectralState& u0, const ScatterConfig& cfg) {
    check_increasing(cfg.s_grid, "scattering_experiment");
    if (cfg.s_grid.front() < 0.0) throw InvalidArgument("scattering_experiment: s grid must be nonnegative");
    SolverConfig solver = cfg.solver;
    solver.p = cfg.p;
    solver.store_states = false;
    solver.validate();
    const BasisTable basis = collocation_basis(u0.modes());

    ScatterReport report;
    report.s_grid = cfg.s_grid;
    report.scattering_expected = cfg.p > 3.0;
    std::vector<SpectralState> vs;
    SpectralState u = u0;
    double t_prev = 0.0;
    for (double s : cfg.s_grid) {
        const double t = harmonic_time(s);
        u = evolve_harmonic(u, t_prev, t, solver, basis);
        t_prev = t;
        SpectralState v = linear_harmonic(u, -t);
        v.coeffs -= u0.coeffs;
        report.v_norms.push_back(v.coeffs.norm());
        vs.push_back(std::move(v));
    }
    report.w_plus = vs.back();
    for (const auto& v : vs) report.cauchy_residuals.push_back((v.coeffs - report.w_plus.coeffs).norm());

    const auto [lo, hi] = fit_window(vs.size());
    report.tail_monotone = true;
    for (std::size_t k = lo + 1; k < hi; ++k)
        if (!(report.cauchy_residuals[k] < report.cauchy_residuals[k - 1])) report.tail_monotone = false;

    std::vector<double> xs, ys;
    for (std::size_t k = lo; k + 1 < hi; ++k) {
        if (report.cauchy_residuals[k] > 0.0) {
            xs.push_back(0.5 * std::log1p(cfg.s_grid[k] * cfg.s_grid[k]));
            ys.push_back(std::log(report.cauchy_residuals[k]));
        }
    }
    if (xs.size() >= 2) report.eta_fit = -least_squares(xs, ys).slope;
    return report;
}

GridState w_plus_on_box(const ScatterReport& report, const PeriodicBox& box) {
    const auto ys = box.grid();
    return GridState{evaluate(report.w_plus, ys), box};
}

// ---------------------------------------------------------------------------

DispersionReport dispersion_check(const GridState& phi, double p, const std::vector<double>& s_grid,
                                  const BasisTable* basis) {
    for (double s : s_grid)
        if (!(s > 0.0)) throw InvalidArgument("dispersion_check: s grid must be positive");
    const double q = p + 1.0;
    const double q_dual = q / (q - 1.0);
    const double a = 0.5 - 1.0 / q;
    DispersionReport report;
    report.s_grid = s_grid;
    if (phi.on_box()) {
        const double denom = lp_norm(phi, q_dual);
        for (double s : s_grid) {
            const GridState U = linear_free(phi, s);
            report.max_boundary_mass = std::max(report.max_boundary_mass, boundary_mass_fraction(U));
            report.ratio.push_back(lp_norm(U, q) * std::pow(s, a) / denom);
        }
        return report;
    }
    if (!basis) throw InvalidArgument("dispersion_check: Hermite-node data need their basis");
    const SpectralState c = analyze(phi, *basis);
    const double denom = lp_norm(phi, q_dual, basis);
    for (double s : s_grid) {
        const double t = harmonic_time(s);
        // ||U(s)||_q s^a = (sin(2t)/2)^a ||e^{-itH} phi||_q
        const double v = lp_norm(linear_harmonic(c, t), *basis, q);
        report.ratio.push_back(std::pow(0.5 * std::sin(2.0 * t), a) * v / denom);
    }
    return report;
}

// ---------------------------------------------------------------------------

double Cutoff::operator()(double y) const {
    const double r = std::abs(y);
    if (r <= plateau) return 1.0;
    if (r >= plateau + transition) return 0.0;
    auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double x = (plateau + transition - r) / transition;
    return f(x) / (f(x) + f(1.0 - x));
}

LocalizedReport localized_decay_experiment(const SpectralState& u, const LocalizedConfig& cfg) {
    if (cfg.chi.plateau + cfg.chi.transition >= cfg.window.half_width)
        throw InvalidArgument("localized_decay_experiment: cutoff support must fit inside the window");
    for (double s : cfg.s_grid)
        if (s < 0.0) throw InvalidArgument("localized_decay_experiment: s grid must be nonnegative");
    LocalizedReport report;
    report.s_grid = cfg.s_grid;
    for (double s : cfg.s_grid) {
        const double t = harmonic_time(s);
        const SpectralState v = linear_harmonic(u, t);
        GridState U = lens_inverse(v, t, cfg.window);
        for (int j = 0; j < U.size(); ++j) U.values[j] *= cfg.chi(cfg.window.point(j));
        report.localized.push_back(box_sobolev_norm(U, cfg.sigma));
        report.global_l2.push_back(v.coeffs.norm());
    }
    std::vector<double> xs, ys;
    const auto [lo, hi] = fit_window(cfg.s_grid.size());
    for (std::size_t k = lo; k < hi; ++k) {
        if (cfg.s_grid[k] > 0.0 && report.localized[k] > 0.0) {
            xs.push_back(std::log(cfg.s_grid[k]));
            ys.push_back(std::log(report.localized[k]));
        }
    }
    if (xs.size() >= 2) report.fitted_slope = least_squares(xs, ys).slope;
    return report;
}

// ---------------------------------------------------------------------------

NormGrowthReport norm_growth_experiment(const NormGrowthConfig& cfg) {
    if (!(cfg.T_max > 1.0)) throw InvalidArgument("norm_growth_experiment: T_max must exceed 1");
    if (cfg.points < 3) throw InvalidArgument("norm_growth_experiment: need at least three points");
    SolverConfig solver = cfg.solver;
    solver.p = cfg.p;
    solver.store_states = false;
    solver.validate();
    NormGrowthReport report;
    for (int k = 0; k < cfg.points; ++k)
        report.s_grid.push_back(std::exp(std::log(cfg.T_max) * k / (cfg.points - 1)));
    if (harmonic_time(cfg.T_max) > solver.t_cap) throw InvalidArgument("norm_growth_experiment: T_max beyond t_cap");

    const BasisTable basis = collocation_basis(cfg.modes);
    std::vector<std::vector<double>> curves(cfg.samples);
    parallel_for(cfg.samples, [&](std::size_t j) {
        try {
            SpectralState u = sample(cfg.law, cfg.modes, cfg.stream.at(cfg.stream.index + j));
            double t_prev = 0.0;
            for (double s : report.s_grid) {
                const double t = harmonic_time(s);
                u = evolve_harmonic(u, t_prev, t, solver, basis);
                t_prev = t;
                curves[j].push_back(sobolev_norm(u, cfg.sigma));
            }
        } catch (const std::exception&) {
            curves[j].clear();
        }
    });
    for (auto& c : curves) {
        if (c.empty()) {
            ++report.failed_samples;
        } else {
            report.curves.push_back(std::move(c));
        }
    }
    if (report.curves.empty()) return report;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < report.s_grid.size(); ++k) {
        std::vector<double> column;
        for (const auto& c : report.curves) column.push_back(c[k]);
        report.median_curve.push_back(median(column));
        xs.push_back(std::log(report.s_grid[k]) + 1.0);
        ys.push_back(report.median_curve.back() * report.median_curve.back());
    }
    const LinearFit fit = least_squares(xs, ys);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.r_squared = fit.r_squared;
    return report;
}

} // namespace nlslab
