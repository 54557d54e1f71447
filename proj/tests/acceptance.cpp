// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nlslab/classical.hpp"
#include "nlslab/cli.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/lens.hpp"
#include "nlslab/measure_lab.hpp"
#include "nlslab/periodic_box.hpp"
#include "nlslab/random_field.hpp"
#include "nlslab/stats.hpp"

using namespace nlslab;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;

struct Result {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

SolverConfig fixed_step(double p, double dt) {
    SolverConfig c;
    c.p = p;
    c.dt = dt;
    c.theta = 0.5;
    c.store_states = false;
    return c;
}

SpectralState smooth_state(int modes) {
    SpectralState u = SpectralState::zero(modes);
    u.coeffs.head(3) << 1.0, cplx(0.5, 0.2), 0.25;
    return u;
}

Result basis_fidelity() {
    const BasisTable b = build_basis(128, 256);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(b.rule.scaled_weights.data(), 256);
    const Eigen::MatrixXd gram = b.values * w.asDiagonal() * b.values.transpose();
    const double orth = (gram - Eigen::MatrixXd::Identity(128, 128)).cwiseAbs().maxCoeff();
    const SpectralState u = sample(CoefficientLaw::mu0(), 128, {1, 0});
    const double trip = (analyze(synthesize(u, b), b).coeffs - u.coeffs).cwiseAbs().maxCoeff();
    return {orth <= 1e-10 && trip <= 1e-10, fmt("orthonormality %.2e, round trip %.2e", orth, trip)};
}

Result parity() {
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 10; ++k) {
        const SpectralState u = sample(CoefficientLaw::mu0(), 128, {2, k});
        worst = std::max(worst, (linear_harmonic(u, kPi).coeffs + u.coeffs).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, fmt("max |e^{-i pi H}u + u| = %.2e", worst)};
}

Result free_gaussian() {
    const PeriodicBox box{40.0, 4096};
    const GridState U0 = sample_on_box(box, [](double y) { return cplx(std::exp(-0.5 * y * y)); });
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0}) {
        const GridState U = linear_free(U0, s);
        const cplx a(1.0, 2.0 * s);
        for (int j = 0; j < box.points; ++j) {
            const double y = box.point(j);
            worst = std::max(worst, std::abs(U.values[j] - std::pow(a, -0.5) * std::exp(-y * y / (2.0 * a))));
        }
    }
    return {worst <= 1e-8, fmt("max error %.2e", worst)};
}

Result solver_order() {
    const SpectralState u0 = sample(CoefficientLaw::mu0(), 64, {3, 0});
    bool ok = true;
    double drift = 0.0;
    std::string detail;
    for (double p : {3.0, 5.0}) {
        SpectralState f[3];
        for (int k = 0; k < 3; ++k) {
            const HarmonicTrajectory tr = solve_harmonic(u0, 0.0, 0.5, fixed_step(p, 0.01 / (1 << k)));
            f[k] = tr.final_state;
            for (const auto& d : tr.diagnostics) drift = std::max(drift, std::abs(d.mass - tr.diagnostics.front().mass));
        }
        const double ratio = (f[0].coeffs - f[1].coeffs).norm() / (f[1].coeffs - f[2].coeffs).norm();
        ok = ok && ratio >= 3.5 && ratio <= 4.5;
        detail += fmt("p=%g ratio %.3f; ", p, ratio);
    }
    return {ok && drift <= 1e-10, detail + fmt("mass drift %.2e", drift)};
}

Result energy_identity() {
    const BasisTable b = collocation_basis(64);
    const SpectralState u0 = smooth_state(64);
    const double r1 = energy_derivative_check(solve_harmonic(u0, 0.0, 0.5, fixed_step(3, 1e-3), b), 3).max_residual;
    const double r2 = energy_derivative_check(solve_harmonic(u0, 0.0, 0.5, fixed_step(3, 5e-4), b), 3).max_residual;
    const double r5 = energy_derivative_check(solve_harmonic(u0, 0.0, 0.5, fixed_step(5, 1e-3), b), 5).max_residual;
    const double ratio = r1 / r2;
    const bool ok = r1 <= 5e-4 && ratio >= 3.4 && ratio <= 4.6 && r5 <= 1e-6;
    return {ok, fmt("residual %.2e at dt=1e-3, ratio %.2f under halving, ", r1, ratio) + fmt("p=5 residual %.2e", r5)};
}

Result lens_consistency() {
    const int N = 128;
    const SpectralState w = smooth_state(N);
    const PeriodicBox box{40.0, 4096};
    const GridState U0{evaluate(w, box.grid()), box};
    double worst = 0.0;
    for (double p : {3.0, 5.0, 7.0}) {
        SolverConfig c = fixed_step(p, 1e-3);
        c.theta = 0.1;
        c.record_every = 1 << 20;
        const GridState flat = solve_flat(U0, 0.0, 2.0, c).final_state;
        const double t = harmonic_time(2.0);
        c.dt = 2.5e-4;
        const GridState lensed = lens_inverse(solve_harmonic(w, 0.0, t, c).final_state, t, box);
        worst = std::max(worst, std::sqrt(box_mass(GridState{flat.values - lensed.values, box})));
    }
    return {worst <= 1e-4, fmt("max L2 gap %.2e at s = 2", worst)};
}

Result monotonicity() {
    const EnsembleSpec ens{8, 10000, {7, 0}};
    bool ok = true;
    std::string detail;
    for (double p : {3.0, 5.0, 7.0}) {
        const double R = median_radius(p + 1.0, ens);
        const EventPredicate ball = EventPredicate::lp_ball(p + 1.0, R);
        const MonotonicityReport zero = monotonicity_experiment(p, 0.0, ball, ens, SolverConfig{});
        ok = ok && zero.lhs.value == zero.rhs;
        for (double t : {0.1, 0.3, kPi / 8}) {
            const MonotonicityReport r = monotonicity_experiment(p, t, ball, ens, SolverConfig{});
            ok = ok && r.verdict == Verdict::holds;
            detail += to_string(r.verdict).substr(0, 1);
        }
    }
    return {ok, "verdicts " + detail + " (h = holds), t = 0 exact"};
}

Result decay() {
    DecayConfig cfg;
    cfg.p = 5.0;
    cfg.samples = 8;
    cfg.stream = {8, 0};
    cfg.solver.t_cap = 0.781;
    for (int k = 0; k < 16; ++k) cfg.s_grid.push_back(5.0 * std::pow(10.0, k / 15.0));
    const DecayReport r = decay_experiment(cfg);
    return {r.failed_samples == 0 && std::abs(r.exponent.value + 1.0 / 3.0) <= 0.1,
            fmt("exponent %.4f +- %.4f", r.exponent.value, r.exponent.stderr_)};
}

Result scattering() {
    ScatterConfig cfg;
    cfg.solver.t_cap = 0.781;
    for (int k = 0; k < 12; ++k) cfg.s_grid.push_back(0.3 * std::pow(50.0 / 0.3, k / 11.0));
    bool ok = true;
    double w_lin = 0.0;
    for (std::uint64_t j = 0; j < 3; ++j) {
        const SpectralState u0 = sample(CoefficientLaw::mu0(), 32, {9, j});
        cfg.solver.nonlinear = true;
        ok = ok && scattering_experiment(u0, cfg).tail_monotone;
        cfg.solver.nonlinear = false;
        w_lin = std::max(w_lin, scattering_experiment(u0, cfg).w_plus.coeffs.norm());
    }
    return {ok && w_lin <= 1e-10, std::string(ok ? "tails monotone" : "tail not monotone") + fmt(", linear W+ %.2e", w_lin)};
}

double subset_sup(const std::vector<double>& mu, const std::vector<double>& nu, double alpha) {
    double best = 0.0;
    const int m = static_cast<int>(mu.size());
    for (int mask = 1; mask < (1 << m); ++mask) {
        double a = 0.0, b = 0.0;
        for (int i = 0; i < m; ++i)
            if (mask >> i & 1) a += mu[i], b += nu[i];
        best = std::max(best, a / std::pow(b, alpha));
    }
    return best;
}

Result power_inequality() {
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int bad_exact = 0, bad_weak = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + trial % 12;
        std::vector<double> mu(m), nu(m);
        for (int i = 0; i < m; ++i) {
            mu[i] = U(gen);
            nu[i] = U(gen) + 1e-3;
        }
        double f_sup = 0.0;
        for (int i = 0; i < m; ++i) f_sup = std::max(f_sup, mu[i] / nu[i]);
        const double C1 = power_inequality_scan({mu}, {nu}, 1.0).best_C;
        if (std::abs(C1 - f_sup) > 1e-12 * f_sup) ++bad_exact;

        const double alpha = 0.25 + 0.5 * U(gen), p = 1.0 / (1.0 - alpha);
        const double C = power_inequality_scan({mu}, {nu}, alpha).best_C;
        if (std::abs(C - subset_sup(mu, nu, alpha)) > 1e-12 * C) ++bad_weak;
        // nu(f >= lambda) <= (C / lambda)^p at every level the density takes.
        for (int i = 0; i < m; ++i) {
            const double lambda = mu[i] / nu[i];
            double tail = 0.0;
            for (int k = 0; k < m; ++k)
                if (mu[k] / nu[k] >= lambda) tail += nu[k];
            if (tail > std::pow(C / lambda, p) * (1 + 1e-12)) ++bad_weak;
        }
    }
    return {bad_exact == 0 && bad_weak == 0, fmt("%g exact mismatches, %g weak-tail violations over 1000 instances", bad_exact, bad_weak)};
}

Result equivalence() {
    const auto id = equivalence_diagnostic(CoefficientLaw::mu0(), CoefficientLaw::mu0(), 1000).verdict;
    const auto sc = equivalence_diagnostic(CoefficientLaw::mu0(), CoefficientLaw::scaled(2.0), 1000).verdict;
    const auto sh = equivalence_diagnostic(CoefficientLaw::mu0(), CoefficientLaw::shifted(), 1000).verdict;
    return {id == Equivalence::equivalent && sc == Equivalence::singular && sh == Equivalence::equivalent,
            to_string(id) + ", " + to_string(sc) + ", " + to_string(sh)};
}

Result tails() {
    TailConfig tc;
    tc.sigma = 0.1;
    tc.modes = 64;
    tc.samples = 10000;
    const SampleStream stream{12, 0};
    const TailReport pilot = smoothing_tail_experiment(tc, {1.0}, stream);
    const double lo = pilot.median, hi = quantile(pilot.sup_norms, 0.999);
    std::vector<double> R(12);
    for (int k = 0; k < 12; ++k) R[k] = lo + (hi - lo) * k / 11.0;
    const TailReport r = smoothing_tail_experiment(tc, R, stream);
    const double score = std::abs(r.slope) * hi * hi;
    return {r.slope < 0.0 && score > 3.0, fmt("slope %.3f, |slope| R_max^2 = %.2f", r.slope, score)};
}

Result bourgain() {
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::string detail = "ratios";
    for (double R : {10.0, 20.0, 40.0}) {
        const BourgainBudget b = bourgain_budget(2.0, 1.0, 1.0, R);
        ok = ok && b.ratio < prev;
        prev = b.ratio;
        detail += fmt(" %.4g", b.ratio);
    }
    return {ok, detail};
}

Result classical() {
    const LiouvilleReport h = liouville_check(field_by_name("harmonic"), density_by_name("uniform"), 500, {14, 0});
    const LiouvilleReport e = liouville_check(field_by_name("expanding"), density_by_name("uniform"), 500, {14, 0});
    const RecurrenceReport r =
        poincare_recurrence({RecurrenceMap::Kind::circle_rotation, 1.0 / 7.0}, {0.2, 0.1}, 100, 1000, {14, 0});
    bool seven = r.fraction_returned == 1.0;
    for (long n : r.return_times) seven = seven && n == 7;
    const double vol_err = std::abs(e.volume_factor / std::exp(2.0) - 1.0);
    return {h.max_divergence_residual <= 1e-6 && vol_err <= 0.01 && seven,
            fmt("Hamiltonian residual %.2e, expanding volume %.6f, ", h.max_divergence_residual, e.volume_factor) +
                (seven ? "rotation returns at 7" : "rotation misses 7")};
}

std::string run_bundle(const std::string& threads) {
    const fs::path dir = fs::temp_directory_path() / ("nlslab_accept_t" + threads);
    fs::remove_all(dir);
    const std::vector<std::vector<std::string>> runs{
        {"sample", "--samples", "4", "--modes", "32"},
        {"evolve", "--modes", "32", "--end", "0.3"},
        {"monotonicity", "--samples", "2000"},
        {"tails", "--samples", "1000", "--modes", "32"},
        {"classical", "--samples", "200"},
    };
    std::string bundle;
    for (auto args : runs) {
        args.insert(args.end(), {"--seed", "15", "--threads", threads, "--out", dir.string()});
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        if (code != 0) throw std::runtime_error(args[0] + " exited " + std::to_string(code) + ": " + err.str());
        bundle += out.str();
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        bundle += f.filename().string() + "\n" + std::string(std::istreambuf_iterator<char>(in), {});
    }
    fs::remove_all(dir);
    return bundle;
}

Result reproducibility() {
    const std::string one = run_bundle("1");
    const bool ok = one == run_bundle("1") && one == run_bundle("2") && one == run_bundle("8");
    return {ok, fmt("%g bytes compared across 1, 2 and 8 threads", static_cast<double>(one.size()))};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
        {"basis fidelity", basis_fidelity},
        {"spectral parity e^{-i pi H} = -1", parity},
        {"free Gaussian closed form", free_gaussian},
        {"Strang order and mass drift", solver_order},
        {"energy identity", energy_identity},
        {"lens dual route", lens_consistency},
        {"monotonicity grid", monotonicity},
        {"decay exponent p = 5", decay},
        {"scattering residuals", scattering},
        {"power inequality by enumeration", power_inequality},
        {"equivalence classification", equivalence},
        {"large-deviation tail shape", tails},
        {"Bourgain budget ratio", bourgain},
        {"classical lab", classical},
        {"reproducibility across threads", reproducibility},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Result r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%2zu] %s  %-36s %s (%.1fs)\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    r.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !r.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
