#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlslab/errors.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/measure_lab.hpp"

using namespace nlslab;

namespace {

const double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

// Brute-force max over nonempty subsets, written independently of the scan.
double subset_oracle(const std::vector<double>& mu, const std::vector<double>& nu, double alpha) {
    const int m = static_cast<int>(mu.size());
    double best = 0.0;
    for (int mask = 1; mask < (1 << m); ++mask) {
        double a = 0.0, b = 0.0;
        for (int i = 0; i < m; ++i)
            if (mask & (1 << i)) {
                a += mu[i];
                b += nu[i];
            }
        if (b == 0.0) {
            if (a > 0.0) return kInf;
            continue;
        }
        best = std::max(best, a / std::pow(b, alpha));
    }
    return best;
}

} // namespace

TEST_SUITE("measure_lab") {

TEST_CASE("nu_weight") {
    const BasisTable b = collocation_basis(16);
    CHECK(nu_weight(0.3, SpectralState::zero(16), 3, b) == 1.0);
    const SpectralState u = sample(CoefficientLaw::mu0(), 16, {1, 0});
    CHECK(nu_weight(0.1, u, 5, b) == nu_weight(0.6, u, 5, b));
    // t = pi/8, p = 3: alpha = cos(pi/4)^{-1}/4 * ||u||_4^4.
    CHECK(nu_exponent(kPi / 8, u, 3, b) == doctest::Approx(std::sqrt(2.0) / 4.0 * lp_power(synthesize(u, b), 4.0, &b)));
    CHECK(nu_weight(0.2, u, 3, b) > 0.0);
    CHECK(nu_weight(0.2, u, 3, b) <= 1.0);
    CHECK_THROWS_AS(nu_weight(kPi / 4, u, 3, b), InvalidArgument);
}

TEST_CASE("Event predicates") {
    const BasisTable b = collocation_basis(8);
    const SpectralState u = SpectralState::unit(8, 0);
    CHECK(EventPredicate::lp_ball(2, 1.0 + 1e-12).contains(u, b));
    CHECK_FALSE(EventPredicate::lp_ball(2, 0.999).contains(u, b));
    CHECK(EventPredicate::lp_ball(4, kInf).contains(u, b));
    CHECK(EventPredicate::sobolev_ball(1, 1.0 + 1e-12).contains(u, b));
    CHECK_THROWS_AS(EventPredicate::lp_ball(2, 0.0), InvalidArgument);

    CoefficientBounds c0;
    c0.re_lo = 0.5;
    const EventPredicate box = EventPredicate::coeff_box({c0});
    CHECK(box.contains(u, b));
    // w has c_0 = i; after e^{-itH} with t = pi/2 it becomes 1.  The rotated
    // box is the preimage of the box under the flow.
    const SpectralState w = linear_harmonic(u, -kPi / 2);
    CHECK_FALSE(box.contains(w, b));
    CHECK(box.contains(linear_harmonic(w, kPi / 2), b));
    CHECK(box.rotated(kPi / 2).contains(w, b));
    CHECK_FALSE(box.rotated(kPi / 2).contains(u, b));
    CHECK_THROWS_AS(EventPredicate::lp_ball(2, 1.0).rotated(0.1), InvalidArgument);
}

TEST_CASE("Event estimates: edge cases and Monte Carlo scaling") {
    EnsembleSpec ens{8, 2000, {21, 0}};
    const WeightedEstimate empty = estimate_event(0.2, EventPredicate::lp_ball(4, 1e-9), 3, ens);
    CHECK(empty.value == 0.0);
    CHECK(empty.stderr_ == 0.0);
    CHECK(empty.censored);

    const WeightedEstimate whole = estimate_event(0.2, EventPredicate::lp_ball(4, kInf), 3, ens);
    CHECK(whole.value <= 1.0);
    CHECK(whole.value > 0.0);
    CHECK(whole.samples == 2000);
    CHECK(whole.seed == 21);

    EnsembleSpec twice = ens;
    twice.samples = 4000;
    const WeightedEstimate more = estimate_event(0.2, EventPredicate::lp_ball(4, kInf), 3, twice);
    CHECK(whole.stderr_ / more.stderr_ == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));

    ens.samples = 50;
    CHECK_THROWS_AS(estimate_event(0.2, EventPredicate::lp_ball(4, kInf), 3, ens), InvalidArgument);
}

TEST_CASE("Coupled monotonicity in t at p < 5") {
    EnsembleSpec ens{8, 1000, {22, 0}};
    const EventPredicate all = EventPredicate::lp_ball(4, kInf);
    const double a = estimate_event(0.0, all, 3, ens).value;
    const double b = estimate_event(0.2, all, 3, ens).value;
    const double c = estimate_event(kPi / 8, all, 3, ens).value;
    CHECK(b <= a);
    CHECK(c <= b);
}

TEST_CASE("Pullback estimates") {
    EnsembleSpec ens{8, 500, {23, 0}};
    SolverConfig solver;
    const EventPredicate ball = EventPredicate::lp_ball(4, 0.9);
    const WeightedEstimate at0 = estimate_pullback(0.0, ball, 3, ens, solver);
    const WeightedEstimate ev0 = estimate_event(0.0, ball, 3, ens);
    CHECK(at0.value == ev0.value);
    CHECK(at0.stderr_ == ev0.stderr_);

    const EventPredicate all = EventPredicate::lp_ball(4, kInf);
    CHECK(estimate_pullback(0.3, all, 3, ens, solver).value == estimate_event(0.0, all, 3, ens).value);

    // Linear flow with p = 5 weights: the pullback of a coefficient box is the
    // event estimate of the box rotated back.
    solver.nonlinear = false;
    CoefficientBounds c0, c1;
    c0.re_lo = 0.0;
    c1.im_hi = 0.1;
    const EventPredicate box = EventPredicate::coeff_box({c0, c1});
    const double t = 0.3;
    const WeightedEstimate pulled = estimate_pullback(t, box, 5, ens, solver);
    const WeightedEstimate rotated = estimate_event(0.0, box.rotated(t), 5, ens);
    CHECK(pulled.value == doctest::Approx(rotated.value).epsilon(1e-12));
}

TEST_CASE("Monotonicity bound") {
    for (double t : {0.0, 0.2, 0.7})
        for (double x : {0.0, 0.3, 1.0}) CHECK(monotonicity_bound(5, t, x) == x);
    CHECK(monotonicity_exponent(3, kPi / 8) == doctest::Approx(0.7071068));
    CHECK(monotonicity_bound(3, kPi / 8, 0.5) == doctest::Approx(0.6125).epsilon(1e-4));
    for (double p : {1.0, 3.0, 7.0}) CHECK(monotonicity_bound(p, 0.0, 0.42) == doctest::Approx(0.42));
    CHECK_THROWS_AS(monotonicity_bound(3, 0.1, 1.5), InvalidArgument);
    CHECK_THROWS_AS(monotonicity_bound(3, 0.8, 0.5), InvalidArgument);
}

TEST_CASE("Holder envelope against grid minimization") {
    auto grid_min = [](double F) {
        double best = kInf;
        for (int i = 0; i <= 400000; ++i) {
            const double k = 1.0 + i * 1e-4;
            best = std::min(best, k / std::exp(1.0) * std::pow(F, 1.0 - 1.0 / k));
        }
        return best;
    };
    const HolderEnvelope a = holder_envelope(std::exp(-2.0));
    CHECK(a.k_star == doctest::Approx(2.0));
    CHECK(a.value == doctest::Approx(0.2706706).epsilon(1e-7));
    CHECK(a.value == doctest::Approx(grid_min(std::exp(-2.0))).epsilon(1e-7));
    const HolderEnvelope b = holder_envelope(std::exp(-1.0));
    CHECK(b.k_star == doctest::Approx(1.0));
    CHECK(b.value == doctest::Approx(0.3678794).epsilon(1e-7));
    const HolderEnvelope c = holder_envelope(0.9);
    CHECK(c.k_star == 1.0);
    CHECK(c.value == doctest::Approx(grid_min(0.9)).epsilon(1e-9));
    for (double F = 1e-6; F <= std::exp(-1.0); F *= 1.7) CHECK(std::abs(holder_envelope(F).value + F * std::log(F)) <= 1e-12);
    CHECK_THROWS_AS(holder_envelope(0.0), InvalidArgument);
    CHECK_THROWS_AS(holder_envelope(1.0), InvalidArgument);
}

TEST_CASE("Integrated bound solves the log-F ODE") {
    // (log F)' = -(p-5) tan(2t) log F with F(t) = x gives
    // log F(0) = log x * cos(2t)^{(5-p)/2}; integrate numerically from t back to 0.
    for (double p : {1.0, 3.0, 4.5})
        for (double t : {0.1, 0.3, 0.6})
            for (double x : {0.01, 0.4, 0.9}) {
                double y = std::log(x);
                const int n = 4000;
                const double h = -t / n;
                auto f = [&](double s, double v) { return -(p - 5.0) * std::tan(2.0 * s) * v; };
                double s = t;
                for (int k = 0; k < n; ++k) {
                    const double k1 = f(s, y), k2 = f(s + h / 2, y + h / 2 * k1), k3 = f(s + h / 2, y + h / 2 * k2),
                                 k4 = f(s + h, y + h * k3);
                    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
                    s += h;
                }
                const double closed = std::exp(std::log(x) * std::pow(std::cos(2.0 * t), (5.0 - p) / 2.0));
                CHECK(std::abs(std::exp(y) - closed) <= 1e-12);
                CHECK(std::abs(monotonicity_bound(p, t, x) - closed) <= 1e-12);
            }
}

TEST_CASE("Monotonicity experiment at t = 0 is an exact equality") {
    const EnsembleSpec ens{8, 2000, {42, 0}};
    const double R = median_radius(4, ens);
    const MonotonicityReport r = monotonicity_experiment(3, 0.0, EventPredicate::lp_ball(4, R), ens, SolverConfig{});
    CHECK(r.lhs.value == r.rhs);
    CHECK(r.verdict == Verdict::holds);
    const MonotonicityReport empty =
        monotonicity_experiment(3, 0.1, EventPredicate::lp_ball(4, 1e-9), ens, SolverConfig{});
    CHECK(empty.verdict == Verdict::censored);
}

TEST_CASE("Radon-Nikodym densities") {
    const RadonNikodymReport r = rn_discrete({{0.2, 0.8}}, {{0.5, 0.5}}, {2.0});
    CHECK(r.density[0] == doctest::Approx(0.4));
    CHECK(r.density[1] == doctest::Approx(1.6));
    CHECK(r.sup == doctest::Approx(1.6));
    CHECK(subset_oracle({0.2, 0.8}, {0.5, 0.5}, 1.0) == doctest::Approx(1.6));
    // lambda = 0.4: nu = 1; lambda = 1.6: nu = 0.5 * 2.56 = 1.28.
    CHECK(r.weak[0].constant == doctest::Approx(1.28));

    const RadonNikodymReport same = rn_discrete({{0.3, 0.7, 0.0}}, {{0.3, 0.7, 0.0}});
    CHECK(same.density == std::vector<double>{1.0, 1.0, 0.0});
    CHECK_THROWS_AS(rn_discrete({{1.0, 0.0}}, {{0.0, 1.0}}), NotAbsolutelyContinuous);
    CHECK_THROWS_AS(rn_discrete({{1.0}}, {{0.5, 0.5}}), InvalidArgument);
    CHECK_THROWS_AS(rn_discrete({{-1.0}}, {{1.0}}), InvalidArgument);
}

TEST_CASE("Power scan") {
    const PowerScanReport r = power_inequality_scan({{0.2, 0.8}}, {{0.5, 0.5}}, 1.0);
    CHECK(r.best_C == doctest::Approx(1.6));
    CHECK(r.witness == std::vector<int>{1});
    // mu = nu: a subset scores nu(A)^{1 - alpha}, largest on the whole space;
    // at alpha = 1 every subset ties and the lowest mask wins.
    for (double alpha : {0.3, 0.7}) {
        const PowerScanReport s = power_inequality_scan({{0.1, 0.2, 0.3, 0.4}}, {{0.1, 0.2, 0.3, 0.4}}, alpha);
        CHECK(s.best_C == doctest::Approx(1.0));
        CHECK(s.witness.size() == 4);
    }
    const PowerScanReport tie = power_inequality_scan({{0.1, 0.2, 0.3, 0.4}}, {{0.1, 0.2, 0.3, 0.4}}, 1.0);
    CHECK(tie.best_C == doctest::Approx(1.0));
    CHECK(tie.witness == std::vector<int>{0});
    CHECK(std::isinf(power_inequality_scan({{1.0, 0.0}}, {{0.0, 1.0}}, 0.5).best_C));
    CHECK_THROWS_AS(power_inequality_scan(DiscreteMeasure{std::vector<double>(25, 1.0)}, DiscreteMeasure{std::vector<double>(25, 1.0)}, 1.0),
                    InvalidArgument);
}

TEST_CASE("Power scan matches the subset oracle on random instances") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + trial % 10;
        std::vector<double> mu(m), nu(m);
        for (int i = 0; i < m; ++i) {
            mu[i] = U(gen);
            nu[i] = U(gen) + 0.01;
        }
        for (double alpha : {0.5, 1.0})
            CHECK(power_inequality_scan({mu}, {nu}, alpha).best_C == doctest::Approx(subset_oracle(mu, nu, alpha)).epsilon(1e-12));
    }
}

TEST_CASE("Weak-L2 density in both directions at m = 12") {
    // f_i proportional to i^{-1/p} with p = 2 and uniform nu.
    const int m = 12;
    const double p = 2.0, alpha = 1.0 - 1.0 / p;
    std::vector<double> nu(m, 1.0 / m), mu(m);
    for (int i = 0; i < m; ++i) mu[i] = std::pow(i + 1.0, -1.0 / p) / m;
    const double best = power_inequality_scan({mu}, {nu}, alpha).best_C;
    const double weak = rn_discrete({mu}, {nu}, {p}).weak[0].constant;
    CHECK(std::isfinite(best));
    CHECK(weak <= std::pow(best, p) * (1 + 1e-12));
    CHECK(best <= (2 * p - 1) / (p - 1) * std::pow(weak, 1.0 / p) * (1 + 1e-12));
}

TEST_CASE("Bourgain budget") {
    const BourgainBudget b = bourgain_budget(2, 1, 1, 10);
    CHECK(b.tau == doctest::Approx(0.01));
    CHECK(b.T == doctest::Approx(148.4132).epsilon(1e-6));
    CHECK(b.steps == 2 * 14841 + 1);
    CHECK(b.union_bound == doctest::Approx(b.steps * std::exp(-10.0)));
    CHECK(b.target == doctest::Approx(std::exp(-5.0)));
    CHECK(b.norm_level == doctest::Approx(std::sqrt(11.0)));
    CHECK_FALSE(b.degenerate);

    const BourgainBudget tiny = bourgain_budget(2, 1, 1, 0.1);
    CHECK(tiny.steps == 1);
    CHECK(tiny.degenerate);
    CHECK(bourgain_budget(2, 1, 1, 200).saturated);
    CHECK(bourgain_growth(2.0, std::exp(3.0)) == doctest::Approx(4.0));
    CHECK_THROWS_AS(bourgain_budget(0, 1, 1, 10), InvalidArgument);
}

}
