#include "nlslab/measure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nlslab/errors.hpp"
#include "nlslab/parallel.hpp"
#include "nlslab/random_field.hpp"
#include "nlslab/stats.hpp"

namespace nlslab {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

void check_time(double t) {
    if (!(std::abs(t) < kQuarterPi)) throw InvalidArgument("measure: |t| must be below pi/4");
}

WeightedEstimate summarize(const std::vector<double>& values, const std::vector<char>& ok, std::uint64_t seed) {
    std::vector<double> kept;
    kept.reserve(values.size());
    WeightedEstimate e;
    bool hit = false;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!ok[j]) {
            ++e.failed;
            continue;
        }
        kept.push_back(values[j]);
        hit = hit || values[j] > 0.0;
    }
    const MeanEstimate m = mean_and_stderr(kept);
    e.value = m.mean;
    e.stderr_ = m.stderr_;
    e.samples = static_cast<long>(kept.size());
    e.seed = seed;
    e.censored = !hit;
    e.flagged = e.failed * 100 > static_cast<long>(values.size());
    return e;
}

} // namespace

// ---------------------------------------------------------------------------

EventPredicate EventPredicate::lp_ball(double q, double R) {
    if (!(q >= 1.0)) throw InvalidArgument("lp_ball: exponent must be >= 1");
    if (!(R > 0.0)) throw InvalidArgument("lp_ball: radius must be positive");
    EventPredicate e;
    e.kind_ = Kind::lp_ball;
    e.exponent_ = q;
    e.radius_ = R;
    return e;
}

EventPredicate EventPredicate::sobolev_ball(double sigma, double R) {
    if (!(R > 0.0)) throw InvalidArgument("sobolev_ball: radius must be positive");
    if (!(sigma >= -2.0 && sigma <= 2.0)) throw InvalidArgument("sobolev_ball: sigma must lie in [-2, 2]");
    EventPredicate e;
    e.kind_ = Kind::sobolev_ball;
    e.exponent_ = sigma;
    e.radius_ = R;
    return e;
}

EventPredicate EventPredicate::coeff_box(std::vector<CoefficientBounds> bounds) {
    for (const auto& b : bounds)
        if (!(b.re_lo <= b.re_hi) || !(b.im_lo <= b.im_hi)) throw InvalidArgument("coeff_box: empty interval");
    EventPredicate e;
    e.kind_ = Kind::coeff_box;
    e.bounds_ = std::move(bounds);
    return e;
}

bool EventPredicate::contains(const SpectralState& u, const BasisTable& basis) const {
    switch (kind_) {
    case Kind::lp_ball:
        if (std::isinf(radius_)) return true;
        return lp_norm(synthesize(u, basis), exponent_, &basis) <= radius_;
    case Kind::sobolev_ball:
        if (std::isinf(radius_)) return true;
        return sobolev_norm(u, exponent_) <= radius_;
    case Kind::coeff_box: {
        const int m = std::min(u.modes(), static_cast<int>(bounds_.size()));
        for (int n = 0; n < m; ++n) {
            const auto& b = bounds_[n];
            const cplx z = u.coeffs[n] * std::polar(1.0, b.phase);
            if (z.real() < b.re_lo || z.real() > b.re_hi || z.imag() < b.im_lo || z.imag() > b.im_hi) return false;
        }
        return true;
    }
    }
    return false;
}

EventPredicate EventPredicate::rotated(double t) const {
    if (kind_ == Kind::sobolev_ball) return *this;
    if (kind_ != Kind::coeff_box) throw InvalidArgument("rotated: only coefficient boxes and Sobolev balls rotate");
    EventPredicate e = *this;
    for (std::size_t n = 0; n < e.bounds_.size(); ++n)
        e.bounds_[n].phase = std::remainder(e.bounds_[n].phase - (2.0 * n + 1.0) * t, 2.0 * std::numbers::pi);
    return e;
}

std::string EventPredicate::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case Kind::lp_ball: os << "lp_ball(q=" << exponent_ << ", R=" << radius_ << ")"; break;
    case Kind::sobolev_ball: os << "sobolev_ball(sigma=" << exponent_ << ", R=" << radius_ << ")"; break;
    case Kind::coeff_box: os << "coeff_box(" << bounds_.size() << " modes)"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------

double nu_exponent(double t, const SpectralState& u, double p, const BasisTable& basis) {
    check_time(t);
    return nonlinearity_weight(t, p) / (p + 1.0) * lp_power(synthesize(u, basis), p + 1.0, &basis);
}

double nu_weight(double t, const SpectralState& u, double p, const BasisTable& basis) {
    return std::exp(-nu_exponent(t, u, p, basis));
}

WeightedEstimate estimate_event(double t, const EventPredicate& A, double p, const EnsembleSpec& ens) {
    check_time(t);
    if (ens.samples < 100) throw InvalidArgument("estimate_event: need at least 100 samples");
    const BasisTable basis = collocation_basis(ens.modes);
    const CoefficientLaw law = CoefficientLaw::mu0();
    std::vector<double> values(ens.samples, 0.0);
    std::vector<char> ok(ens.samples, 1);
    parallel_for(ens.samples, [&](std::size_t j) {
        const SpectralState u = sample(law, ens.modes, ens.stream.at(ens.stream.index + j));
        values[j] = A.contains(u, basis) ? nu_weight(t, u, p, basis) : 0.0;
    });
    return summarize(values, ok, ens.stream.seed);
}

WeightedEstimate estimate_pullback(double t, const EventPredicate& A, double p, const EnsembleSpec& ens,
                                   const SolverConfig& solver) {
    check_time(t);
    if (ens.samples < 100) throw InvalidArgument("estimate_pullback: need at least 100 samples");
    SolverConfig cfg = solver;
    cfg.p = p;
    cfg.store_states = false;
    cfg.validate();
    const BasisTable basis = collocation_basis(ens.modes);
    const CoefficientLaw law = CoefficientLaw::mu0();
    std::vector<double> values(ens.samples, 0.0);
    std::vector<char> ok(ens.samples, 1);
    parallel_for(ens.samples, [&](std::size_t j) {
        const SpectralState u0 = sample(law, ens.modes, ens.stream.at(ens.stream.index + j));
        try {
            const SpectralState u = evolve_harmonic(u0, 0.0, t, cfg, basis);
            values[j] = A.contains(u, basis) ? nu_weight(0.0, u0, p, basis) : 0.0;
        } catch (const NumericalFailure&) {
            ok[j] = 0;
        }
    });
    return summarize(values, ok, ens.stream.seed);
}

double median_radius(double q, const EnsembleSpec& ens) {
    const BasisTable basis = collocation_basis(ens.modes);
    const CoefficientLaw law = CoefficientLaw::mu0();
    std::vector<double> norms(ens.samples);
    parallel_for(ens.samples, [&](std::size_t j) {
        const SpectralState u = sample(law, ens.modes, ens.stream.at(ens.stream.index + j));
        norms[j] = lp_norm(synthesize(u, basis), q, &basis);
    });
    return median(std::move(norms));
}

// ---------------------------------------------------------------------------

double monotonicity_exponent(double p, double t) {
    check_time(t);
    if (p >= 5.0) return 1.0;
    return std::pow(std::cos(2.0 * t), 0.5 * (5.0 - p));
}

double monotonicity_bound(double p, double t, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("monotonicity_bound: x must lie in [0, 1]");
    const double beta = monotonicity_exponent(p, t);
    if (beta == 1.0) return x;
    return std::pow(x, beta);
}

HolderEnvelope holder_envelope(double F) {
    if (!(F > 0.0 && F < 1.0)) throw InvalidArgument("holder_envelope: F must lie in (0, 1)");
    const double k = -std::log(F);
    if (k >= 1.0) return {k, -F * std::log(F)};
    return {1.0, std::exp(-1.0)};
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated_within_noise: return "violated-within-noise";
    case Verdict::violated: return "violated";
    case Verdict::censored: return "censored";
    }
    return "?";
}

MonotonicityReport monotonicity_experiment(double p, double t, const EventPredicate& A, const EnsembleSpec& ens,
                                           const SolverConfig& solver) {
    MonotonicityReport r;
    r.p = p;
    r.t = t;
    r.event_description = A.describe();
    r.lhs = estimate_pullback(t, A, p, ens, solver);
    r.event = estimate_event(t, A, p, ens);
    r.exponent = monotonicity_exponent(p, t);
    const double x = r.event.value;
    r.rhs = monotonicity_bound(p, t, std::clamp(x, 0.0, 1.0));
    r.rhs_stderr = x > 0.0 ? r.exponent * std::pow(x, r.exponent - 1.0) * r.event.stderr_ : 0.0;
    r.combined_stderr = std::hypot(r.lhs.stderr_, r.rhs_stderr);

    const bool censored = r.lhs.censored || r.event.censored || x < 10.0 * r.event.stderr_;
    if (censored) {
        r.verdict = Verdict::censored;
    } else if (r.lhs.value <= r.rhs + 2.0 * r.combined_stderr) {
        r.verdict = Verdict::holds;
    } else if (r.lhs.value > r.rhs + 4.0 * r.combined_stderr) {
        r.verdict = Verdict::violated;
    } else {
        r.verdict = Verdict::violated_within_noise;
    }
    return r;
}

// ---------------------------------------------------------------------------

double DiscreteMeasure::total() const {
    double s = 0.0;
    for (double a : atoms) s += a;
    return s;
}

void DiscreteMeasure::validate() const {
    for (double a : atoms)
        if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("discrete measure: masses must be finite and >= 0");
}

RadonNikodymReport rn_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const std::vector<double>& weak_exponents) {
    mu.validate();
    nu.validate();
    if (mu.size() != nu.size()) throw InvalidArgument("rn_discrete: measures live on different atom counts");
    RadonNikodymReport r;
    r.density.resize(mu.size(), 0.0);
    for (int i = 0; i < mu.size(); ++i) {
        if (mu.atoms[i] > 0.0 && nu.atoms[i] == 0.0)
            throw NotAbsolutelyContinuous("rn_discrete: mu charges atom " + std::to_string(i) + " where nu vanishes");
        r.density[i] = nu.atoms[i] > 0.0 ? mu.atoms[i] / nu.atoms[i] : 0.0;
        if (nu.atoms[i] > 0.0) r.sup = std::max(r.sup, r.density[i]);
    }
    for (double p : weak_exponents) {
        WeakTail w{p, 0.0};
        for (int i = 0; i < mu.size(); ++i) {
            const double lambda = r.density[i];
            if (nu.atoms[i] == 0.0 || lambda <= 0.0) continue;
            double tail = 0.0;
            for (int k = 0; k < mu.size(); ++k)
                if (nu.atoms[k] > 0.0 && r.density[k] >= lambda) tail += nu.atoms[k];
            w.constant = std::max(w.constant, tail * std::pow(lambda, p));
        }
        r.weak.push_back(w);
    }
    return r;
}

PowerScanReport power_inequality_scan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha) {
    mu.validate();
    nu.validate();
    if (mu.size() != nu.size()) throw InvalidArgument("power_inequality_scan: measures live on different atom counts");
    if (mu.size() < 1 || mu.size() > 24) throw InvalidArgument("power_inequality_scan: need 1 to 24 atoms");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("power_inequality_scan: alpha must lie in (0, 1]");
    const int m = mu.size();
    const std::uint64_t subsets = std::uint64_t{1} << m;

    // Fixed chunking keeps ties and the witness independent of the worker count.
    constexpr std::size_t kChunks = 64;
    struct Best {
        double ratio = -1.0;
        std::uint64_t mask = 0;
    };
    std::vector<Best> best(kChunks);
    parallel_for(kChunks, [&](std::size_t c) {
        const std::uint64_t begin = std::max<std::uint64_t>(1, subsets * c / kChunks);
        const std::uint64_t end = subsets * (c + 1) / kChunks;
        Best b;
        for (std::uint64_t mask = begin; mask < end; ++mask) {
            double mu_a = 0.0, nu_a = 0.0;
            for (int i = 0; i < m; ++i) {
                if (mask >> i & 1u) {
                    mu_a += mu.atoms[i];
                    nu_a += nu.atoms[i];
                }
            }
            double ratio;
            if (nu_a == 0.0) {
                if (mu_a == 0.0) continue;
                ratio = std::numeric_limits<double>::infinity();
            } else {
                ratio = alpha == 1.0 ? mu_a / nu_a : mu_a / std::pow(nu_a, alpha);
            }
            if (ratio > b.ratio) b = {ratio, mask};
        }
        best[c] = b;
    });
    Best overall;
    for (const auto& b : best)
        if (b.ratio > overall.ratio) overall = b;

    PowerScanReport r;
    r.alpha = alpha;
    r.best_C = std::max(0.0, overall.ratio);
    for (int i = 0; i < m; ++i)
        if (overall.mask >> i & 1u) r.witness.push_back(i);
    return r;
}

// ---------------------------------------------------------------------------

BourgainBudget bourgain_budget(double kappa, double c, double C, double R) {
    if (!(kappa > 0.0 && c > 0.0 && C > 0.0 && R > 0.0)) throw InvalidArgument("bourgain_budget: parameters must be positive");
    BourgainBudget b;
    b.tau = std::pow(R, -kappa);
    b.T = std::exp(0.5 * c * R);
    b.degenerate = b.tau > b.T;
    const double q = std::floor(b.T / b.tau);
    const double steps_real = 2.0 * q + 1.0;
    if (steps_real < 9.0e18) {
        b.steps = 2 * static_cast<std::int64_t>(q) + 1;
    } else {
        b.steps = std::numeric_limits<std::int64_t>::max();
        b.saturated = true;
    }
    b.union_bound = steps_real * C * std::exp(-c * R);
    b.target = C * std::exp(-0.5 * c * R);
    b.ratio = b.union_bound / b.target;
    b.norm_level = std::sqrt(R + 1.0);
    return b;
}

double bourgain_growth(double C, double t) { return C * std::sqrt(std::log(std::abs(t)) + 1.0); }

} // namespace nlslab
