#include "nlslab/classical.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "nlslab/errors.hpp"
#include "nlslab/parallel.hpp"
#include "nlslab/stats.hpp"

namespace nlslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Point checked(const VectorField& F, const Point& x) {
    const Point y = F.eval(x);
    for (int k = 0; k < F.dim; ++k)
        if (!std::isfinite(y[k])) throw InvalidArgument("classical: field " + F.name + " is not finite");
    return y;
}

Point axpy(const Point& x, double a, const Point& k) {
    Point y = x;
    for (int i = 0; i < kMaxClassicalDim; ++i) y[i] += a * k[i];
    return y;
}

Point random_point(const SampleStream& s, int dim) {
    Point x{};
    for (int k = 0; k < dim; k += 2) {
        const auto u = s.uniforms(static_cast<std::uint32_t>(k / 2), StreamTag::classical_points);
        x[k] = 2.0 * u[0] - 1.0;
        if (k + 1 < dim) x[k + 1] = 2.0 * u[1] - 1.0;
    }
    return x;
}

// Fractional part in [0, 1).
double turns(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

bool in_arc(double angle, const ArcSet& A) { return turns(angle - A.start) < A.length; }

} // namespace

VectorField field_by_name(const std::string& name) {
    if (name == "harmonic") return {name, 2, [](const Point& x) { return Point{x[1], -x[0]}; }};
    if (name == "expanding") return {name, 2, [](const Point& x) { return Point{x[0], x[1]}; }};
    if (name == "pendulum") return {name, 2, [](const Point& x) { return Point{x[1], -std::sin(x[0])}; }};
    if (name == "duffing")
        return {name, 2, [](const Point& x) { return Point{x[1], -x[0] - x[0] * x[0] * x[0]}; }};
    throw InvalidArgument("unknown field '" + name + "' (harmonic, expanding, pendulum, duffing)");
}

VectorField linear_field(const std::vector<double>& A, int dim) {
    if (dim < 1 || dim > kMaxClassicalDim) throw InvalidArgument("linear field: dimension must lie in [1, 4]");
    if (static_cast<int>(A.size()) != dim * dim) throw InvalidArgument("linear field: need dim*dim entries");
    return {"linear", dim, [A, dim](const Point& x) {
                Point y{};
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j) y[i] += A[i * dim + j] * x[j];
                return y;
            }};
}

Density density_by_name(const std::string& name) {
    if (name == "uniform") return {name, [](const Point&, int) { return 1.0; }};
    if (name == "gaussian")
        return {name, [](const Point& x, int dim) {
                    double r2 = 0.0;
                    for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
                    return std::exp(-0.5 * r2);
                }};
    if (name == "pendulum-gibbs")
        return {name, [](const Point& x, int) { return std::exp(std::cos(x[0]) - 0.5 * x[1] * x[1]); }};
    throw InvalidArgument("unknown density '" + name + "' (uniform, gaussian, pendulum-gibbs)");
}

Point flow(const VectorField& F, Point x, double T, int steps) {
    const double h = T / steps;
    for (int n = 0; n < steps; ++n) {
        const Point k1 = checked(F, x);
        const Point k2 = checked(F, axpy(x, 0.5 * h, k1));
        const Point k3 = checked(F, axpy(x, 0.5 * h, k2));
        const Point k4 = checked(F, axpy(x, h, k3));
        for (int i = 0; i < F.dim; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return x;
}

LiouvilleReport liouville_check(const VectorField& F, const Density& g, int samples, const SampleStream& stream) {
    if (F.dim < 1 || F.dim > kMaxClassicalDim) throw InvalidArgument("liouville_check: dimension must lie in [1, 4]");
    if (samples < 1) throw InvalidArgument("liouville_check: need at least one sample");
    const int d = F.dim;
    const double h = 1e-5;
    std::vector<double> residual(samples), moved(samples), weight(samples);
    parallel_for(samples, [&](std::size_t j) {
        const Point x = random_point(stream.at(stream.index + j), d);
        double div = 0.0;
        for (int k = 0; k < d; ++k) {
            Point xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            div += (g.eval(xp, d) * checked(F, xp)[k] - g.eval(xm, d) * checked(F, xm)[k]) / (2.0 * h);
        }
        residual[j] = std::abs(div);

        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxClassicalDim, kMaxClassicalDim> J(d, d);
        for (int k = 0; k < d; ++k) {
            Point xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const Point fp = flow(F, xp, 1.0), fm = flow(F, xm, 1.0);
            for (int i = 0; i < d; ++i) J(i, k) = (fp[i] - fm[i]) / (2.0 * h);
        }
        moved[j] = g.eval(flow(F, x, 1.0), d) * J.determinant();
        weight[j] = g.eval(x, d);
    });
    LiouvilleReport r;
    r.samples = samples;
    for (double v : residual) r.max_divergence_residual = std::max(r.max_divergence_residual, v);
    r.volume_factor = mean_and_stderr(moved).mean / mean_and_stderr(weight).mean;
    r.volume_drift = std::abs(r.volume_factor - 1.0);
    return r;
}

RecurrenceReport poincare_recurrence(const RecurrenceMap& map, const ArcSet& A, long n_max, int points,
                                     const SampleStream& stream) {
    if (!(A.length > 0.0 && A.length <= 1.0)) throw InvalidArgument("poincare_recurrence: arc length must lie in (0, 1]");
    if (map.kind == RecurrenceMap::Kind::oscillator && !(0.0 <= A.r_lo && A.r_lo < A.r_hi))
        throw InvalidArgument("poincare_recurrence: empty radius band");
    if (n_max < 1 || points < 1) throw InvalidArgument("poincare_recurrence: n_max and points must be positive");
    RecurrenceReport r;
    r.return_times.assign(points, -1);
    parallel_for(points, [&](std::size_t j) {
        const auto u = stream.at(stream.index + j).uniforms(0, StreamTag::classical_points);
        const double a0 = A.start + A.length * u[0];
        if (map.kind == RecurrenceMap::Kind::circle_rotation) {
            // Closed-form orbit a0 + n*omega avoids accumulating rounding.
            for (long n = 1; n <= n_max; ++n) {
                if (in_arc(a0 + static_cast<double>(n) * map.omega, A)) {
                    r.return_times[j] = n;
                    break;
                }
            }
            return;
        }
        // Time-one map of x' = v, v' = -x: clockwise rotation by one radian.
        const double rho = A.r_lo + (A.r_hi - A.r_lo) * u[1];
        double x = rho * std::cos(kTwoPi * a0), v = rho * std::sin(kTwoPi * a0);
        const double c = std::cos(1.0), s = std::sin(1.0);
        for (long n = 1; n <= n_max; ++n) {
            const double xn = c * x + s * v;
            v = -s * x + c * v;
            x = xn;
            const double rad = std::hypot(x, v);
            if (rad >= A.r_lo && rad < A.r_hi && in_arc(std::atan2(v, x) / kTwoPi, A)) {
                r.return_times[j] = n;
                break;
            }
        }
    });
    long returned = 0;
    for (long n : r.return_times) returned += n > 0;
    r.fraction_returned = static_cast<double>(returned) / points;
    return r;
}

} // namespace nlslab
