#include "nlslab/lens.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nlslab/errors.hpp"
#include "nlslab/periodic_box.hpp"

namespace nlslab {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

void check_harmonic_time(double t) {
    if (!(std::abs(t) < kQuarterPi)) throw InvalidArgument("lens: harmonic time must satisfy |t| < pi/4");
}

void check_pair(double s, double t) {
    check_harmonic_time(t);
    if (std::abs(harmonic_time(s) - t) > 1e-10) {
        std::ostringstream msg;
        msg << "lens: flat time s = " << s << " does not correspond to t = " << t;
        throw InvalidArgument(msg.str());
    }
}

[[noreturn]] void escape(double required, double available) {
    std::ostringstream msg;
    msg << "lens: evaluation point |y| = " << required << " lies outside the box half-width " << available;
    throw DomainEscape(msg.str(), required);
}

GridState forward_at(const GridState& U, double t, std::span<const double> xs, Geometry geometry) {
    if (!U.on_box()) throw InvalidArgument("lens_forward: flat state must live on a periodic box");
    const double c = std::cos(2.0 * t);
    const double tn = std::tan(2.0 * t);
    const double L = U.box().half_width;
    std::vector<double> ys(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        ys[j] = xs[j] / c;
        if (std::abs(ys[j]) > L * (1.0 + 1e-12)) escape(std::abs(ys[j]), L);
    }
    const Eigen::VectorXcd vals = interpolate(U, ys);
    GridState out;
    out.values.resize(static_cast<Eigen::Index>(xs.size()));
    const double amp = 1.0 / std::sqrt(c);
    for (std::size_t j = 0; j < xs.size(); ++j)
        out.values[static_cast<Eigen::Index>(j)] =
            amp * vals[static_cast<Eigen::Index>(j)] * unit_phase(-0.5 * xs[j] * xs[j] * tn);
    out.geometry = std::move(geometry);
    return out;
}

} // namespace

double time_map(double value, TimeDirection direction) {
    if (direction == TimeDirection::to_flat) {
        check_harmonic_time(value);
        return 0.5 * std::tan(2.0 * value);
    }
    return 0.5 * std::atan(2.0 * value);
}

cplx unit_phase(double phase) { return std::polar(1.0, std::remainder(phase, 2.0 * std::numbers::pi)); }

GridState lens_forward(const GridState& U, double s, double t, const BasisTable& target) {
    check_pair(s, t);
    return forward_at(U, t, target.rule.nodes, HermiteNodes{target.node_count()});
}

GridState lens_forward(const GridState& U, double s, double t, const PeriodicBox& target) {
    check_pair(s, t);
    const auto xs = target.grid();
    return forward_at(U, t, xs, target);
}

GridState lens_forward(const GridState& U, double s, double t) {
    check_pair(s, t);
    if (!U.on_box()) throw InvalidArgument("lens_forward: flat state must live on a periodic box");
    const double c = std::cos(2.0 * t);
    const double tn = std::tan(2.0 * t);
    const PeriodicBox target{U.box().half_width * c, U.box().points};
    GridState out;
    out.values.resize(U.size());
    const double amp = 1.0 / std::sqrt(c);
    for (int j = 0; j < U.size(); ++j) {
        const double x = target.point(j);
        out.values[j] = amp * U.values[j] * unit_phase(-0.5 * x * x * tn);
    }
    out.geometry = target;
    return out;
}

GridState lens_inverse(const GridState& u, double t, const PeriodicBox& target) {
    check_harmonic_time(t);
    if (!u.on_box()) throw InvalidArgument("lens_inverse: grid input must live on a periodic box");
    const double c = std::cos(2.0 * t);
    const double chirp = 0.5 * c * std::sin(2.0 * t);  // cos^2 tan / 2
    const PeriodicBox& src = u.box();
    GridState out;
    out.values.resize(target.points);
    out.geometry = target;
    const double amp = std::sqrt(c);

    // Dilated-box fast path: target point j maps onto source point j.
    if (target.points == src.points && std::abs(target.half_width * c - src.half_width) <= 1e-13 * src.half_width) {
        for (int j = 0; j < target.points; ++j) {
            const double y = target.point(j);
            out.values[j] = amp * u.values[j] * unit_phase(chirp * y * y);
        }
        return out;
    }
    std::vector<double> xs(target.points);
    for (int j = 0; j < target.points; ++j) {
        xs[j] = target.point(j) * c;
        if (std::abs(xs[j]) > src.half_width * (1.0 + 1e-12)) escape(std::abs(xs[j]), src.half_width);
    }
    const Eigen::VectorXcd vals = interpolate(u, xs);
    for (int j = 0; j < target.points; ++j) {
        const double y = target.point(j);
        out.values[j] = amp * vals[j] * unit_phase(chirp * y * y);
    }
    return out;
}

GridState lens_inverse(const SpectralState& u, double t, const PeriodicBox& target) {
    check_harmonic_time(t);
    const double c = std::cos(2.0 * t);
    const double chirp = 0.5 * c * std::sin(2.0 * t);
    std::vector<double> xs(target.points);
    for (int j = 0; j < target.points; ++j) xs[j] = target.point(j) * c;
    const Eigen::VectorXcd vals = evaluate(u, xs);
    GridState out;
    out.values.resize(target.points);
    out.geometry = target;
    const double amp = std::sqrt(c);
    for (int j = 0; j < target.points; ++j) {
        const double y = target.point(j);
        out.values[j] = amp * vals[j] * unit_phase(chirp * y * y);
    }
    return out;
}

double flat_lp_norm(const SpectralState& u, const BasisTable& basis, double t, double q) {
    check_harmonic_time(t);
    const double c = std::cos(2.0 * t);
    const double scale = std::isinf(q) ? std::sqrt(c) : std::pow(c, 0.5 - 1.0 / q);
    return scale * lp_norm(u, basis, q);
}

} // namespace nlslab
