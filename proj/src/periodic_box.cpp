#include "nlslab/periodic_box.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "nlslab/errors.hpp"

namespace nlslab {

namespace {

Eigen::FFT<double>& local_fft() {
    thread_local Eigen::FFT<double> fft;
    return fft;
}

} // namespace

std::vector<double> wavenumbers(const PeriodicBox& box) {
    const int n = box.points;
    const double dk = std::numbers::pi / box.half_width;
    std::vector<double> k(n);
    for (int j = 0; j < n; ++j) k[j] = (j < (n + 1) / 2 ? j : j - n) * dk;
    return k;
}

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& values) {
    std::vector<cplx> in(values.data(), values.data() + values.size());
    std::vector<cplx> out;
    local_fft().fwd(out, in);
    return Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& spectrum) {
    std::vector<cplx> in(spectrum.data(), spectrum.data() + spectrum.size());
    std::vector<cplx> out;
    local_fft().inv(out, in);
    return Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXcd interpolate(const GridState& state, std::span<const double> points) {
    if (!state.on_box()) throw InvalidArgument("interpolate: state is not on a periodic box");
    const PeriodicBox& box = state.box();
    const int n = box.points;
    const Eigen::VectorXcd spec = fft_forward(state.values) / static_cast<double>(n);
    const double dk = std::numbers::pi / box.half_width;
    const bool even = n % 2 == 0;
    const int kmax = even ? n / 2 - 1 : (n - 1) / 2;
    constexpr int kReseed = 64;

    Eigen::VectorXcd out(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double y = points[i];
        if (std::abs(y) > box.half_width * (1.0 + 1e-12))
            throw DomainEscape("interpolate: point outside the box", std::abs(y));
        const double phase0 = dk * (y + box.half_width);
        cplx acc = spec[0];
        cplx step = std::polar(1.0, phase0);
        cplx rot = step;
        for (int k = 1; k <= kmax; ++k) {
            if (k % kReseed == 0) rot = std::polar(1.0, phase0 * k);
            acc += spec[k] * rot + spec[n - k] * std::conj(rot);
            rot *= step;
        }
        if (even) acc += spec[n / 2] * std::cos(phase0 * (n / 2));
        out[static_cast<Eigen::Index>(i)] = acc;
    }
    return out;
}

double box_mass(const GridState& state) {
    if (!state.on_box()) throw InvalidArgument("box_mass: state is not on a periodic box");
    return state.values.squaredNorm() * state.box().spacing();
}

double boundary_mass_fraction(const GridState& state) {
    if (!state.on_box()) throw InvalidArgument("boundary_mass_fraction: state is not on a periodic box");
    const PeriodicBox& box = state.box();
    double outside = 0.0, total = 0.0;
    for (int j = 0; j < box.points; ++j) {
        const double m = std::norm(state.values[j]);
        total += m;
        if (std::abs(box.point(j)) > 0.5 * box.half_width) outside += m;
    }
    return total > 0.0 ? outside / total : 0.0;
}

double box_sobolev_norm(const GridState& state, double sigma) {
    if (!state.on_box()) throw InvalidArgument("box_sobolev_norm: state is not on a periodic box");
    const PeriodicBox& box = state.box();
    const Eigen::VectorXcd spec = fft_forward(state.values);
    const auto k = wavenumbers(box);
    double acc = 0.0;
    for (int j = 0; j < box.points; ++j) acc += std::pow(1.0 + k[j] * k[j], sigma) * std::norm(spec[j]);
    return std::sqrt(acc * box.spacing() / box.points);
}

} // namespace nlslab
