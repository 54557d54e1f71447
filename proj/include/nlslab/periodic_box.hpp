#pragma once

// Fourier machinery on the periodic box [-L, L).

#include <span>
#include <vector>

#include "nlslab/spectral_basis.hpp"

namespace nlslab {

/// Angular wavenumbers in FFT order; the Nyquist mode carries -pi/dx.
std::vector<double> wavenumbers(const PeriodicBox& box);

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& values);
Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& spectrum);

/// Samples of f on the box.
template <class F>
GridState sample_on_box(const PeriodicBox& box, F&& f) {
    GridState g;
    g.values.resize(box.points);
    for (int j = 0; j < box.points; ++j) g.values[j] = f(box.point(j));
    g.geometry = box;
    return g;
}

/// Band-limited (trigonometric) interpolation of a box state at arbitrary
/// points; the Nyquist mode is split symmetrically so real data stay real.
Eigen::VectorXcd interpolate(const GridState& state, std::span<const double> points);

/// sum |U|^2 dy
double box_mass(const GridState& state);

/// Relative mass outside |y| <= L/2.
double boundary_mass_fraction(const GridState& state);

/// (dx/n) sum (1 + k^2)^sigma |U^_k|^2, square-rooted.
double box_sobolev_norm(const GridState& state, double sigma);

} // namespace nlslab
