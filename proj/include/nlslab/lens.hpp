#pragma once

// Lens transform between the flat picture U(s, y) (NLS on R, time s) and the
// harmonic picture u(t, x) on |t| < pi/4:
//
//   u(t, x) = cos^{-1/2}(2t) U(tan(2t)/2, x / cos(2t)) exp(-i x^2 tan(2t) / 2)
//
// The map is an L^2 isometry and intertwines the free flow with e^{-itH}.

#include "nlslab/spectral_basis.hpp"

namespace nlslab {

enum class TimeDirection { to_flat, to_harmonic };

/// to_flat: s = tan(2t)/2 (|t| < pi/4); to_harmonic: t = arctan(2s)/2.
double time_map(double value, TimeDirection direction);

inline double flat_time(double t) { return time_map(t, TimeDirection::to_flat); }
inline double harmonic_time(double s) { return time_map(s, TimeDirection::to_harmonic); }

struct TimePair {
    double t = 0.0;
    double s = 0.0;

    static TimePair from_harmonic(double t) { return {t, flat_time(t)}; }
    static TimePair from_flat(double s) { return {harmonic_time(s), s}; }
};

/// exp(i * phase) with the phase reduced mod 2 pi first.
cplx unit_phase(double phase);

/// Flat state at time s to the harmonic picture at t = arctan(2s)/2,
/// evaluated at the Hermite nodes of `target`.
GridState lens_forward(const GridState& U, double s, double t, const BasisTable& target);
/// ... evaluated on an arbitrary periodic box (trigonometric interpolation).
GridState lens_forward(const GridState& U, double s, double t, const PeriodicBox& target);
/// ... on the dilated box {L cos(2t), n}, whose points map onto U's points.
GridState lens_forward(const GridState& U, double s, double t);

/// Harmonic state at t to the flat picture on `target`:
///   U(s, y) = cos^{1/2}(2t) u(t, y cos(2t)) exp(+i y^2 cos^2(2t) tan(2t) / 2)
GridState lens_inverse(const GridState& u, double t, const PeriodicBox& target);
GridState lens_inverse(const SpectralState& u, double t, const PeriodicBox& target);

/// ||U(s)||_{L^q} for U = lens^{-1}(u(t)), from ||U(s)||_q = cos^{1/2-1/q}(2t) ||u(t)||_q.
double flat_lp_norm(const SpectralState& u, const BasisTable& basis, double t, double q);

} // namespace nlslab
