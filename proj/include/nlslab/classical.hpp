#pragma once

// Finite-dimensional flows for the Liouville and Poincare checks.  Fields and
// densities come from a small closed-form catalogue rather than a parser.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlslab/rng.hpp"

namespace nlslab {

inline constexpr int kMaxClassicalDim = 4;
using Point = std::array<double, kMaxClassicalDim>;

struct VectorField {
    std::string name;
    int dim = 2;
    std::function<Point(const Point&)> eval;
};

struct Density {
    std::string name;
    std::function<double(const Point&, int dim)> eval;
};

/// harmonic: (v, -x); expanding: (x, y); pendulum: (v, -sin x);
/// duffing: (v, -x - x^3).
VectorField field_by_name(const std::string& name);
/// Linear field x' = A x with A row-major, dim <= 4.
VectorField linear_field(const std::vector<double>& A, int dim);

/// uniform: 1; gaussian: exp(-|x|^2/2); pendulum-gibbs: exp(cos x - v^2/2).
Density density_by_name(const std::string& name);

struct LiouvilleReport {
    double max_divergence_residual = 0.0;
    double volume_factor = 1.0;
    double volume_drift = 0.0;
    int samples = 0;
};

/// Central-difference sup of |div(g F)| on random points of [-1, 1]^d, and the
/// g-weighted volume of that box after unit time relative to its start.
LiouvilleReport liouville_check(const VectorField& field, const Density& g, int samples, const SampleStream& stream);

/// Flow of the field over time T by RK4 with the given step count.
Point flow(const VectorField& field, Point x, double T, int steps = 200);

struct RecurrenceMap {
    enum class Kind { circle_rotation, oscillator } kind = Kind::circle_rotation;
    double omega = 0.0;  // circle: fraction of a turn per step
};

/// An arc of the circle [start, start + length) in turns.  For the oscillator
/// the set is the annular sector with this angular arc and radius band.
struct ArcSet {
    double start = 0.0;
    double length = 0.1;
    double r_lo = 0.5;
    double r_hi = 1.5;
};

struct RecurrenceReport {
    std::vector<long> return_times;  // -1 when no return by n_max
    double fraction_returned = 0.0;
};

RecurrenceReport poincare_recurrence(const RecurrenceMap& map, const ArcSet& A, long n_max, int points,
                                     const SampleStream& stream);

} // namespace nlslab
