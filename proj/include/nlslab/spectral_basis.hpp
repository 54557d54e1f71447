#pragma once

// Hermite eigenbasis of H = -d^2/dx^2 + x^2 on L^2(R).
//
//   H e_n = (2n+1) e_n,   e_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2)
//
// Functions are sampled at Gauss-Hermite nodes.  The quadrature stores two
// weight vectors: the classical weights w_j for the e^{-x^2} weight function
// and the compensated weights w_j e^{x_j^2}, so that sums of products of
// Hermite *functions* reproduce L^2(R) inner products directly.

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nlslab {

using cplx = std::complex<double>;

struct QuadratureRule {
    std::vector<double> nodes;            ///< strictly increasing, symmetric about 0
    std::vector<double> weights;          ///< classical weights for e^{-x^2}
    std::vector<double> scaled_weights;   ///< weights[j] * exp(nodes[j]^2)

    int count() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Hermite rule with `count` nodes (1 <= count <= 4096).
QuadratureRule gauss_hermite(int count);

struct BasisTable {
    int modes = 0;
    QuadratureRule rule;
    Eigen::MatrixXd values;            ///< modes x count, values(n, j) = e_n(x_j)
    std::vector<double> eigenvalues;   ///< 2n + 1

    int node_count() const { return rule.count(); }
};

BasisTable build_basis(int modes, int nodes);

/// e_0(x), ..., e_{modes-1}(x) at a single point, using the rescaled
/// recurrence so that large |x| neither overflows nor underflows early.
void hermite_functions(double x, std::span<double> out);

struct SpectralState {
    Eigen::VectorXcd coeffs;

    SpectralState() = default;
    explicit SpectralState(Eigen::VectorXcd c) : coeffs(std::move(c)) {}
    static SpectralState zero(int modes) { return SpectralState(Eigen::VectorXcd::Zero(modes)); }
    static SpectralState unit(int modes, int n);

    int modes() const { return static_cast<int>(coeffs.size()); }
    bool finite() const;
};

/// Samples at the nodes of a Gauss-Hermite rule with `count` nodes.
struct HermiteNodes {
    int count = 0;
    bool operator==(const HermiteNodes&) const = default;
};

/// Uniform periodic grid y_j = -L + j * 2L/n, j = 0..n-1.
struct PeriodicBox {
    double half_width = 40.0;
    int points = 4096;

    double spacing() const { return 2.0 * half_width / points; }
    double point(int j) const { return -half_width + j * spacing(); }
    std::vector<double> grid() const;
    bool operator==(const PeriodicBox&) const = default;
};

using Geometry = std::variant<HermiteNodes, PeriodicBox>;

struct GridState {
    Eigen::VectorXcd values;
    Geometry geometry;

    int size() const { return static_cast<int>(values.size()); }
    bool finite() const;
    bool on_box() const { return std::holds_alternative<PeriodicBox>(geometry); }
    const PeriodicBox& box() const { return std::get<PeriodicBox>(geometry); }
};

/// values[j] = sum_n coeffs[n] e_n(x_j); state may be shorter than basis.modes.
GridState synthesize(const SpectralState& state, const BasisTable& basis);

/// coeffs[n] = <grid, e_n> by quadrature; exact left inverse of synthesize.
SpectralState analyze(const GridState& grid, const BasisTable& basis);

/// Evaluate the Hermite series at arbitrary points.
Eigen::VectorXcd evaluate(const SpectralState& state, std::span<const double> points);

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// (sum (2n+1)^sigma |c_n|^2)^{1/2}
double sobolev_norm(const SpectralState& state, double sigma);

/// ||H^{sigma/2} u||_{L^p}, H^{sigma/2} applied diagonally, L^p by quadrature.
/// p = infinity gives the max over nodes.
double wsp_norm(const SpectralState& state, const BasisTable& basis, double sigma, double p);

/// ||u||_{L^p} of a grid state.  Hermite nodes use the compensated weights,
/// a periodic box the uniform trapezoid rule.  The basis is required only for
/// Hermite-node grids.
double lp_norm(const GridState& grid, double p, const BasisTable* basis = nullptr);
double lp_norm(const SpectralState& state, const BasisTable& basis, double p);

/// sum_j w_j |u_j|^p without the 1/p root (p < infinity).
double lp_power(const GridState& grid, double p, const BasisTable* basis = nullptr);

/// Fraction of the l^2 mass carried by the top 10% of the modes.
double tail_mass_fraction(const SpectralState& state);

/// Lp norms on Hermite nodes are trusted only for resolved states.
inline constexpr double kResolutionThreshold = 1e-6;
inline bool resolved(const SpectralState& state) {
    return tail_mass_fraction(state) <= kResolutionThreshold;
}

} // namespace nlslab
