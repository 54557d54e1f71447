#include "nlslab/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "nlslab/errors.hpp"

namespace nlslab {

namespace {

constexpr int kMaxNodes = 4096;
constexpr int kRescaleExponent = 500;
const double kRescaleThreshold = std::ldexp(1.0, kRescaleExponent);

// Hermite functions are carried as a * 2^exponent.  The Gaussian factor is
// split off into the binary exponent up front, and the three-term recurrence
// is renormalized by exact powers of two, so large |x| never overflows and
// small values only underflow at the very end.
struct ScaledStart {
    double mantissa;
    int exponent;
};

ScaledStart ground_state(double x) {
    const double quarter_pi = std::pow(std::numbers::pi, -0.25);
    const double half_sq = 0.5 * x * x;
    if (half_sq < 700.0) return {quarter_pi * std::exp(-half_sq), 0};
    const long double ln2 = std::numbers::ln2_v<long double>;
    const long double arg = -static_cast<long double>(half_sq);
    const long double e = std::floor(arg / ln2);
    const long double rest = arg - e * ln2;
    return {quarter_pi * static_cast<double>(std::exp(rest)), static_cast<int>(e)};
}

// Runs the recurrence up to index `top`; calls sink(k, mantissa, exponent) for
// every k in [0, top].
template <class Sink>
void run_recurrence(double x, int top, Sink&& sink) {
    const ScaledStart start = ground_state(x);
    double prev = 0.0;
    double cur = start.mantissa;
    int exponent = start.exponent;
    sink(0, cur, exponent);
    for (int k = 0; k < top; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kRescaleThreshold) {
            cur = std::ldexp(cur, -kRescaleExponent);
            prev = std::ldexp(prev, -kRescaleExponent);
            exponent += kRescaleExponent;
        }
        sink(k + 1, cur, exponent);
    }
}

} // namespace

void hermite_functions(double x, std::span<double> out) {
    const int top = static_cast<int>(out.size()) - 1;
    if (top < 0) return;
    run_recurrence(x, top, [&](int k, double a, int e) { out[k] = std::ldexp(a, e); });
}

namespace {

// e_n(x), e_{n-1}(x) in a common binary scale.
std::pair<double, double> scaled_top(double x, int n, int* exponent) {
    const ScaledStart start = ground_state(x);
    double prev = 0.0;
    double cur = start.mantissa;
    int ex = start.exponent;
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kRescaleThreshold) {
            cur = std::ldexp(cur, -kRescaleExponent);
            prev = std::ldexp(prev, -kRescaleExponent);
            ex += kRescaleExponent;
        }
    }
    if (exponent) *exponent = ex;
    return {cur, prev};
}

} // namespace

QuadratureRule gauss_hermite(int count) {
    if (count < 1 || count > kMaxNodes) throw InvalidArgument("gauss_hermite: node count must lie in [1, 4096]");

    // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with
    // off-diagonal sqrt(k/2); then polished by Newton on e_n.
    std::vector<double> guesses;
    if (count > 1) {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
        Eigen::VectorXd sub(count - 1);
        for (int k = 1; k < count; ++k) sub[k - 1] = std::sqrt(0.5 * k);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw NumericalFailure("gauss_hermite: Jacobi eigenvalue solve failed");
        for (int i = 0; i < count; ++i)
            if (solver.eigenvalues()[i] > 1e-6) guesses.push_back(solver.eigenvalues()[i]);  // drops the centre node of odd rules
        std::sort(guesses.begin(), guesses.end());
    }

    const int n = count;
    const double root_2n = std::sqrt(2.0 * n);
    std::vector<double> positive;
    positive.reserve(guesses.size());
    for (double x : guesses) {
        for (int iter = 0; iter < 50; ++iter) {
            auto [en, enm1] = scaled_top(x, n, nullptr);
            // e_n' = sqrt(2n) e_{n-1} - x e_n
            const double step = en / (root_2n * enm1 - x * en);
            x -= step;
            if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
        }
        positive.push_back(x);
    }
    if (static_cast<int>(positive.size()) != n / 2)
        throw NumericalFailure("gauss_hermite: wrong number of positive nodes");

    QuadratureRule rule;
    rule.nodes.reserve(n);
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) rule.nodes.push_back(-*it);
    if (n % 2 == 1) rule.nodes.push_back(0.0);
    for (double x : positive) rule.nodes.push_back(x);

    rule.weights.resize(n);
    rule.scaled_weights.resize(n);
    for (int j = 0; j < n; ++j) {
        const double x = rule.nodes[j];
        int ex = 0;
        auto [en, enm1] = scaled_top(x, n, &ex);
        (void)en;
        // w_j e^{x_j^2} = 1 / (n e_{n-1}(x_j)^2)
        const double value = std::ldexp(enm1, ex);
        const double scaled = 1.0 / (n * value * value);
        rule.scaled_weights[j] = scaled;
        rule.weights[j] = scaled * std::exp(-x * x);
        if (!std::isfinite(scaled) || scaled <= 0.0)
            throw NumericalFailure("gauss_hermite: non-finite weight at node " + std::to_string(j));
    }
    // enforce exact mirror symmetry of the weights
    for (int j = 0; j < n / 2; ++j) {
        const int k = n - 1 - j;
        rule.scaled_weights[k] = rule.scaled_weights[j];
        rule.weights[k] = rule.weights[j];
    }
    return rule;
}

BasisTable build_basis(int modes, int nodes) {
    if (modes < 1) throw InvalidArgument("build_basis: modes must be >= 1");
    if (modes > nodes) throw InvalidArgument("build_basis: modes must not exceed quadrature nodes");
    if (nodes > kMaxNodes) throw InvalidArgument("build_basis: at most 4096 nodes");

    BasisTable table;
    table.modes = modes;
    table.rule = gauss_hermite(nodes);
    table.values.resize(modes, nodes);
    std::vector<double> column(modes);
    for (int j = 0; j < nodes; ++j) {
        hermite_functions(table.rule.nodes[j], column);
        for (int n = 0; n < modes; ++n) {
            if (!std::isfinite(column[n])) throw NumericalFailure("build_basis: recurrence produced a non-finite value");
            table.values(n, j) = column[n];
        }
    }
    table.eigenvalues.resize(modes);
    for (int n = 0; n < modes; ++n) table.eigenvalues[n] = 2.0 * n + 1.0;
    return table;
}

SpectralState SpectralState::unit(int modes, int n) {
    SpectralState s = zero(modes);
    s.coeffs[n] = 1.0;
    return s;
}

bool SpectralState::finite() const { return coeffs.allFinite(); }

bool GridState::finite() const { return values.allFinite(); }

std::vector<double> PeriodicBox::grid() const {
    std::vector<double> y(points);
    for (int j = 0; j < points; ++j) y[j] = point(j);
    return y;
}

GridState synthesize(const SpectralState& state, const BasisTable& basis) {
    const int m = state.modes();
    if (m > basis.modes) throw InvalidArgument("synthesize: state has more modes than the basis");
    const auto rows = basis.values.topRows(m);
    Eigen::VectorXd re = rows.transpose() * state.coeffs.real();
    Eigen::VectorXd im = rows.transpose() * state.coeffs.imag();
    GridState out;
    out.values.resize(basis.node_count());
    out.values.real() = re;
    out.values.imag() = im;
    out.geometry = HermiteNodes{basis.node_count()};
    return out;
}

SpectralState analyze(const GridState& grid, const BasisTable& basis) {
    const auto* nodes = std::get_if<HermiteNodes>(&grid.geometry);
    if (!nodes || nodes->count != basis.node_count() || grid.size() != basis.node_count())
        throw InvalidArgument("analyze: grid is not sampled at this basis' Hermite nodes");
    const Eigen::Map<const Eigen::VectorXd> w(basis.rule.scaled_weights.data(), basis.node_count());
    Eigen::VectorXd re = basis.values * w.cwiseProduct(grid.values.real());
    Eigen::VectorXd im = basis.values * w.cwiseProduct(grid.values.imag());
    SpectralState out = SpectralState::zero(basis.modes);
    out.coeffs.real() = re;
    out.coeffs.imag() = im;
    return out;
}

Eigen::VectorXcd evaluate(const SpectralState& state, std::span<const double> points) {
    const int m = state.modes();
    Eigen::VectorXcd out(static_cast<Eigen::Index>(points.size()));
    std::vector<double> e(m);
    for (std::size_t j = 0; j < points.size(); ++j) {
        hermite_functions(points[j], e);
        cplx acc = 0.0;
        for (int n = 0; n < m; ++n) acc += state.coeffs[n] * e[n];
        out[static_cast<Eigen::Index>(j)] = acc;
    }
    return out;
}

namespace {

void check_sigma(double sigma) {
    if (!(sigma >= -2.0 && sigma <= 2.0)) throw InvalidArgument("norm: sigma must lie in [-2, 2]");
}

void check_p(double p) {
    if (!(p >= 1.0)) throw InvalidArgument("norm: p must lie in [1, inf]");
}

} // namespace

double sobolev_norm(const SpectralState& state, double sigma) {
    check_sigma(sigma);
    double acc = 0.0;
    for (int n = 0; n < state.modes(); ++n) acc += std::pow(2.0 * n + 1.0, sigma) * std::norm(state.coeffs[n]);
    return std::sqrt(acc);
}

double lp_power(const GridState& grid, double p, const BasisTable* basis) {
    check_p(p);
    if (std::isinf(p)) throw InvalidArgument("lp_power: p must be finite");
    double acc = 0.0;
    if (grid.on_box()) {
        const double dx = grid.box().spacing();
        for (int j = 0; j < grid.size(); ++j) acc += std::pow(std::abs(grid.values[j]), p);
        return acc * dx;
    }
    if (!basis || basis->node_count() != grid.size())
        throw InvalidArgument("lp_power: Hermite-node grid needs its basis");
    const auto& w = basis->rule.scaled_weights;
    if (p == 2.0) {
        for (int j = 0; j < grid.size(); ++j) acc += w[j] * std::norm(grid.values[j]);
    } else {
        for (int j = 0; j < grid.size(); ++j) acc += w[j] * std::pow(std::abs(grid.values[j]), p);
    }
    return acc;
}

double lp_norm(const GridState& grid, double p, const BasisTable* basis) {
    check_p(p);
    if (std::isinf(p)) {
        double m = 0.0;
        for (int j = 0; j < grid.size(); ++j) m = std::max(m, std::abs(grid.values[j]));
        return m;
    }
    return std::pow(lp_power(grid, p, basis), 1.0 / p);
}

double lp_norm(const SpectralState& state, const BasisTable& basis, double p) {
    return lp_norm(synthesize(state, basis), p, &basis);
}

double wsp_norm(const SpectralState& state, const BasisTable& basis, double sigma, double p) {
    check_sigma(sigma);
    check_p(p);
    SpectralState lifted = state;
    for (int n = 0; n < lifted.modes(); ++n) lifted.coeffs[n] *= std::pow(2.0 * n + 1.0, 0.5 * sigma);
    return lp_norm(synthesize(lifted, basis), p, &basis);
}

double tail_mass_fraction(const SpectralState& state) {
    const int m = state.modes();
    const double total = state.coeffs.squaredNorm();
    if (total == 0.0) return 0.0;
    const int tail = std::max(1, m / 10);
    return state.coeffs.tail(tail).squaredNorm() / total;
}

} // namespace nlslab
