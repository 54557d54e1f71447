#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlslab/errors.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/lens.hpp"
#include "nlslab/periodic_box.hpp"

using namespace nlslab;

namespace {

// Free evolution of exp(-y^2/2): (1 + 2is)^{-1/2} exp(-y^2 / (2(1 + 2is))).
cplx free_gaussian(double y, double s) {
    const cplx a(1.0, 2.0 * s);
    return std::pow(a, -0.5) * std::exp(-y * y / (2.0 * a));
}

} // namespace

TEST_SUITE("lens") {

TEST_CASE("Time maps") {
    CHECK(flat_time(0.0) == 0.0);
    CHECK(flat_time(std::numbers::pi / 8) == doctest::Approx(0.5));
    CHECK(harmonic_time(0.5) == doctest::Approx(std::numbers::pi / 8));
    for (double t : {-0.7, -0.2, 0.1, 0.6, 0.78}) CHECK(harmonic_time(flat_time(t)) == doctest::Approx(t).epsilon(1e-14));
    CHECK_THROWS_AS(flat_time(std::numbers::pi / 4), InvalidArgument);
    const TimePair p = TimePair::from_flat(2.0);
    CHECK(p.t == doctest::Approx(std::atan(4.0) / 2));
}

TEST_CASE("unit_phase reduces large phases") {
    CHECK(std::abs(unit_phase(1e6 * 2 * std::numbers::pi + 0.3) - std::polar(1.0, 0.3)) < 1e-9);
    CHECK(std::abs(unit_phase(std::numbers::pi) + 1.0) < 1e-15);
}

TEST_CASE("Ground state maps to the free Gaussian") {
    const PeriodicBox box{30.0, 2048};
    const int N = 8;
    for (double s : {0.25, 1.0, 3.0}) {
        const double t = harmonic_time(s);
        const GridState U = lens_inverse(linear_harmonic(SpectralState::unit(N, 0), t), t, box);
        double err = 0.0;
        for (int j = 0; j < box.points; ++j)
            err = std::max(err, std::abs(U.values[j] * std::pow(std::numbers::pi, 0.25) - free_gaussian(box.point(j), s)));
        CHECK(err < 1e-12);
    }
}

TEST_CASE("Forward map of the free Gaussian is e^{-itH} e_0") {
    const PeriodicBox box{40.0, 4096};
    const double s = 0.7, t = harmonic_time(s);
    const GridState U = sample_on_box(box, [&](double y) { return free_gaussian(y, s) * std::pow(std::numbers::pi, -0.25); });
    const BasisTable b = build_basis(16, 32);
    const SpectralState u = analyze(lens_forward(U, s, t, b), b);
    const SpectralState expect = linear_harmonic(SpectralState::unit(16, 0), t);
    CHECK((u.coeffs - expect.coeffs).cwiseAbs().maxCoeff() < 1e-10);

    // The dilated-box overload lands on points of the original grid.
    const GridState dilated = lens_forward(U, s, t);
    CHECK(dilated.box().half_width == doctest::Approx(40.0 * std::cos(2 * t)));
    CHECK(box_mass(dilated) == doctest::Approx(box_mass(U)).epsilon(1e-12));
    CHECK_THROWS_AS(lens_forward(U, s, t + 0.01, b), InvalidArgument);
}

TEST_CASE("Forward then inverse is the identity") {
    const PeriodicBox box{20.0, 1024};
    const double s = 0.4, t = harmonic_time(s);
    const GridState U = sample_on_box(box, [](double y) { return cplx(std::exp(-y * y), y * std::exp(-0.5 * y * y)); });
    const GridState u = lens_forward(U, s, t);
    const GridState back = lens_inverse(u, t, box);
    CHECK((back.values - U.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Lens Lp scaling identity against direct quadrature") {
    SpectralState u = SpectralState::zero(12);
    u.coeffs.head(3) << 1.0, cplx(0.2, 0.4), -0.3;
    const BasisTable b = build_basis(12, 64);
    const PeriodicBox box{40.0, 8192};
    for (double t : {0.2, 0.5}) {
        const GridState U = lens_inverse(u, t, box);
        for (double q : {2.0, 4.0, 6.0}) CHECK(flat_lp_norm(u, b, t, q) == doctest::Approx(lp_norm(U, q)).epsilon(1e-9));
    }
}

}
