#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlslab/errors.hpp"
#include "nlslab/periodic_box.hpp"

using namespace nlslab;

TEST_SUITE("periodic_box") {

TEST_CASE("Wavenumbers in FFT order") {
    const PeriodicBox box{std::numbers::pi, 8};
    const std::vector<double> k = wavenumbers(box);
    const std::vector<double> expect{0, 1, 2, 3, -4, -3, -2, -1};
    for (int j = 0; j < 8; ++j) CHECK(k[j] == doctest::Approx(expect[j]));
}

TEST_CASE("FFT round trip and a single mode") {
    Eigen::VectorXcd v(16);
    for (int j = 0; j < 16; ++j) v[j] = cplx(std::sin(0.3 * j), std::cos(1.1 * j * j));
    CHECK((fft_inverse(fft_forward(v)) - v).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::VectorXcd w(16);
    for (int j = 0; j < 16; ++j) w[j] = std::polar(1.0, 2.0 * std::numbers::pi * 3 * j / 16);
    const Eigen::VectorXcd spec = fft_forward(w);
    CHECK(std::abs(spec[3] - 16.0) < 1e-12);
    CHECK(std::abs(spec[4]) < 1e-12);
}

TEST_CASE("Trigonometric interpolation reproduces band-limited data") {
    const PeriodicBox box{5.0, 64};
    const double k = std::numbers::pi / 5.0;
    auto f = [&](double y) { return cplx(std::cos(3 * k * y), std::sin(7 * k * y)) + 0.5 * std::cos(32 * k * y); };
    const GridState g = sample_on_box(box, f);
    const std::vector<double> ys{-4.9, -1.23, 0.0, 0.77, 3.3};
    const Eigen::VectorXcd v = interpolate(g, ys);
    for (std::size_t j = 0; j < ys.size(); ++j) CHECK(std::abs(v[j] - f(ys[j])) < 1e-12);
    const std::vector<double> outside{5.5};
    CHECK_THROWS_AS(interpolate(g, outside), DomainEscape);
}

TEST_CASE("Mass, boundary fraction and Sobolev norm") {
    const PeriodicBox box{20.0, 512};
    const GridState g = sample_on_box(box, [](double y) { return cplx(std::exp(-0.5 * y * y)); });
    CHECK(box_mass(g) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(boundary_mass_fraction(g) < 1e-40);
    // (1 + k^2)^{1/2}: ||u||^2 + ||u'||^2 = sqrt(pi) + sqrt(pi)/2.
    CHECK(box_sobolev_norm(g, 1.0) == doctest::Approx(std::sqrt(1.5 * std::sqrt(std::numbers::pi))).epsilon(1e-10));
    const GridState flat = sample_on_box(box, [](double) { return cplx(1.0); });
    int outside = 0;
    for (int j = 0; j < box.points; ++j) outside += std::abs(box.point(j)) > box.half_width / 2;
    CHECK(boundary_mass_fraction(flat) == doctest::Approx(outside / 512.0).epsilon(1e-14));
    CHECK(boundary_mass_fraction(flat) == doctest::Approx(0.5).epsilon(0.01));
}

}
