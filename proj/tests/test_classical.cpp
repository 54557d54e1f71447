#include <doctest.h>

#include <cmath>

#include "nlslab/classical.hpp"
#include "nlslab/errors.hpp"

using namespace nlslab;

TEST_SUITE("classical") {

TEST_CASE("Hamiltonian field preserves volume") {
    const LiouvilleReport r = liouville_check(field_by_name("harmonic"), density_by_name("uniform"), 200, {1, 0});
    CHECK(r.max_divergence_residual <= 1e-6);
    CHECK(r.volume_drift <= 1e-6);
}

TEST_CASE("Expanding field grows volume by e^2") {
    const LiouvilleReport r = liouville_check(field_by_name("expanding"), density_by_name("uniform"), 200, {1, 0});
    CHECK(r.max_divergence_residual == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.volume_factor == doctest::Approx(std::exp(2.0)).epsilon(0.01));
}

TEST_CASE("Gibbs densities are invariant") {
    const LiouvilleReport g = liouville_check(field_by_name("harmonic"), density_by_name("gaussian"), 200, {2, 0});
    CHECK(g.max_divergence_residual <= 1e-6);
    CHECK(g.volume_drift <= 1e-6);
    const LiouvilleReport pend = liouville_check(field_by_name("pendulum"), density_by_name("pendulum-gibbs"), 200, {2, 0});
    CHECK(pend.max_divergence_residual <= 1e-6);
    CHECK(pend.volume_drift <= 1e-6);
    const LiouvilleReport duff = liouville_check(field_by_name("duffing"), density_by_name("uniform"), 200, {2, 0});
    CHECK(duff.max_divergence_residual <= 1e-6);
}

TEST_CASE("Linear fields: det e^{A} = e^{tr A}") {
    const VectorField F = linear_field({0.3, 1.0, 0.0, 0.0, -0.1, 0.2, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.2}, 4);
    const LiouvilleReport r = liouville_check(F, density_by_name("uniform"), 50, {3, 0});
    CHECK(r.volume_factor == doctest::Approx(std::exp(0.3 + 0.2 + 0.0 - 0.2)).epsilon(1e-8));
    CHECK(r.max_divergence_residual == doctest::Approx(0.3).epsilon(1e-6));
    CHECK_THROWS_AS(linear_field({1, 2, 3}, 2), InvalidArgument);
    CHECK_THROWS_AS(field_by_name("lorenz"), InvalidArgument);
    CHECK_THROWS_AS(density_by_name("cauchy"), InvalidArgument);
}

TEST_CASE("Non-finite fields are rejected") {
    const VectorField bad{"bad", 2, [](const Point& x) { return Point{1.0 / (x[0] - x[0]), 0.0}; }};
    CHECK_THROWS_AS(liouville_check(bad, density_by_name("uniform"), 5, {1, 0}), InvalidArgument);
}

TEST_CASE("Poincare recurrence") {
    RecurrenceMap golden{RecurrenceMap::Kind::circle_rotation, (std::sqrt(5.0) - 1.0) / 2.0};
    CHECK(poincare_recurrence(golden, {0.0, 0.1}, 1000, 500, {1, 0}).fraction_returned >= 0.99);

    RecurrenceMap seventh{RecurrenceMap::Kind::circle_rotation, 1.0 / 7.0};
    const RecurrenceReport r = poincare_recurrence(seventh, {0.3, 0.1}, 50, 500, {1, 0});
    for (long n : r.return_times) CHECK(n == 7);

    const RecurrenceReport full = poincare_recurrence(golden, {0.0, 1.0}, 10, 100, {1, 0});
    for (long n : full.return_times) CHECK(n == 1);

    RecurrenceMap osc{RecurrenceMap::Kind::oscillator, 0.0};
    CHECK(poincare_recurrence(osc, {0.0, 0.1}, 1000, 200, {1, 0}).fraction_returned == 1.0);
    CHECK_THROWS_AS(poincare_recurrence(golden, {0.0, 0.0}, 10, 10, {1, 0}), InvalidArgument);
}

}
