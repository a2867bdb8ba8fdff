#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tse/analytic.hpp"

using namespace tse;
using namespace tse::analytic;

namespace {
const FdParams unit_fd(1.0, 1.0);
const FdParams freeway_fd(80.0, 0.12);
}  // namespace

TEST_CASE("flux endpoints and vertex") {
  CHECK(flux(0.0, unit_fd) == 0.0);
  CHECK(flux(1.0, unit_fd) == 0.0);
  CHECK(flux(0.5, unit_fd) == doctest::Approx(0.25));
  CHECK_THROWS_AS(flux(-0.1, unit_fd), std::invalid_argument);
  CHECK_THROWS_AS(flux(1.1, unit_fd), std::invalid_argument);
}

TEST_CASE("velocity") {
  CHECK(velocity(0.0, unit_fd) == doctest::Approx(1.0));
  CHECK(velocity(1.0, unit_fd) == doctest::Approx(0.0));
  CHECK(velocity(0.06, freeway_fd) == doctest::Approx(40.0));
}

TEST_CASE("characteristic speed") {
  CHECK(characteristic_speed(0.0, unit_fd) == doctest::Approx(1.0));
  CHECK(characteristic_speed(0.5, unit_fd) == doctest::Approx(0.0));
  CHECK(characteristic_speed(1.0, unit_fd) == doctest::Approx(-1.0));
}

TEST_CASE("flux equals rho times velocity on a sweep") {
  for (int k = 0; k <= 100; ++k) {
    const double rho = 0.12 * k / 100.0;
    CHECK(flux(rho, freeway_fd) == doctest::Approx(rho * velocity(rho, freeway_fd)));
  }
}

TEST_CASE("characteristic speed matches d flux / d rho") {
  for (int k = 1; k < 100; ++k) {
    const double rho = k / 100.0;
    const double fd_slope = oracles::central_diff(
        [&](double r) { return flux(r, unit_fd); }, rho, 1e-6);
    CHECK(std::fabs(characteristic_speed(rho, unit_fd) - fd_slope) <=
          1e-8 * std::max(1.0, std::fabs(fd_slope)));
  }
}

TEST_CASE("shock speed") {
  CHECK(shock_speed({0.2, 0.8, unit_fd}) == doctest::Approx(0.0));
  CHECK(shock_speed({0.0, 0.5, unit_fd}) == doctest::Approx(0.5));
  CHECK(shock_speed({0.5, 1.0, unit_fd}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(shock_speed({0.3, 0.3, unit_fd}), std::invalid_argument);
}

TEST_CASE("riemann solution cases") {
  RiemannProblem constant(0.3, 0.3, unit_fd);
  CHECK(riemann_entropy_solution(constant, -1.0, 2.0) == doctest::Approx(0.3));

  RiemannProblem fan(0.8, 0.2, unit_fd);
  CHECK(riemann_entropy_solution(fan, 0.0, 1.0) == doctest::Approx(0.5));

  RiemannProblem shock(0.2, 0.8, unit_fd);  // stationary shock at x = 0
  CHECK(riemann_entropy_solution(shock, 0.1, 1.0) == doctest::Approx(0.8));
  CHECK(riemann_entropy_solution(shock, -0.1, 1.0) == doctest::Approx(0.2));

  CHECK_THROWS_AS(riemann_entropy_solution(shock, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("riemann solution is self similar") {
  RiemannProblem fan(0.9, 0.1, unit_fd);
  RiemannProblem shock(0.1, 0.9, unit_fd);
  for (const auto& p : {fan, shock})
    for (double x : {-0.7, -0.2, 0.0, 0.3, 0.8})
      for (double t : {0.5, 1.0})
        CHECK(riemann_entropy_solution(p, x, t) ==
              doctest::Approx(riemann_entropy_solution(p, 3.0 * x, 3.0 * t)));
}

TEST_CASE("shock satisfies Rankine-Hugoniot exactly") {
  RiemannProblem p(0.15, 0.85, FdParams(2.0, 1.2));
  const double s = shock_speed(p);
  CHECK(s * (p.rho_r - p.rho_l) == doctest::Approx(flux(p.rho_r, p.fd) - flux(p.rho_l, p.fd))
                                       .epsilon(1e-15));
}

TEST_CASE("rarefaction fan is continuous in x") {
  RiemannProblem p(0.8, 0.2, unit_fd);
  const double t = 1.0;
  double prev = riemann_entropy_solution(p, -1.0, t);
  for (int k = 1; k <= 2000; ++k) {
    const double x = -1.0 + 2.0 * k / 2000.0;
    const double cur = riemann_entropy_solution(p, x, t);
    CHECK(std::fabs(cur - prev) <= 1e-3);  // fan slope 0.5, step 1e-3
    prev = cur;
  }
}
