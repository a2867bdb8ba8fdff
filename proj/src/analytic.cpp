#include "tse/analytic.hpp"

#include <stdexcept>

namespace tse::analytic {

static void check_density(double rho, const FdParams& fd, const char* op) {
  if (!(rho >= 0.0) || !(rho <= fd.rho_m))
    throw std::invalid_argument(std::string(op) + ": density outside [0, rho_m]");
}

double flux(double rho, const FdParams& fd) {
  check_density(rho, fd, "flux");
  return rho * fd.v_f * (1.0 - rho / fd.rho_m);
}

double velocity(double rho, const FdParams& fd) {
  check_density(rho, fd, "velocity");
  return fd.v_f * (1.0 - rho / fd.rho_m);
}

double characteristic_speed(double rho, const FdParams& fd) {
  check_density(rho, fd, "characteristic_speed");
  return fd.v_f * (1.0 - 2.0 * rho / fd.rho_m);
}

RiemannProblem::RiemannProblem(double rho_l_, double rho_r_, const FdParams& fd_)
    : rho_l(rho_l_), rho_r(rho_r_), fd(fd_) {
  check_density(rho_l, fd, "RiemannProblem");
  check_density(rho_r, fd, "RiemannProblem");
}

double shock_speed(const RiemannProblem& p) {
  if (p.rho_l == p.rho_r)
    throw std::invalid_argument("shock_speed: equal states have no shock");
  return (flux(p.rho_r, p.fd) - flux(p.rho_l, p.fd)) / (p.rho_r - p.rho_l);
}

double riemann_entropy_solution(const RiemannProblem& p, double x, double t) {
  if (!(t > 0)) throw std::invalid_argument("riemann_entropy_solution: need t > 0");
  if (p.rho_l == p.rho_r) return p.rho_l;

  if (p.rho_l < p.rho_r) {
    // Compressive: shock moving at the Rankine-Hugoniot speed.
    const double s = shock_speed(p);
    return x < s * t ? p.rho_l : p.rho_r;
  }

  // Expansive: fan between the edge characteristics; inside it the value is
  // the inverse of lambda(rho) = v_f (1 - 2 rho / rho_m) at xi = x/t.
  const double xi = x / t;
  if (xi < characteristic_speed(p.rho_l, p.fd)) return p.rho_l;
  if (xi >= characteristic_speed(p.rho_r, p.fd)) return p.rho_r;
  return 0.5 * p.fd.rho_m * (1.0 - xi / p.fd.v_f);
}

}  // namespace tse::analytic
