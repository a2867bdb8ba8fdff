#ifndef TSE_ANALYTIC_HPP
#define TSE_ANALYTIC_HPP

#include "tse/grid.hpp"

namespace tse::analytic {

/// Greenshields flux q(rho) = rho * v_f * (1 - rho/rho_m).
/// rho outside [0, rho_m] is a domain error, not a clamp.
double flux(double rho, const FdParams& fd);

/// v(rho) = v_f * (1 - rho/rho_m).
double velocity(double rho, const FdParams& fd);

/// lambda(rho) = q'(rho) = v_f * (1 - 2*rho/rho_m).
double characteristic_speed(double rho, const FdParams& fd);

/// Two-state initial condition rho_l for x < 0, rho_r for x >= 0.
struct RiemannProblem {
  double rho_l = 0, rho_r = 0;
  FdParams fd;

  RiemannProblem(double rho_l_, double rho_r_, const FdParams& fd_);
};

/// Rankine-Hugoniot speed s = (q(rho_r) - q(rho_l)) / (rho_r - rho_l).
double shock_speed(const RiemannProblem& p);

/// Entropy solution at (x, t), t > 0. A compressive pair (rho_l < rho_r)
/// travels as a shock; an expansive pair opens a rarefaction fan whose
/// interior value is the characteristic inverse lambda^{-1}(x/t); equal
/// states stay constant.
double riemann_entropy_solution(const RiemannProblem& p, double x, double t);

}  // namespace tse::analytic

#endif  // TSE_ANALYTIC_HPP
