#pragma once

#include <Eigen/Dense>

#include "superrep/corridor.hpp"
#include "superrep/payoff.hpp"

namespace superrep {

/// Zero-rate, maturity-one Black-Scholes call with total volatility nu:
///   C(s, K, nu) = s N(ln(s/K)/nu + nu/2) - K N(ln(s/K)/nu - nu/2),
/// reducing to (s - K)^+ at nu = 0.
double black_scholes_call(double s, double strike, double nu);

/// Scaling-limit price of the exchange option (S^1_T - S^2_T)^+ for d = 2:
/// the Black-Scholes call C(s_1, s_2, nu*) at the corridor's widest spread
/// volatility nu* = sqrt(sup over Gamma of a11 + a22 - a12 - a21).
double margrabe_limit_price(const VolatilityCorridor& corr, const Eigen::Vector2d& s0);

/// d = 1 volatility interval of the corridor: variance range
/// sigma^2 +- sigma (kappa^+ + kappa^-) clipped at zero, as volatilities.
struct VolBand {
  double nu_min = 0.0;
  double nu_max = 0.0;
};
VolBand kusuoka_band_d1(const VolatilityCorridor& corr);

struct GExpectationProblem {
  VolatilityCorridor corridor;
  Eigen::VectorXd s0;
  Payoff payoff;  // terminal-only
};

struct PdeGrid {
  int nodes_per_axis = 200;
  int time_steps = 400;  // raised automatically to meet the CFL bound
};

struct PdeResult {
  double price = 0.0;
  int time_steps_used = 0;
  long psd_projections = 0;  // corridor corners clipped to the PSD cone
};

/// Finite-difference value of the volatility-control problem for terminal
/// payoffs in d <= 2: explicit scheme in log-price coordinates for
///   u_t + sup_{a in Gamma} [ 1/2 sum a_ij d2u/dx_i dx_j - 1/2 a_ii du/dx_i ] = 0,
/// terminal condition the payoff, linear (zero second derivative) boundary
/// conditions at +-4 standard deviations of the widest corridor volatility.
/// The pointwise sup is the coefficient-clamping maximizer over the corridor
/// box; maximizers outside the PSD cone are projected onto it.
PdeResult bsb_pde_price(const GExpectationProblem& problem, const PdeGrid& grid);

}  // namespace superrep
