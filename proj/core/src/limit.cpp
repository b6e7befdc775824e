#include "superrep/limit.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace superrep {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double black_scholes_call(double s, double strike, double nu) {
  if (!(s > 0.0) || !(strike > 0.0))
    throw std::invalid_argument("black_scholes_call: s and strike must be positive");
  if (nu < 0.0) throw std::invalid_argument("black_scholes_call: nu must be nonnegative");
  if (nu == 0.0) return std::max(s - strike, 0.0);
  const double log_moneyness = std::log(s / strike) / nu;
  return s * norm_cdf(log_moneyness + 0.5 * nu) - strike * norm_cdf(log_moneyness - 0.5 * nu);
}

double margrabe_limit_price(const VolatilityCorridor& corr, const Eigen::Vector2d& s0) {
  if (corr.dimension() != 2) throw std::invalid_argument("margrabe_limit_price: d must be 2");
  if (!(s0.minCoeff() > 0.0)) throw std::invalid_argument("margrabe_limit_price: prices must be positive");
  Eigen::Matrix2d weight;
  weight << 1.0, -1.0, -1.0, 1.0;  // trace(W a) = a11 + a22 - a12 - a21
  const double spread_var = sup_linear_over_gamma(corr, weight).value;
  return black_scholes_call(s0(0), s0(1), std::sqrt(std::max(spread_var, 0.0)));
}

VolBand kusuoka_band_d1(const VolatilityCorridor& corr) {
  if (corr.dimension() != 1) throw std::invalid_argument("kusuoka_band_d1: d must be 1");
  const double sigma = corr.sigma(0, 0);
  const double width = corr.kappa_plus(0) + corr.kappa_minus(0);
  const double var_lo = std::max(sigma * sigma - std::abs(sigma) * width, 0.0);
  const double var_hi = std::max(sigma * sigma + std::abs(sigma) * width, 0.0);
  return {std::sqrt(var_lo), std::sqrt(var_hi)};
}

namespace {

// Pointwise Hamiltonian data shared by every grid node of one time step.
struct SupContext {
  int d = 0;
  Eigen::MatrixXd p;          // (d+1) x d, rows v_j sigma'
  Eigen::MatrixXd vertices;   // (d+1) x d
  Eigen::MatrixXd ss;         // sigma sigma'
  Eigen::MatrixXd sigma;
  Eigen::VectorXd box_upper;  // c_k
};

// sup over the corridor of trace(W a) with clamped box coordinates; the
// maximizer is projected onto the PSD cone when a corridor corner is
// indefinite (projection counted by the caller via `clipped`).
double hamiltonian(const SupContext& ctx, const Eigen::MatrixXd& w_mat, bool& clipped) {
  const int d = ctx.d;
  const int m = d + 1;
  // Coefficient of w_jk is 2 (v_j sigma' W)_k.
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < m; ++j) {
      double coef = 0.0;
      for (int q = 0; q < d; ++q) coef += ctx.p(j, q) * w_mat(q, k);
      if (coef > 0.0) beta.col(k) += ctx.box_upper(k) * ctx.vertices.row(j).transpose();
    }
  }
  const Eigen::MatrixXd t = ctx.sigma * beta;
  Eigen::MatrixXd a = ctx.ss + t + t.transpose();

  clipped = false;
  if (d == 1) {
    if (a(0, 0) < 0.0) {
      a(0, 0) = 0.0;
      clipped = true;
    }
  } else {
    const double mean = 0.5 * (a(0, 0) + a(1, 1));
    const double radius = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
    if (mean - radius < 0.0) {
      // Clip the negative eigenvalue of the symmetric 2x2 matrix.
      const double lo = 0.0, hi = std::max(mean + radius, 0.0);
      double c = 1.0, s = 0.0;
      if (a(0, 1) != 0.0 || a(0, 0) != a(1, 1)) {
        const double theta = 0.5 * std::atan2(2.0 * a(0, 1), a(0, 0) - a(1, 1));
        c = std::cos(theta);
        s = std::sin(theta);
      }
      a(0, 0) = hi * c * c + lo * s * s;
      a(1, 1) = hi * s * s + lo * c * c;
      a(0, 1) = a(1, 0) = (hi - lo) * c * s;
      clipped = true;
    }
  }
  return (w_mat * a).trace();
}

}  // namespace

PdeResult bsb_pde_price(const GExpectationProblem& problem, const PdeGrid& grid) {
  const int d = problem.corridor.dimension();
  if (d != 1 && d != 2) throw std::invalid_argument("bsb_pde_price: d must be 1 or 2");
  if (!problem.payoff.terminal_only())
    throw std::invalid_argument("bsb_pde_price: payoff must be terminal-only");
  if (problem.s0.size() != d || !(problem.s0.minCoeff() > 0.0))
    throw std::invalid_argument("bsb_pde_price: invalid initial prices");
  const int nn = grid.nodes_per_axis;
  if (nn < 5) throw std::invalid_argument("bsb_pde_price: need at least 5 nodes per axis");

  SupContext ctx;
  ctx.d = d;
  ctx.vertices = problem.corridor.basis.vertices();
  ctx.sigma = problem.corridor.sigma;
  ctx.ss = ctx.sigma * ctx.sigma.transpose();
  ctx.p = ctx.vertices * ctx.sigma.transpose();
  ctx.box_upper = problem.corridor.box_upper;

  // Axis-wise volatility extremes over the corridor set the grid span and the
  // stability bound.
  Eigen::VectorXd var_max(d);
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    w(i, i) = 1.0;
    var_max(i) = std::max(sup_linear_over_gamma(problem.corridor, w).value, 1e-12);
  }
  double cross_max = 0.0;
  if (d == 2) {
    Eigen::Matrix2d w;
    w << 0.0, 0.5, 0.5, 0.0;
    cross_max = std::max({sup_linear_over_gamma(problem.corridor, w).value,
                          sup_linear_over_gamma(problem.corridor, -w).value, 0.0});
  }

  std::vector<double> dx(d), x0(d);
  for (int i = 0; i < d; ++i) {
    const double span = 8.0 * std::sqrt(var_max(i));
    dx[i] = span / (nn - 1);
    x0[i] = std::log(problem.s0(i)) - dx[i] * (nn / 2);
  }

  double rate = 0.0;
  for (int i = 0; i < d; ++i) rate += var_max(i) / (dx[i] * dx[i]) + 0.5 * var_max(i) / dx[i];
  if (d == 2) rate += cross_max / (dx[0] * dx[1]);
  const double dt_bound = 0.9 / rate;
  int steps = std::max(grid.time_steps, static_cast<int>(std::ceil(1.0 / dt_bound)));
  if (steps > 50000000)
    throw std::invalid_argument("bsb_pde_price: CFL bound needs more than 5e7 time steps");
  const double dt = 1.0 / steps;

  PdeResult out;
  out.time_steps_used = steps;

  const long total = (d == 1) ? nn : static_cast<long>(nn) * nn;
  std::vector<double> u(total), unew(total);
  Eigen::VectorXd s(d);
  if (d == 1) {
    for (int i = 0; i < nn; ++i) {
      s(0) = std::exp(x0[0] + i * dx[0]);
      u[i] = problem.payoff.terminal_value(s);
    }
  } else {
    for (int i = 0; i < nn; ++i) {
      for (int j = 0; j < nn; ++j) {
        s(0) = std::exp(x0[0] + i * dx[0]);
        s(1) = std::exp(x0[1] + j * dx[1]);
        u[i * nn + j] = problem.payoff.terminal_value(s);
      }
    }
  }

  Eigen::MatrixXd w_mat(d, d);
  long clip_count = 0;
  for (int step = 0; step < steps; ++step) {
    if (d == 1) {
      const double inv_dx2 = 1.0 / (dx[0] * dx[0]);
      const double inv_2dx = 0.5 / dx[0];
      for (int i = 1; i + 1 < nn; ++i) {
        const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
        const double d1 = (u[i + 1] - u[i - 1]) * inv_2dx;
        w_mat(0, 0) = 0.5 * (d2 - d1);
        bool clipped = false;
        unew[i] = u[i] + dt * hamiltonian(ctx, w_mat, clipped);
        if (clipped) ++clip_count;
      }
      unew[0] = 2.0 * unew[1] - unew[2];
      unew[nn - 1] = 2.0 * unew[nn - 2] - unew[nn - 3];
    } else {
      const double inv_dx2 = 1.0 / (dx[0] * dx[0]);
      const double inv_dy2 = 1.0 / (dx[1] * dx[1]);
      const double inv_2dx = 0.5 / dx[0];
      const double inv_2dy = 0.5 / dx[1];
      const double inv_4dxdy = 0.25 / (dx[0] * dx[1]);
      for (int i = 1; i + 1 < nn; ++i) {
        for (int j = 1; j + 1 < nn; ++j) {
          const long c = static_cast<long>(i) * nn + j;
          const double dxx = (u[c + nn] - 2.0 * u[c] + u[c - nn]) * inv_dx2;
          const double dyy = (u[c + 1] - 2.0 * u[c] + u[c - 1]) * inv_dy2;
          const double dxc = (u[c + nn] - u[c - nn]) * inv_2dx;
          const double dyc = (u[c + 1] - u[c - 1]) * inv_2dy;
          const double dxy =
              (u[c + nn + 1] + u[c - nn - 1] - u[c + nn - 1] - u[c - nn + 1]) * inv_4dxdy;
          w_mat(0, 0) = 0.5 * (dxx - dxc);
          w_mat(1, 1) = 0.5 * (dyy - dyc);
          w_mat(0, 1) = w_mat(1, 0) = 0.5 * dxy;
          bool clipped = false;
          unew[c] = u[c] + dt * hamiltonian(ctx, w_mat, clipped);
          if (clipped) ++clip_count;
        }
      }
      for (int j = 1; j + 1 < nn; ++j) {
        unew[j] = 2.0 * unew[nn + j] - unew[2 * nn + j];
        unew[static_cast<long>(nn - 1) * nn + j] =
            2.0 * unew[static_cast<long>(nn - 2) * nn + j] - unew[static_cast<long>(nn - 3) * nn + j];
      }
      for (int i = 0; i < nn; ++i) {
        unew[static_cast<long>(i) * nn] = 2.0 * unew[static_cast<long>(i) * nn + 1] - unew[static_cast<long>(i) * nn + 2];
        unew[static_cast<long>(i) * nn + nn - 1] =
            2.0 * unew[static_cast<long>(i) * nn + nn - 2] - unew[static_cast<long>(i) * nn + nn - 3];
      }
    }
    std::swap(u, unew);
  }
  out.psd_projections = clip_count;
  out.price = (d == 1) ? u[nn / 2] : u[static_cast<long>(nn / 2) * nn + nn / 2];
  return out;
}

}  // namespace superrep
