#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "superrep/market.hpp"

namespace superrep {

/// Payoff functional evaluated on the linearly interpolated price path.
/// Terminal kinds read only the final prices; LookbackMax and AsianCall are
/// evaluated on the n+1 grid samples, which is exact for piecewise-linear
/// paths (the max is attained at a grid point, the time integral is the
/// trapezoid sum).
struct Payoff {
  enum class Kind { BasketCall, Exchange, MinOfAssets, TerminalFunction, LookbackMax, AsianCall };

  Kind kind = Kind::MinOfAssets;
  Eigen::VectorXd weights;  // BasketCall
  double strike = 0.0;      // BasketCall, AsianCall
  int asset = 0;            // TerminalFunction, LookbackMax, AsianCall
  std::vector<double> knots_x, knots_y;  // TerminalFunction, strictly increasing knots

  static Payoff basket_call(Eigen::VectorXd weights, double strike);
  static Payoff exchange();
  static Payoff min_of_assets();
  /// f(S^asset_T) by linear interpolation on [knots_x.front(), knots_x.back()];
  /// evaluation outside the knot range throws (no extrapolation).
  static Payoff terminal_function(int asset, std::vector<double> xs, std::vector<double> ys);
  static Payoff lookback_max(int asset);
  static Payoff asian_call(int asset, double strike);

  bool terminal_only() const {
    return kind != Kind::LookbackMax && kind != Kind::AsianCall;
  }

  /// Value for a terminal price vector; throws for path-dependent kinds.
  double terminal_value(const Eigen::VectorXd& s) const;

  /// Value on the (k+1) x d matrix of grid samples of the interpolated path.
  double value_on_samples(const Eigen::MatrixXd& samples) const;

  std::string describe() const;
};

/// F applied to the interpolated path of the given full-depth leaf.
double evaluate_payoff(const Payoff& payoff, const MarketSpec& spec, const PathIndex& leaf);

}  // namespace superrep
