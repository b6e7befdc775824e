#include "superrep/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace superrep {

Payoff Payoff::basket_call(Eigen::VectorXd weights, double strike) {
  Payoff p;
  p.kind = Kind::BasketCall;
  p.weights = std::move(weights);
  p.strike = strike;
  return p;
}

Payoff Payoff::exchange() {
  Payoff p;
  p.kind = Kind::Exchange;
  return p;
}

Payoff Payoff::min_of_assets() {
  Payoff p;
  p.kind = Kind::MinOfAssets;
  return p;
}

Payoff Payoff::terminal_function(int asset, std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || xs.size() != ys.size())
    throw std::invalid_argument("Payoff::terminal_function: need at least two matching knots");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw std::invalid_argument("Payoff::terminal_function: knots must be strictly increasing");
  Payoff p;
  p.kind = Kind::TerminalFunction;
  p.asset = asset;
  p.knots_x = std::move(xs);
  p.knots_y = std::move(ys);
  return p;
}

Payoff Payoff::lookback_max(int asset) {
  Payoff p;
  p.kind = Kind::LookbackMax;
  p.asset = asset;
  return p;
}

Payoff Payoff::asian_call(int asset, double strike) {
  Payoff p;
  p.kind = Kind::AsianCall;
  p.asset = asset;
  p.strike = strike;
  return p;
}

double Payoff::terminal_value(const Eigen::VectorXd& s) const {
  switch (kind) {
    case Kind::BasketCall: {
      if (weights.size() != s.size())
        throw std::invalid_argument("Payoff: basket weight length mismatch");
      return std::max(weights.dot(s) - strike, 0.0);
    }
    case Kind::Exchange: {
      if (s.size() < 2) throw std::invalid_argument("Payoff: exchange needs two assets");
      return std::max(s(0) - s(1), 0.0);
    }
    case Kind::MinOfAssets:
      return s.minCoeff();
    case Kind::TerminalFunction: {
      if (asset < 0 || asset >= s.size()) throw std::invalid_argument("Payoff: asset index out of range");
      const double x = s(asset);
      if (x < knots_x.front() || x > knots_x.back())
        throw std::out_of_range("Payoff: terminal function evaluated outside its knot grid");
      const auto it = std::upper_bound(knots_x.begin(), knots_x.end(), x);
      const std::size_t hi = std::min<std::size_t>(it - knots_x.begin(), knots_x.size() - 1);
      const std::size_t lo = hi - 1;
      const double w = (x - knots_x[lo]) / (knots_x[hi] - knots_x[lo]);
      return (1.0 - w) * knots_y[lo] + w * knots_y[hi];
    }
    case Kind::LookbackMax:
    case Kind::AsianCall:
      throw std::invalid_argument("Payoff: path-dependent payoff has no terminal value");
  }
  throw std::logic_error("Payoff: unknown kind");
}

double Payoff::value_on_samples(const Eigen::MatrixXd& samples) const {
  const auto rows = samples.rows();
  if (rows < 1) throw std::invalid_argument("Payoff: empty sample path");
  switch (kind) {
    case Kind::LookbackMax: {
      if (asset < 0 || asset >= samples.cols())
        throw std::invalid_argument("Payoff: asset index out of range");
      return samples.col(asset).maxCoeff();
    }
    case Kind::AsianCall: {
      if (asset < 0 || asset >= samples.cols())
        throw std::invalid_argument("Payoff: asset index out of range");
      if (rows == 1) return std::max(samples(0, asset) - strike, 0.0);
      // Trapezoid rule = exact time integral of the piecewise-linear path.
      double avg = 0.5 * (samples(0, asset) + samples(rows - 1, asset));
      for (Eigen::Index k = 1; k + 1 < rows; ++k) avg += samples(k, asset);
      avg /= static_cast<double>(rows - 1);
      return std::max(avg - strike, 0.0);
    }
    default:
      return terminal_value(samples.row(rows - 1).transpose());
  }
}

std::string Payoff::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::BasketCall: {
      os << "basket_call(weights=[";
      for (Eigen::Index i = 0; i < weights.size(); ++i) os << (i ? "," : "") << weights(i);
      os << "], strike=" << strike << ")";
      break;
    }
    case Kind::Exchange: os << "exchange"; break;
    case Kind::MinOfAssets: os << "min_of_assets"; break;
    case Kind::TerminalFunction:
      os << "terminal_function(asset=" << asset + 1 << ", knots=" << knots_x.size() << ")";
      break;
    case Kind::LookbackMax: os << "lookback_max(asset=" << asset + 1 << ")"; break;
    case Kind::AsianCall: os << "asian_call(asset=" << asset + 1 << ", strike=" << strike << ")"; break;
  }
  return os.str();
}

double evaluate_payoff(const Payoff& payoff, const MarketSpec& spec, const PathIndex& leaf) {
  if (static_cast<int>(leaf.size()) != spec.n)
    throw std::invalid_argument("evaluate_payoff: expected a full-depth leaf");
  if (payoff.terminal_only()) return payoff.terminal_value(asset_prices(spec, leaf));
  return payoff.value_on_samples(path_prices(spec, leaf));
}

}  // namespace superrep
