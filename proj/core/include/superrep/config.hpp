#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

#include "superrep/market.hpp"
#include "superrep/payoff.hpp"

namespace superrep {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parsed `key = value` market configuration. Keys (see README for the full
/// schema): d, n, sigma (row-major), s0, kappa_plus, kappa_minus, driver
/// (simplex | product_crr), basis (optional vertex rows), payoff, and the
/// optional control_variance / control_breakpoints used by simulation runs.
/// Asset indices in config files are 1-based.
struct MarketConfig {
  MarketSpec spec;
  Payoff payoff;
  std::optional<Eigen::MatrixXd> control_variance;  // d x d target for simulations
};

MarketConfig parse_market_config(const std::string& text);
MarketConfig load_market_config(const std::string& path);

}  // namespace superrep
