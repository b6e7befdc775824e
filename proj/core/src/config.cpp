#include "superrep/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace superrep {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> tokens;
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_number(const std::string& tok, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: invalid number '" + tok + "' for key '" + key + "'");
  }
}

long parse_integer(const std::string& tok, const std::string& key) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ConfigError("config: invalid integer '" + tok + "' for key '" + key + "'");
  return v;
}

Eigen::VectorXd parse_vector(const std::vector<std::string>& toks, const std::string& key,
                             Eigen::Index expected) {
  if (static_cast<Eigen::Index>(toks.size()) != expected)
    throw ConfigError("config: key '" + key + "' expects " + std::to_string(expected) + " numbers");
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v(i) = parse_number(toks[i], key);
  return v;
}

Eigen::MatrixXd parse_matrix(const std::vector<std::string>& toks, const std::string& key,
                             Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(toks.size()) != rows * cols)
    throw ConfigError("config: key '" + key + "' expects " + std::to_string(rows * cols) +
                      " numbers (row-major)");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = parse_number(toks[i * cols + j], key);
  return m;
}

Payoff parse_payoff(const std::vector<std::string>& toks, int d) {
  if (toks.empty()) throw ConfigError("config: empty payoff");
  const std::string& kind = toks[0];
  const std::vector<std::string> args(toks.begin() + 1, toks.end());
  auto one_based_asset = [&](const std::string& tok) {
    const long a = parse_integer(tok, "payoff");
    if (a < 1 || a > d) throw ConfigError("config: payoff asset index out of range (1-based)");
    return static_cast<int>(a - 1);
  };
  if (kind == "basket_call") {
    if (static_cast<int>(args.size()) != d + 1)
      throw ConfigError("config: basket_call expects d weights and a strike");
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w(i) = parse_number(args[i], "payoff");
    return Payoff::basket_call(std::move(w), parse_number(args[d], "payoff"));
  }
  if (kind == "call") {
    // One-asset shorthand: call <strike> [asset]
    if (args.empty() || args.size() > 2) throw ConfigError("config: call expects a strike [asset]");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    w(args.size() == 2 ? one_based_asset(args[1]) : 0) = 1.0;
    return Payoff::basket_call(std::move(w), parse_number(args[0], "payoff"));
  }
  if (kind == "exchange") {
    if (!args.empty()) throw ConfigError("config: exchange takes no arguments");
    return Payoff::exchange();
  }
  if (kind == "min_of_assets" || kind == "min") {
    if (!args.empty()) throw ConfigError("config: min_of_assets takes no arguments");
    return Payoff::min_of_assets();
  }
  if (kind == "lookback_max") {
    if (args.size() != 1) throw ConfigError("config: lookback_max expects an asset index");
    return Payoff::lookback_max(one_based_asset(args[0]));
  }
  if (kind == "asian_call") {
    if (args.size() != 2) throw ConfigError("config: asian_call expects asset and strike");
    return Payoff::asian_call(one_based_asset(args[0]), parse_number(args[1], "payoff"));
  }
  if (kind == "terminal_function") {
    if (args.size() < 5 || (args.size() - 1) % 2 != 0)
      throw ConfigError("config: terminal_function expects asset plus x y knot pairs");
    const int asset = one_based_asset(args[0]);
    std::vector<double> xs, ys;
    for (std::size_t i = 1; i + 1 < args.size(); i += 2) {
      xs.push_back(parse_number(args[i], "payoff"));
      ys.push_back(parse_number(args[i + 1], "payoff"));
    }
    return Payoff::terminal_function(asset, std::move(xs), std::move(ys));
  }
  throw ConfigError("config: unknown payoff kind '" + kind + "'");
}

}  // namespace

MarketConfig parse_market_config(const std::string& text) {
  std::map<std::string, std::vector<std::string>> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
    if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
    kv[key] = split_tokens(value);
  }

  auto require = [&](const std::string& key) -> const std::vector<std::string>& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("config: missing key '" + key + "'");
    return it->second;
  };
  auto take = [&](const std::string& key) -> std::optional<std::vector<std::string>> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  const auto& dtok = require("d");
  if (dtok.size() != 1) throw ConfigError("config: key 'd' expects one integer");
  const int d = static_cast<int>(parse_integer(dtok[0], "d"));
  const auto& ntok = require("n");
  if (ntok.size() != 1) throw ConfigError("config: key 'n' expects one integer");
  const int n = static_cast<int>(parse_integer(ntok[0], "n"));
  if (d < 1 || n < 1) throw ConfigError("config: d and n must be positive");

  std::string driver = "simplex";
  if (auto t = take("driver")) {
    if (t->size() != 1) throw ConfigError("config: key 'driver' expects one token");
    driver = (*t)[0];
  }

  MarketConfig out;
  try {
    if (driver == "simplex") {
      Eigen::MatrixXd sigma = parse_matrix(require("sigma"), "sigma", d, d);
      Eigen::VectorXd s0 = parse_vector(require("s0"), "s0", d);
      Eigen::VectorXd kp = parse_vector(require("kappa_plus"), "kappa_plus", d);
      Eigen::VectorXd km = parse_vector(require("kappa_minus"), "kappa_minus", d);
      std::optional<SimplexBasis> basis;
      if (auto t = take("basis"))
        basis = SimplexBasis::from_vertices(parse_matrix(*t, "basis", d + 1, d));
      out.spec = make_simplex_market(d, n, std::move(sigma), std::move(s0), std::move(kp),
                                     std::move(km), std::move(basis));
    } else if (driver == "product_crr") {
      Eigen::VectorXd s0 = parse_vector(require("s0"), "s0", d);
      out.spec = make_product_crr_market(d, n, std::move(s0));
    } else {
      throw ConfigError("config: unknown driver '" + driver + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  out.payoff = parse_payoff(require("payoff"), d);
  if (auto t = take("control_variance"))
    out.control_variance = parse_matrix(*t, "control_variance", d, d);
  return out;
}

MarketConfig load_market_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_market_config(buf.str());
}

}  // namespace superrep
