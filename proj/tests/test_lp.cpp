#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "superrep/lp.hpp"

using namespace superrep;

namespace {

LinearProgram random_box_lp(std::mt19937_64& rng, int nv, int nr) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  LinearProgram lp;
  lp.sense = (rng() & 1) ? ObjSense::Maximize : ObjSense::Minimize;
  Eigen::VectorXd x0(nv);
  for (int j = 0; j < nv; ++j) {
    lp.add_variable(sym(rng), 0.0, 1.0);
    x0(j) = 0.2 + 0.6 * unit(rng);
  }
  for (int i = 0; i < nr; ++i) {
    Eigen::RowVectorXd a(nv);
    for (int j = 0; j < nv; ++j) a(j) = sym(rng);
    const double slack = 0.05 + 0.95 * unit(rng);
    if (rng() % 3 == 0) {
      const int row = lp.add_row(RowSense::GreaterEqual, a.dot(x0) - slack);
      for (int j = 0; j < nv; ++j) lp.add_entry(row, j, a(j));
    } else {
      const int row = lp.add_row(RowSense::LessEqual, a.dot(x0) + slack);
      for (int j = 0; j < nv; ++j) lp.add_entry(row, j, a(j));
    }
  }
  return lp;
}

// Bound-form dual objective from the returned multipliers and reduced costs.
double dual_bound_value(const LinearProgram& lp, const LPSolution& sol) {
  const bool maximize = lp.sense == ObjSense::Maximize;
  double g = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) g += sol.dual[i] * lp.rhs[i];
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double rc = sol.reduced_cost[j];
    if (std::abs(rc) <= 1e-9 * (1.0 + std::abs(lp.objective[j]))) continue;
    const bool use_lower = maximize ? rc < 0 : rc > 0;
    g += rc * (use_lower ? lp.lower[j] : lp.upper[j]);
  }
  return g;
}

}  // namespace

TEST_CASE("lp: one-variable maximum at the bound") {
  LinearProgram lp;
  lp.sense = ObjSense::Maximize;
  lp.add_variable(1.0, 0.0, kInf);
  const int row = lp.add_row(RowSense::LessEqual, 3.0);
  lp.add_entry(row, 0, 1.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sol.primal[0] == doctest::Approx(3.0));
}

TEST_CASE("lp: two variables sharing one budget row") {
  LinearProgram lp;
  lp.sense = ObjSense::Maximize;
  lp.add_variable(1.0, 0.0, kInf);
  lp.add_variable(1.0, 0.0, kInf);
  const int row = lp.add_row(RowSense::LessEqual, 1.0);
  lp.add_entry(row, 0, 1.0);
  lp.add_entry(row, 1, 1.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lp: six-variable instance matches the vertex oracle") {
  std::mt19937_64 rng(12345);
  const LinearProgram lp = random_box_lp(rng, 6, 5);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  const auto oracle = oracles::vertex_enumeration_optimum(lp);
  REQUIRE(oracle.has_value());
  CHECK(std::abs(sol.objective - *oracle) <= 1e-9);
}

TEST_CASE("lp: seeded random instances match the vertex oracle") {
  std::mt19937_64 rng(987654321);
  for (int trial = 0; trial < 60; ++trial) {
    const int nv = 2 + static_cast<int>(rng() % 7);
    const int nr = 1 + static_cast<int>(rng() % std::min(6, 14 - nv));
    const LinearProgram lp = random_box_lp(rng, nv, nr);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == LPStatus::Optimal);
    const auto oracle = oracles::vertex_enumeration_optimum(lp);
    REQUIRE(oracle.has_value());
    CAPTURE(trial);
    CHECK(std::abs(sol.objective - *oracle) <= 1e-9);
    CHECK(sol.primal_residual <= 1e-7);
    CHECK(sol.dual_residual <= 1e-7);
    CHECK(sol.complementarity <= 1e-7);
    // Strong duality from the returned multipliers.
    CHECK(std::abs(dual_bound_value(lp, sol) - sol.objective) <=
          1e-7 * (1.0 + std::abs(sol.objective)));
  }
}

TEST_CASE("lp: equality rows and free variables") {
  // min x + y  s.t.  x - y = 2,  x + y >= 1, y free in [-5, 5].
  LinearProgram lp;
  lp.add_variable(1.0, -kInf, kInf);
  lp.add_variable(1.0, -5.0, 5.0);
  int row = lp.add_row(RowSense::Equal, 2.0);
  lp.add_entry(row, 0, 1.0);
  lp.add_entry(row, 1, -1.0);
  row = lp.add_row(RowSense::GreaterEqual, 1.0);
  lp.add_entry(row, 0, 1.0);
  lp.add_entry(row, 1, 1.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("lp: infeasible instance returns a verified Farkas ray") {
  LinearProgram lp;
  lp.add_variable(0.0, 0.0, kInf);
  int row = lp.add_row(RowSense::GreaterEqual, 1.0);
  lp.add_entry(row, 0, 1.0);
  row = lp.add_row(RowSense::LessEqual, 0.5);
  lp.add_entry(row, 0, 1.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Infeasible);
  REQUIRE(sol.farkas.size() == 2);
  CHECK(farkas_certificate_margin(lp, sol.farkas) > 1e-9);
}

TEST_CASE("lp: infeasible equality pair certificate") {
  // x + y = 1 and x + y = 2 cannot hold together.
  LinearProgram lp;
  lp.add_variable(0.0, -10.0, 10.0);
  lp.add_variable(0.0, -10.0, 10.0);
  int row = lp.add_row(RowSense::Equal, 1.0);
  lp.add_entry(row, 0, 1.0);
  lp.add_entry(row, 1, 1.0);
  row = lp.add_row(RowSense::Equal, 2.0);
  lp.add_entry(row, 0, 1.0);
  lp.add_entry(row, 1, 1.0);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::Infeasible);
  CHECK(farkas_certificate_margin(lp, sol.farkas) > 1e-9);
}

TEST_CASE("lp: unbounded direction is reported") {
  LinearProgram lp;
  lp.sense = ObjSense::Maximize;
  lp.add_variable(1.0, 0.0, kInf);
  const auto sol = solve_lp(lp);
  CHECK(sol.status == LPStatus::Unbounded);
}

TEST_CASE("lp: deterministic pivot sequences") {
  std::mt19937_64 rng(777);
  const LinearProgram lp = random_box_lp(rng, 7, 5);
  const auto a = solve_lp(lp);
  const auto b = solve_lp(lp);
  REQUIRE(a.status == LPStatus::Optimal);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.primal.size() == b.primal.size());
  for (std::size_t j = 0; j < a.primal.size(); ++j) CHECK(a.primal[j] == b.primal[j]);
}

TEST_CASE("lp: validation rejects malformed programs") {
  LinearProgram lp;
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);  // no variables
  lp.add_variable(1.0, 1.0, -1.0);
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);  // crossed bounds
}

TEST_CASE("lp: text dump round trips the dimensions") {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 2.0);
  const int row = lp.add_row(RowSense::LessEqual, 1.5);
  lp.add_entry(row, 0, 3.0);
  std::ostringstream os;
  write_lp_text(lp, os);
  const std::string text = os.str();
  CHECK(text.find("sense min") != std::string::npos);
  CHECK(text.find("vars 1") != std::string::npos);
  CHECK(text.find("entry 0 0 3") != std::string::npos);
}
