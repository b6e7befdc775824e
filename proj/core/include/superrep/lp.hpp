#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace superrep {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ObjSense { Minimize, Maximize };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// Sparse linear program
///
///   opt  c'x   subject to   A x {<=,=,>=} rhs,   lower <= x <= upper,
///
/// with the constraint matrix held in triplet form. Duplicate triplets for
/// the same (row, col) are summed.
struct LinearProgram {
  ObjSense sense = ObjSense::Minimize;
  std::vector<double> objective;
  std::vector<double> lower, upper;
  std::vector<RowSense> row_sense;
  std::vector<double> rhs;

  struct Entry {
    int32_t row;
    int32_t col;
    double value;
  };
  std::vector<Entry> entries;

  int add_variable(double obj, double lo, double hi);
  int add_row(RowSense s, double rhs_value);
  void add_entry(int row, int col, double value);

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  /// Throws std::invalid_argument on inconsistent dimensions, empty variable
  /// set, non-finite matrix entries, or crossed bounds.
  void validate() const;
};

struct LPSolution {
  LPStatus status = LPStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> primal;        // per variable
  std::vector<double> dual;          // per row, minimize convention
  std::vector<double> reduced_cost;  // per variable
  std::vector<double> farkas;        // per row; nonempty iff Infeasible
  long iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
};

struct SolverOptions {
  double pivot_tol = 1e-9;        // absolute pivot admissibility
  double feas_tol = 1e-7;         // relative feasibility tolerance
  long max_iterations = -1;       // -1: derived from problem size
  bool scale = true;              // geometric row/column equilibration
  int refactor_interval = 64;     // basis refactorization cadence
};

/// Bounded-variable revised simplex (phase 1 feasibility + phase 2), sparse
/// LU basis with product-form updates, Dantzig pricing over rotating blocks
/// with a Bland's-rule fallback once degeneracy is detected. Deterministic:
/// identical inputs produce identical pivot sequences and solutions.
LPSolution solve_lp(const LinearProgram& lp, const SolverOptions& options = {});

/// Certificate margin of an infeasibility ray: positive means the ray proves
/// that no x satisfies the rows and bounds simultaneously.
double farkas_certificate_margin(const LinearProgram& lp, const std::vector<double>& ray);

/// Plain-text dump (sense, dimensions, triplets, senses/rhs, bounds) for
/// cross-checking against external solvers; format documented in the README.
void write_lp_text(const LinearProgram& lp, std::ostream& os);

}  // namespace superrep
