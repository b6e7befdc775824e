#include "superrep/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace superrep {

int LinearProgram::add_variable(double obj, double lo, double hi) {
  objective.push_back(obj);
  lower.push_back(lo);
  upper.push_back(hi);
  return static_cast<int>(objective.size()) - 1;
}

int LinearProgram::add_row(RowSense s, double rhs_value) {
  row_sense.push_back(s);
  rhs.push_back(rhs_value);
  return static_cast<int>(rhs.size()) - 1;
}

void LinearProgram::add_entry(int row, int col, double value) {
  if (value != 0.0) entries.push_back({row, col, value});
}

void LinearProgram::validate() const {
  const int n = num_vars();
  const int m = num_rows();
  if (n < 1) throw std::invalid_argument("LinearProgram: at least one variable required");
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
    throw std::invalid_argument("LinearProgram: bound sizes do not match variable count");
  if (static_cast<int>(row_sense.size()) != m)
    throw std::invalid_argument("LinearProgram: row sense count does not match rhs count");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || !std::isfinite(objective[j]))
      throw std::invalid_argument("LinearProgram: non-finite objective or NaN bound");
    if (lower[j] > upper[j])
      throw std::invalid_argument("LinearProgram: crossed bounds on variable " + std::to_string(j));
  }
  for (double v : rhs)
    if (!std::isfinite(v)) throw std::invalid_argument("LinearProgram: non-finite rhs");
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n)
      throw std::invalid_argument("LinearProgram: entry index out of range");
    if (!std::isfinite(e.value)) throw std::invalid_argument("LinearProgram: non-finite matrix entry");
  }
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

enum VStat : int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFree = 3 };

struct UnboundedSignal {};

struct Csc {
  int rows = 0, cols = 0;
  std::vector<int> ptr, idx;
  std::vector<double> val;
};

struct Eta {
  int pos = -1;
  double pivot = 0.0;
  std::vector<std::pair<int, double>> entries;  // excludes pos
};

// Bounded-variable revised simplex on the computational form
//   min c'z,  [A I] z = b,  l <= z <= u,
// with slack bounds encoding the row senses. Phase 1 minimizes the sum of
// bound violations of the basic variables starting from the all-slack basis.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) { build(); }

  LPSolution run();

 private:
  void build();
  void equilibrate(std::vector<LinearProgram::Entry>& ents);
  void refactorize();
  void recompute_basics();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v);
  double column_dot(int j, const Eigen::VectorXd& y) const;
  bool basic_below(int pos) const;
  bool basic_above(int pos) const;
  bool any_infeasible_basic() const;
  int price(const Eigen::VectorXd& y, bool phase1, int& dir);
  bool iterate(bool phase1);
  LPSolution finish(LPStatus status, const Eigen::VectorXd& final_y);

  const LinearProgram& lp_;
  SolverOptions opt_;

  int m_ = 0;   // rows
  int ns_ = 0;  // structural columns
  int nt_ = 0;  // structural + slack columns
  Csc a_;       // scaled [A I]
  std::vector<double> c_, lo_, up_, b_;
  std::vector<double> row_scale_, col_scale_;

  std::vector<int> basis_;  // position -> column
  std::vector<int8_t> vstat_;
  std::vector<double> x_;

  Eigen::SparseLU<SpMat> lu_;
  std::vector<Eta> etas_;

  // Last successfully factorized state; restored when a pivot run drives the
  // basis numerically singular.
  std::vector<int> snap_basis_;
  std::vector<int8_t> snap_vstat_;
  int restores_ = 0;
  long careful_until_ = 0;

  long iterations_ = 0;
  int degen_run_ = 0;
  bool bland_ = false;
  int cursor_ = 0;
  long max_iter_ = 0;
  bool maximize_ = false;
};

void Simplex::equilibrate(std::vector<LinearProgram::Entry>& ents) {
  row_scale_.assign(m_, 1.0);
  col_scale_.assign(ns_, 1.0);
  if (!opt_.scale || ents.empty()) return;
  auto clamp = [](double s) { return std::min(std::max(s, 1e-8), 1e8); };
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
    for (const auto& e : ents) {
      const double v = std::abs(e.value) * row_scale_[e.row] * col_scale_[e.col];
      if (v > 0) {
        rmin[e.row] = std::min(rmin[e.row], v);
        rmax[e.row] = std::max(rmax[e.row], v);
      }
    }
    for (int i = 0; i < m_; ++i)
      if (rmax[i] > 0) row_scale_[i] = clamp(row_scale_[i] / std::sqrt(rmin[i] * rmax[i]));
    std::vector<double> cmin(ns_, kInf), cmax(ns_, 0.0);
    for (const auto& e : ents) {
      const double v = std::abs(e.value) * row_scale_[e.row] * col_scale_[e.col];
      if (v > 0) {
        cmin[e.col] = std::min(cmin[e.col], v);
        cmax[e.col] = std::max(cmax[e.col], v);
      }
    }
    for (int j = 0; j < ns_; ++j)
      if (cmax[j] > 0) col_scale_[j] = clamp(col_scale_[j] / std::sqrt(cmin[j] * cmax[j]));
  }
}

void Simplex::build() {
  lp_.validate();
  m_ = lp_.num_rows();
  ns_ = lp_.num_vars();
  nt_ = ns_ + m_;
  maximize_ = lp_.sense == ObjSense::Maximize;

  auto ents = lp_.entries;
  equilibrate(ents);

  // Scaled data; variable substitution x_j = col_scale_j * z_j.
  c_.assign(nt_, 0.0);
  lo_.assign(nt_, 0.0);
  up_.assign(nt_, 0.0);
  for (int j = 0; j < ns_; ++j) {
    const double s = col_scale_[j];
    c_[j] = (maximize_ ? -lp_.objective[j] : lp_.objective[j]) * s;
    lo_[j] = lp_.lower[j] / s;
    up_[j] = lp_.upper[j] / s;
  }
  b_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    b_[i] = lp_.rhs[i] * row_scale_[i];
    const int sj = ns_ + i;
    switch (lp_.row_sense[i]) {
      case RowSense::LessEqual: lo_[sj] = 0.0; up_[sj] = kInf; break;
      case RowSense::Equal: lo_[sj] = 0.0; up_[sj] = 0.0; break;
      case RowSense::GreaterEqual: lo_[sj] = -kInf; up_[sj] = 0.0; break;
    }
  }

  // CSC of [A I] with duplicate entries summed.
  std::sort(ents.begin(), ents.end(), [](const auto& a, const auto& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  a_.rows = m_;
  a_.cols = nt_;
  a_.ptr.assign(nt_ + 1, 0);
  a_.idx.reserve(ents.size() + m_);
  a_.val.reserve(ents.size() + m_);
  std::size_t k = 0;
  for (int j = 0; j < ns_; ++j) {
    a_.ptr[j] = static_cast<int>(a_.idx.size());
    while (k < ents.size() && ents[k].col == j) {
      const int row = ents[k].row;
      double v = 0.0;
      while (k < ents.size() && ents[k].col == j && ents[k].row == row) {
        v += ents[k].value;
        ++k;
      }
      v *= row_scale_[row] * col_scale_[j];
      if (v != 0.0) {
        a_.idx.push_back(row);
        a_.val.push_back(v);
      }
    }
  }
  for (int i = 0; i < m_; ++i) {
    a_.ptr[ns_ + i] = static_cast<int>(a_.idx.size());
    a_.idx.push_back(i);
    a_.val.push_back(1.0);
  }
  a_.ptr[nt_] = static_cast<int>(a_.idx.size());

  // All-slack starting basis; nonbasic structurals at a finite bound.
  basis_.resize(m_);
  vstat_.assign(nt_, kAtLower);
  x_.assign(nt_, 0.0);
  for (int j = 0; j < ns_; ++j) {
    if (std::isfinite(lo_[j])) {
      vstat_[j] = kAtLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(up_[j])) {
      vstat_[j] = kAtUpper;
      x_[j] = up_[j];
    } else {
      vstat_[j] = kFree;
      x_[j] = 0.0;
    }
  }
  for (int i = 0; i < m_; ++i) {
    basis_[i] = ns_ + i;
    vstat_[ns_ + i] = kBasic;
  }

  max_iter_ = opt_.max_iterations > 0 ? opt_.max_iterations
                                      : 20000 + 10L * (static_cast<long>(m_) + nt_);
  refactorize();
}

void Simplex::refactorize() {
  if (m_ == 0) {
    etas_.clear();
    return;
  }
  for (int attempt = 0;; ++attempt) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a_.idx.size());
    for (int pos = 0; pos < m_; ++pos) {
      const int j = basis_[pos];
      for (int p = a_.ptr[j]; p < a_.ptr[j + 1]; ++p)
        trip.emplace_back(a_.idx[p], pos, a_.val[p]);
    }
    SpMat basis_matrix(m_, m_);
    basis_matrix.setFromTriplets(trip.begin(), trip.end());
    lu_.compute(basis_matrix);
    if (lu_.info() == Eigen::Success) break;
    // Fall back to the last factorizable basis and redo the pivots since
    // then under the cautious rule (Bland entering, relative pivot filter).
    if (attempt > 0 || ++restores_ > 10 || snap_basis_.empty())
      throw std::runtime_error("solve_lp: numerically singular basis after refactorization retries");
    basis_ = snap_basis_;
    vstat_ = snap_vstat_;
    for (int j = 0; j < nt_; ++j) {
      if (vstat_[j] == kAtLower) x_[j] = lo_[j];
      else if (vstat_[j] == kAtUpper) x_[j] = up_[j];
      else if (vstat_[j] == kFree) x_[j] = 0.0;
    }
    careful_until_ = iterations_ + 300;
  }
  snap_basis_ = basis_;
  snap_vstat_ = vstat_;
  etas_.clear();
  recompute_basics();
}

void Simplex::recompute_basics() {
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b_.data(), m_);
  for (int j = 0; j < nt_; ++j) {
    if (vstat_[j] == kBasic || x_[j] == 0.0) continue;
    for (int p = a_.ptr[j]; p < a_.ptr[j + 1]; ++p) rhs[a_.idx[p]] -= a_.val[p] * x_[j];
  }
  Eigen::VectorXd xb = lu_.solve(rhs);
  for (int pos = 0; pos < m_; ++pos) x_[basis_[pos]] = xb[pos];
}

void Simplex::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  v = lu_.solve(v);
  for (const auto& e : etas_) {
    const double t = v[e.pos] / e.pivot;
    if (t != 0.0) {
      for (const auto& [i, w] : e.entries) v[i] -= w * t;
    }
    v[e.pos] = t;
  }
}

void Simplex::btran(Eigen::VectorXd& v) {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = 0.0;
    for (const auto& [i, w] : it->entries) s += w * v[i];
    v[it->pos] = (v[it->pos] - s) / it->pivot;
  }
  v = lu_.transpose().solve(v);
}

double Simplex::column_dot(int j, const Eigen::VectorXd& y) const {
  double dot = 0.0;
  for (int p = a_.ptr[j]; p < a_.ptr[j + 1]; ++p) dot += a_.val[p] * y[a_.idx[p]];
  return dot;
}

bool Simplex::basic_below(int pos) const {
  const int j = basis_[pos];
  return x_[j] < lo_[j] - opt_.feas_tol * (1.0 + std::abs(lo_[j]));
}

bool Simplex::basic_above(int pos) const {
  const int j = basis_[pos];
  return x_[j] > up_[j] + opt_.feas_tol * (1.0 + std::abs(up_[j]));
}

bool Simplex::any_infeasible_basic() const {
  for (int pos = 0; pos < m_; ++pos)
    if (basic_below(pos) || basic_above(pos)) return true;
  return false;
}

// Entering column, or -1 when none is eligible. In phase 2, y = B^{-T} c_B
// and the merit of column j is its reduced cost c_j - y'a_j. In phase 1,
// y = B^{-T} sigma with sigma the infeasibility signs of the basics, and the
// violation sum changes at rate -y'a_j per unit increase of x_j; the merit
// below is written so that the phase-2 eligibility signs apply unchanged.
int Simplex::price(const Eigen::VectorXd& y, bool phase1, int& dir) {
  const double tol = 1e-9;
  auto eligible = [&](int j, int& direction, double& score) {
    const int8_t st = vstat_[j];
    if (st == kBasic) return false;
    if (up_[j] - lo_[j] <= 0.0) return false;  // fixed variable
    const double dot = column_dot(j, y);
    const double z = phase1 ? -dot : c_[j] - dot;
    const double dtol = phase1 ? tol : tol * (1.0 + std::abs(c_[j]));
    if ((st == kAtLower || st == kFree) && z < -dtol) {
      direction = +1;
      score = -z;
      return true;
    }
    if ((st == kAtUpper || st == kFree) && z > dtol) {
      direction = -1;
      score = z;
      return true;
    }
    return false;
  };

  if (bland_) {
    for (int j = 0; j < nt_; ++j) {
      int d = 0;
      double s = 0;
      if (eligible(j, d, s)) {
        dir = d;
        return j;
      }
    }
    return -1;
  }

  const int block = std::max(64, nt_ / 8);
  int best = -1, best_dir = 0;
  double best_score = 0.0;
  int scanned = 0;
  int j = cursor_;
  while (scanned < nt_) {
    int d = 0;
    double s = 0;
    if (eligible(j, d, s) && s > best_score) {
      best_score = s;
      best = j;
      best_dir = d;
    }
    ++scanned;
    ++j;
    if (j == nt_) j = 0;
    if (best >= 0 && scanned % block == 0) break;
  }
  if (best >= 0) {
    cursor_ = (best + 1 == nt_) ? 0 : best + 1;
    dir = best_dir;
  }
  return best;
}

// One simplex iteration; returns false when no entering candidate exists
// (optimal in phase 2, terminal in phase 1). The phase-1 ratio test stops at
// the first breakpoint, letting violated basics run exactly to their bound.
bool Simplex::iterate(bool phase1) {
  Eigen::VectorXd y(m_);
  if (phase1) {
    for (int pos = 0; pos < m_; ++pos)
      y[pos] = basic_below(pos) ? -1.0 : (basic_above(pos) ? 1.0 : 0.0);
  } else {
    for (int pos = 0; pos < m_; ++pos) y[pos] = c_[basis_[pos]];
  }
  btran(y);

  int dir = 0;
  const int enter = price(y, phase1, dir);
  if (enter < 0) return false;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
  for (int p = a_.ptr[enter]; p < a_.ptr[enter + 1]; ++p) w[a_.idx[p]] = a_.val[p];
  ftran(w);

  // Ratio test; ties broken by the lowest leaving column index.
  const double tie = 1e-12;
  double best_t = kInf;
  int leave_pos = -1;
  bool leave_at_upper = false;
  for (int pos = 0; pos < m_; ++pos) {
    const double wi = w[pos];
    if (std::abs(wi) <= opt_.pivot_tol) continue;
    const int j = basis_[pos];
    const double rate = -dir * wi;  // d x_j / d step
    double t = kInf;
    bool at_upper = false;
    if (phase1 && basic_below(pos)) {
      if (rate > 0) t = (lo_[j] - x_[j]) / rate;
    } else if (phase1 && basic_above(pos)) {
      if (rate < 0) {
        t = (x_[j] - up_[j]) / (-rate);
        at_upper = true;
      }
    } else if (rate < 0 && std::isfinite(lo_[j])) {
      t = (x_[j] - lo_[j]) / (-rate);
    } else if (rate > 0 && std::isfinite(up_[j])) {
      t = (up_[j] - x_[j]) / rate;
      at_upper = true;
    }
    if (t == kInf) continue;
    t = std::max(t, 0.0);
    if (t < best_t - tie || (t <= best_t + tie && leave_pos >= 0 && j < basis_[leave_pos])) {
      best_t = t;
      leave_pos = pos;
      leave_at_upper = at_upper;
    }
  }
  const double flip_t = (std::isfinite(lo_[enter]) && std::isfinite(up_[enter]))
                            ? up_[enter] - lo_[enter]
                            : kInf;

  if (leave_pos < 0 && flip_t == kInf) {
    if (phase1) throw std::runtime_error("solve_lp: phase-1 step without breakpoint");
    throw UnboundedSignal{};
  }

  if (flip_t <= best_t + tie) {
    // Bound flip: the entering variable jumps to its other bound.
    for (int pos = 0; pos < m_; ++pos)
      if (w[pos] != 0.0) x_[basis_[pos]] -= flip_t * dir * w[pos];
    x_[enter] = (dir > 0) ? up_[enter] : lo_[enter];
    vstat_[enter] = (dir > 0) ? kAtUpper : kAtLower;
    ++iterations_;
    return true;
  }

  // Pivot.
  const int leave_col = basis_[leave_pos];
  const double step = best_t;
  for (int pos = 0; pos < m_; ++pos)
    if (w[pos] != 0.0) x_[basis_[pos]] -= step * dir * w[pos];
  x_[enter] = x_[enter] + dir * step;
  x_[leave_col] = leave_at_upper ? up_[leave_col] : lo_[leave_col];
  vstat_[leave_col] = leave_at_upper ? kAtUpper : kAtLower;
  vstat_[enter] = kBasic;
  basis_[leave_pos] = enter;

  Eta eta;
  eta.pos = leave_pos;
  eta.pivot = w[leave_pos];
  eta.entries.reserve(32);
  for (int pos = 0; pos < m_; ++pos)
    if (pos != leave_pos && std::abs(w[pos]) > 1e-13) eta.entries.emplace_back(pos, w[pos]);
  etas_.push_back(std::move(eta));
  ++iterations_;

  if (step <= 1e-11) {
    if (++degen_run_ > 100) bland_ = true;
  } else {
    degen_run_ = 0;
    bland_ = false;
  }
  if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) refactorize();
  return true;
}

LPSolution Simplex::run() {
  // Phase 1: drive the bound violations of the basics to zero.
  while (any_infeasible_basic()) {
    if (iterations_ >= max_iter_) return finish(LPStatus::IterationLimit, Eigen::VectorXd());
    if (!iterate(true)) {
      Eigen::VectorXd sigma(m_);
      for (int pos = 0; pos < m_; ++pos)
        sigma[pos] = basic_below(pos) ? -1.0 : (basic_above(pos) ? 1.0 : 0.0);
      btran(sigma);
      return finish(LPStatus::Infeasible, sigma);
    }
  }
  refactorize();

  // Phase 2.
  while (true) {
    if (iterations_ >= max_iter_) return finish(LPStatus::IterationLimit, Eigen::VectorXd());
    try {
      if (!iterate(false)) break;
    } catch (const UnboundedSignal&) {
      return finish(LPStatus::Unbounded, Eigen::VectorXd());
    }
  }
  Eigen::VectorXd y(m_);
  for (int pos = 0; pos < m_; ++pos) y[pos] = c_[basis_[pos]];
  btran(y);
  return finish(LPStatus::Optimal, y);
}

LPSolution Simplex::finish(LPStatus status, const Eigen::VectorXd& final_y) {
  LPSolution out;
  out.status = status;
  out.iterations = iterations_;
  out.primal.assign(ns_, 0.0);
  for (int j = 0; j < ns_; ++j) out.primal[j] = x_[j] * col_scale_[j];

  if (status == LPStatus::Infeasible) {
    out.objective = std::numeric_limits<double>::quiet_NaN();
    out.farkas.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) out.farkas[i] = -final_y[i] * row_scale_[i];
    return out;
  }
  if (status != LPStatus::Optimal) {
    out.objective = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  double obj = 0.0;
  for (int j = 0; j < ns_; ++j) obj += lp_.objective[j] * out.primal[j];
  out.objective = obj;

  out.dual.assign(m_, 0.0);
  out.reduced_cost.assign(ns_, 0.0);
  const double flip = maximize_ ? -1.0 : 1.0;
  for (int i = 0; i < m_; ++i) out.dual[i] = flip * final_y[i] * row_scale_[i];
  for (int j = 0; j < ns_; ++j) {
    const double dbar = c_[j] - column_dot(j, final_y);
    out.reduced_cost[j] = flip * dbar / col_scale_[j];
  }

  // Residuals on the original, unscaled data.
  double prim = 0.0;
  std::vector<double> act(m_, 0.0);
  for (const auto& e : lp_.entries) act[e.row] += e.value * out.primal[e.col];
  for (int i = 0; i < m_; ++i) {
    const double scale = 1.0 + std::abs(lp_.rhs[i]);
    double viol = 0.0;
    switch (lp_.row_sense[i]) {
      case RowSense::LessEqual: viol = act[i] - lp_.rhs[i]; break;
      case RowSense::GreaterEqual: viol = lp_.rhs[i] - act[i]; break;
      case RowSense::Equal: viol = std::abs(act[i] - lp_.rhs[i]); break;
    }
    prim = std::max(prim, viol / scale);
  }
  for (int j = 0; j < ns_; ++j) {
    const double scale = 1.0 + std::abs(out.primal[j]);
    if (std::isfinite(lp_.lower[j])) prim = std::max(prim, (lp_.lower[j] - out.primal[j]) / scale);
    if (std::isfinite(lp_.upper[j])) prim = std::max(prim, (out.primal[j] - lp_.upper[j]) / scale);
  }
  out.primal_residual = std::max(prim, 0.0);

  // Reduced-cost sign conditions for the original sense (minimize: rc >= 0
  // at lower bound, rc <= 0 at upper bound).
  double dualres = 0.0, comp = 0.0;
  for (int j = 0; j < ns_; ++j) {
    const double rc = out.reduced_cost[j] * flip;
    const double scale = 1.0 + std::abs(lp_.objective[j]);
    const double dist_lo = std::isfinite(lp_.lower[j]) ? out.primal[j] - lp_.lower[j] : kInf;
    const double dist_up = std::isfinite(lp_.upper[j]) ? lp_.upper[j] - out.primal[j] : kInf;
    if (vstat_[j] == kBasic || vstat_[j] == kFree) {
      dualres = std::max(dualres, std::abs(rc) / scale);
    } else if (vstat_[j] == kAtLower) {
      dualres = std::max(dualres, -rc / scale);
    } else if (vstat_[j] == kAtUpper) {
      dualres = std::max(dualres, rc / scale);
    }
    const double interior = std::min(dist_lo, dist_up);
    if (std::isfinite(interior)) comp = std::max(comp, std::abs(rc) * std::min(interior, 1.0));
  }
  out.dual_residual = std::max(dualres, 0.0);
  out.complementarity = comp / (1.0 + std::abs(out.objective));
  return out;
}

}  // namespace

LPSolution solve_lp(const LinearProgram& lp, const SolverOptions& options) {
  Simplex solver(lp, options);
  return solver.run();
}

double farkas_certificate_margin(const LinearProgram& lp, const std::vector<double>& ray) {
  if (static_cast<int>(ray.size()) != lp.num_rows())
    throw std::invalid_argument("farkas_certificate_margin: ray size mismatch");
  const int n = lp.num_vars();
  // Clamp the ray into the sign cone compatible with the row senses.
  std::vector<double> r(ray);
  for (int i = 0; i < lp.num_rows(); ++i) {
    if (lp.row_sense[i] == RowSense::LessEqual) r[i] = std::max(r[i], 0.0);
    if (lp.row_sense[i] == RowSense::GreaterEqual) r[i] = std::min(r[i], 0.0);
  }
  std::vector<double> z(n, 0.0);
  for (const auto& e : lp.entries) z[e.col] += e.value * r[e.row];
  double zmax = 0.0;
  for (double v : z) zmax = std::max(zmax, std::abs(v));
  const double drop = 1e-7 * (1.0 + zmax);
  double lhs_min = 0.0;
  for (int j = 0; j < n; ++j) {
    const double zj = (std::abs(z[j]) <= drop) ? 0.0 : z[j];
    if (zj > 0) {
      if (!std::isfinite(lp.lower[j])) return -kInf;
      lhs_min += zj * lp.lower[j];
    } else if (zj < 0) {
      if (!std::isfinite(lp.upper[j])) return -kInf;
      lhs_min += zj * lp.upper[j];
    }
  }
  double rb = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) rb += r[i] * lp.rhs[i];
  return lhs_min - rb;
}

void write_lp_text(const LinearProgram& lp, std::ostream& os) {
  os << "sense " << (lp.sense == ObjSense::Maximize ? "max" : "min") << "\n";
  os << "vars " << lp.num_vars() << "\nrows " << lp.num_rows() << "\n";
  os << "objective";
  for (double v : lp.objective) os << " " << v;
  os << "\n";
  for (int j = 0; j < lp.num_vars(); ++j)
    os << "bound " << j << " " << lp.lower[j] << " " << lp.upper[j] << "\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const char* s = lp.row_sense[i] == RowSense::LessEqual
                        ? "<="
                        : (lp.row_sense[i] == RowSense::Equal ? "=" : ">=");
    os << "row " << i << " " << s << " " << lp.rhs[i] << "\n";
  }
  for (const auto& e : lp.entries) os << "entry " << e.row << " " << e.col << " " << e.value << "\n";
}

}  // namespace superrep
