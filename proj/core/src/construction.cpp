#include "superrep/construction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "superrep/lp.hpp"

namespace superrep {

void FeedbackRule::validate(int d) const {
  if (sample_times.empty()) throw std::invalid_argument("FeedbackRule: no sample times");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]))
      throw std::invalid_argument("FeedbackRule: sample times must be increasing");
  if (axes.size() != sample_times.size() * static_cast<std::size_t>(d))
    throw std::invalid_argument("FeedbackRule: need one axis per sampled scalar");
  std::size_t cells = 1;
  for (const auto& axis : axes) {
    if (axis.size() < 2) throw std::invalid_argument("FeedbackRule: axes need at least two points");
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (!(axis[i] > axis[i - 1]))
        throw std::invalid_argument("FeedbackRule: axis values must be increasing");
    cells *= axis.size();
  }
  if (table.size() != cells)
    throw std::invalid_argument("FeedbackRule: table size does not match the axis grid");
  for (const auto& entry : table)
    if (entry.rows() != d || entry.cols() != d)
      throw std::invalid_argument("FeedbackRule: table entries must be d x d");
}

Eigen::MatrixXd FeedbackRule::evaluate(const Eigen::VectorXd& inputs) const {
  const std::size_t dims = axes.size();
  if (static_cast<std::size_t>(inputs.size()) != dims)
    throw std::invalid_argument("FeedbackRule: input size mismatch");
  // Cell index and interpolation weight per axis, clamped to the hull.
  std::vector<std::size_t> cell(dims);
  std::vector<double> weight(dims);
  std::vector<std::size_t> stride(dims);
  std::size_t s = 1;
  for (std::size_t a = dims; a-- > 0;) {
    stride[a] = s;
    s *= axes[a].size();
  }
  for (std::size_t a = 0; a < dims; ++a) {
    const auto& axis = axes[a];
    const double x = std::min(std::max(inputs(a), axis.front()), axis.back());
    std::size_t hi = std::upper_bound(axis.begin(), axis.end(), x) - axis.begin();
    hi = std::min(std::max<std::size_t>(hi, 1), axis.size() - 1);
    cell[a] = hi - 1;
    weight[a] = (x - axis[hi - 1]) / (axis[hi] - axis[hi - 1]);
  }
  const int d = static_cast<int>(table.front().rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t corner = 0; corner < (static_cast<std::size_t>(1) << dims); ++corner) {
    double wgt = 1.0;
    std::size_t index = 0;
    for (std::size_t a = 0; a < dims; ++a) {
      const bool high = (corner >> a) & 1;
      wgt *= high ? weight[a] : (1.0 - weight[a]);
      index += (cell[a] + (high ? 1 : 0)) * stride[a];
    }
    if (wgt != 0.0) out += wgt * table[index];
  }
  return out;
}

PiecewiseVolControl PiecewiseVolControl::constant(Eigen::MatrixXd variance_target) {
  PiecewiseVolControl c;
  c.breakpoints = {0.0, 1.0};
  c.segments.resize(1);
  c.segments[0].constant = std::move(variance_target);
  return c;
}

namespace {

void check_target(const VolatilityCorridor& corr, const Eigen::MatrixXd& target, double eps_pd) {
  const int d = corr.dimension();
  if (target.rows() != d || target.cols() != d)
    throw std::invalid_argument("control: variance target must be d x d");
  if ((target - target.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + target.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("control: variance target must be symmetric");
  psi(corr, target);  // throws NotInGamma when outside the corridor
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(target);
  if (es.eigenvalues().minCoeff() < eps_pd - 1e-14)
    throw std::invalid_argument("control: variance target fails the eps positive-definiteness margin");
}

}  // namespace

void validate_control(const VolatilityCorridor& corr, const PiecewiseVolControl& control) {
  const auto& t = control.breakpoints;
  if (t.size() < 2 || t.front() != 0.0 || t.back() != 1.0)
    throw std::invalid_argument("control: breakpoints must run from 0 to 1");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("control: breakpoints must be increasing");
  if (control.segments.size() + 1 != t.size())
    throw std::invalid_argument("control: need one segment per interval");
  if (control.eps_pd < 0.0) throw std::invalid_argument("control: eps_pd must be nonnegative");

  for (std::size_t l = 0; l < control.segments.size(); ++l) {
    const auto& seg = control.segments[l];
    if (seg.constant.has_value() == seg.feedback.has_value())
      throw std::invalid_argument("control: each segment is either constant or feedback");
    if (seg.constant) {
      check_target(corr, *seg.constant, control.eps_pd);
    } else {
      if (l == 0) throw std::invalid_argument("control: the first segment must be constant");
      seg.feedback->validate(corr.dimension());
      if (seg.feedback->sample_times.back() > t[l] + 1e-12)
        throw std::invalid_argument("control: feedback sample times must not exceed the segment start");
      for (const auto& entry : seg.feedback->table) check_target(corr, entry, control.eps_pd);
    }
  }
}

namespace {

// Incremental evaluation of the construction along a path. Per segment the
// prescription is (xi_k P_l + phi_l)/sqrt(n) with P_l = Psi(target_l) and
// phi_l = Phi(P_l); the walker ramps into segment 0 and blends across
// [sqrt n] steps at later breakpoints.
class Walker {
 public:
  Walker(const MarketSpec& spec, const PiecewiseVolControl& control)
      : spec_(spec),
        control_(control),
        corr_(make_corridor(spec)),
        factors_(spec.step_factors()),
        root_n_(std::sqrt(static_cast<double>(spec.n))),
        ramp_len_(static_cast<int>(std::floor(root_n_))) {
    const int n = spec_.n;
    const int segs = control_.segment_count();
    bounds_.resize(segs + 1);
    for (int l = 0; l <= segs; ++l)
      bounds_[l] = static_cast<int>(std::floor(n * control_.breakpoints[l]));
    for (int l = 0; l < segs; ++l) {
      if (bounds_[l + 1] - bounds_[l] < 2 * ramp_len_)
        throw std::invalid_argument(
            "build_A_process: n too small, every interval needs at least 2[sqrt n] periods");
    }
    prescriptions_.resize(segs);
    prices_.resize(n + 1, spec_.d);
    perturbation_.resize(n + 1, spec_.d);
    log_proxy_.resize(n + 1, spec_.d);
    driver_sum_.resize(n + 1, spec_.d);
    reset();
  }

  void reset() {
    depth_ = 0;
    prices_.row(0) = spec_.s0.transpose();
    perturbation_.row(0).setZero();
    log_proxy_.row(0).setZero();
    driver_sum_.row(0).setZero();
    // Constant prescriptions are path-independent and survive a reset.
    for (int l = 0; l < control_.segment_count(); ++l)
      if (!control_.segments[l].constant) prescriptions_[l].ready = false;
    ensure_segment(0);
  }

  int depth() const { return depth_; }
  int n() const { return spec_.n; }

  // A_{k+1} and Delta N_{k+1} for stepping along `branch` from the current
  // depth, without mutating the walker.
  void peek(int branch, Eigen::VectorXd& a_next, Eigen::VectorXd& dn) {
    const int k = depth_ + 1;
    a_next = perturbation_at(k, branch);
    const Eigen::ArrayXd growth = factors_.col(branch).array();
    // Delta N = (M_k - M_{k-1}) / S_{k-1} with M = S (1 + A).
    dn = (growth * (1.0 + a_next.array()) -
          (1.0 + perturbation_.row(depth_).transpose().array()))
             .matrix();
  }

  void step(int branch) {
    const int k = depth_ + 1;
    Eigen::VectorXd a_next = perturbation_at(k, branch);
    Eigen::VectorXd dn;
    const Eigen::ArrayXd growth = factors_.col(branch).array();
    dn = (growth * (1.0 + a_next.array()) -
          (1.0 + perturbation_.row(depth_).transpose().array()))
             .matrix();
    prices_.row(k) = prices_.row(depth_).cwiseProduct(factors_.col(branch).transpose());
    perturbation_.row(k) = a_next.transpose();
    log_proxy_.row(k) = log_proxy_.row(depth_) + dn.transpose();
    const Eigen::RowVectorXd xi = spec_.driver_vector(branch);
    driver_sum_.row(k) =
        driver_sum_.row(depth_) +
        ((spec_.sigma * xi.transpose()).array() / root_n_ * (1.0 + a_next.array())).matrix().transpose();
    depth_ = k;
  }

  const Eigen::MatrixXd& prices() const { return prices_; }
  const Eigen::MatrixXd& perturbation() const { return perturbation_; }
  const Eigen::MatrixXd& log_proxy() const { return log_proxy_; }
  const Eigen::MatrixXd& driver_sum() const { return driver_sum_; }

 private:
  struct Prescription {
    bool ready = false;
    Eigen::MatrixXd psi_mat;  // Psi(target)
    Eigen::VectorXd phi_vec;  // Phi(Psi(target))
  };

  int segment_of(int k) const {
    // Largest l with k > bounds_[l]; steps k = 1..n.
    int l = 0;
    while (l + 1 < control_.segment_count() && k > bounds_[l + 1]) ++l;
    return l;
  }

  void ensure_segment(int l) {
    auto& p = prescriptions_[l];
    if (p.ready) return;
    Eigen::MatrixXd target;
    const auto& seg = control_.segments[l];
    if (seg.constant) {
      target = *seg.constant;
    } else {
      // Feedback reads N at the sampled grid times, all before this segment.
      const auto& rule = *seg.feedback;
      Eigen::VectorXd inputs(rule.sample_times.size() * spec_.d);
      for (std::size_t s = 0; s < rule.sample_times.size(); ++s) {
        const int idx = static_cast<int>(std::floor(spec_.n * rule.sample_times[s]));
        if (idx > depth_)
          throw std::logic_error("build_A_process: feedback sample beyond the walked prefix");
        inputs.segment(static_cast<Eigen::Index>(s) * spec_.d, spec_.d) =
            log_proxy_.row(idx).transpose();
      }
      target = rule.evaluate(inputs);
    }
    p.psi_mat = psi(corr_, target);
    p.phi_vec = phi(corr_, p.psi_mat);
    p.ready = true;
  }

  Eigen::VectorXd prescription_value(int l, const Eigen::RowVectorXd& xi) {
    ensure_segment(l);
    const auto& p = prescriptions_[l];
    return ((xi * p.psi_mat).transpose() + p.phi_vec) / root_n_;
  }

  Eigen::VectorXd perturbation_at(int k, int branch) {
    const Eigen::RowVectorXd xi = spec_.driver_vector(branch);
    const int l = segment_of(k);
    if (l == 0) {
      const Eigen::VectorXd head = prescription_value(0, xi);
      if (k <= ramp_len_) return (static_cast<double>(k) / ramp_len_) * head;
      return head;
    }
    const int into = k - bounds_[l];
    if (into <= ramp_len_) {
      const double theta = static_cast<double>(into) / ramp_len_;
      return (1.0 - theta) * prescription_value(l - 1, xi) + theta * prescription_value(l, xi);
    }
    return prescription_value(l, xi);
  }

  const MarketSpec& spec_;
  const PiecewiseVolControl& control_;
  VolatilityCorridor corr_;
  Eigen::MatrixXd factors_;
  double root_n_;
  int ramp_len_;
  std::vector<int> bounds_;
  std::vector<Prescription> prescriptions_;

  int depth_ = 0;
  Eigen::MatrixXd prices_, perturbation_, log_proxy_, driver_sum_;
};

NodeFeasibility feasibility_from_increments(const std::vector<Eigen::VectorXd>& dn) {
  const int m = static_cast<int>(dn.size());
  const int d = static_cast<int>(dn.front().size());
  // max delta  s.t.  sum q = 1, sum q dn = 0, q_b - delta >= 0, q in [0,1].
  LinearProgram lp;
  lp.sense = ObjSense::Maximize;
  for (int b = 0; b < m; ++b) lp.add_variable(0.0, 0.0, 1.0);
  const int delta = lp.add_variable(1.0, -1.0, 1.0);
  const int norm_row = lp.add_row(RowSense::Equal, 1.0);
  for (int b = 0; b < m; ++b) lp.add_entry(norm_row, b, 1.0);
  for (int i = 0; i < d; ++i) {
    const int row = lp.add_row(RowSense::Equal, 0.0);
    for (int b = 0; b < m; ++b) lp.add_entry(row, b, dn[b](i));
  }
  for (int b = 0; b < m; ++b) {
    const int row = lp.add_row(RowSense::GreaterEqual, 0.0);
    lp.add_entry(row, b, 1.0);
    lp.add_entry(row, delta, -1.0);
  }
  const LPSolution sol = solve_lp(lp);
  NodeFeasibility out;
  if (sol.status == LPStatus::Infeasible) {
    out.feasible = false;
    out.margin = -1.0;
    return out;
  }
  if (sol.status != LPStatus::Optimal)
    throw std::runtime_error("node_mm_feasibility: margin LP did not converge");
  out.margin = sol.objective;
  out.feasible = out.margin > 0.0;
  out.q.resize(m);
  for (int b = 0; b < m; ++b) out.q(b) = sol.primal[b];
  return out;
}

}  // namespace

KusuokaProcesses build_A_process(const MarketSpec& spec, const PiecewiseVolControl& control,
                                 const PathIndex& path) {
  spec.validate();
  if (static_cast<int>(path.size()) != spec.n)
    throw std::invalid_argument("build_A_process: path must have depth n");
  check_node(spec, path);
  Walker walker(spec, control);
  for (int32_t b : path) walker.step(b);
  KusuokaProcesses out;
  out.perturbation = walker.perturbation();
  out.log_proxy = walker.log_proxy();
  out.driver_sum = walker.driver_sum();
  out.shadow = walker.prices().cwiseProduct(Eigen::MatrixXd::Ones(spec.n + 1, spec.d) + out.perturbation);
  return out;
}

NodeFeasibility node_mm_feasibility(const MarketSpec& spec, const PiecewiseVolControl& control,
                                    const PathIndex& node) {
  spec.validate();
  check_node(spec, node);
  if (static_cast<int>(node.size()) >= spec.n)
    throw std::invalid_argument("node_mm_feasibility: node must be internal (depth < n)");
  Walker walker(spec, control);
  for (int32_t b : node) walker.step(b);
  const int m = spec.branch_count();
  std::vector<Eigen::VectorXd> dn(m);
  Eigen::VectorXd a_next;
  for (int b = 0; b < m; ++b) walker.peek(b, a_next, dn[b]);
  return feasibility_from_increments(dn);
}

PathIndex sample_path(const MarketSpec& spec, const PiecewiseVolControl& control,
                      std::uint64_t seed) {
  spec.validate();
  const int m = spec.branch_count();
  Walker walker(spec, control);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> dn(m);
  Eigen::VectorXd a_next;
  PathIndex path;
  path.reserve(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    for (int b = 0; b < m; ++b) walker.peek(b, a_next, dn[b]);
    const NodeFeasibility f = feasibility_from_increments(dn);
    if (!f.feasible)
      throw McInfeasibleNode("sample_path: node admits no equivalent martingale measure", path);
    const double u = unif(rng);
    double acc = 0.0;
    int branch = m - 1;
    for (int b = 0; b < m; ++b) {
      acc += f.q(b);
      if (u <= acc) {
        branch = b;
        break;
      }
    }
    walker.step(branch);
    path.push_back(branch);
  }
  return path;
}

McResult mc_lower_bound(const MarketSpec& spec, const PiecewiseVolControl& control,
                        const Payoff& payoff, long paths, std::uint64_t seed) {
  spec.validate();
  if (paths < 2) throw std::invalid_argument("mc_lower_bound: need at least 2 paths");
  const int m = spec.branch_count();
  const int n = spec.n;

  bool all_constant = true;
  for (const auto& seg : control.segments) all_constant = all_constant && seg.constant.has_value();

  // For constant controls A_k depends on the path only through the previous
  // driver value, so one measure per (depth, previous branch) serves every
  // path.
  std::vector<Eigen::VectorXd> q_table;
  if (all_constant) {
    q_table.assign(static_cast<std::size_t>(n) * m + 1, Eigen::VectorXd());
    Walker walker(spec, control);
    std::vector<Eigen::VectorXd> dn(m);
    Eigen::VectorXd a_next;
    auto solve_at = [&](const PathIndex& prefix) {
      walker.reset();
      for (int32_t b : prefix) walker.step(b);
      for (int b = 0; b < m; ++b) walker.peek(b, a_next, dn[b]);
      NodeFeasibility f = feasibility_from_increments(dn);
      if (!f.feasible)
        throw McInfeasibleNode("mc_lower_bound: node admits no equivalent martingale measure", prefix);
      return f.q;
    };
    q_table[0] = solve_at({});
    for (int k = 1; k < n; ++k) {
      for (int prev = 0; prev < m; ++prev) {
        // Representative prefix: k steps ending with `prev` (earlier branches
        // are irrelevant for the increments at depth k).
        PathIndex prefix(k, 0);
        prefix[k - 1] = prev;
        q_table[static_cast<std::size_t>(k - 1) * m + prev + 1] = solve_at(prefix);
      }
    }
  }

  const long worker_count =
      std::min<long>(std::max(1u, std::thread::hardware_concurrency()), 8);
  std::vector<double> values(paths);
  std::vector<std::exception_ptr> errors(worker_count);

  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };

  auto run_range = [&](long lo, long hi, int worker) {
    try {
      Walker walker(spec, control);
      std::vector<Eigen::VectorXd> dn(m);
      Eigen::VectorXd a_next;
      PathIndex path;
      path.reserve(n);
      for (long p = lo; p < hi; ++p) {
        std::mt19937_64 rng(splitmix(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(p)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        walker.reset();
        path.clear();
        for (int k = 0; k < n; ++k) {
          const Eigen::VectorXd* q = nullptr;
          Eigen::VectorXd q_local;
          if (all_constant) {
            q = (k == 0) ? &q_table[0]
                         : &q_table[static_cast<std::size_t>(k - 1) * m + path[k - 1] + 1];
          } else {
            for (int b = 0; b < m; ++b) walker.peek(b, a_next, dn[b]);
            NodeFeasibility f = feasibility_from_increments(dn);
            if (!f.feasible)
              throw McInfeasibleNode("mc_lower_bound: node admits no equivalent martingale measure",
                                     path);
            q_local = f.q;
            q = &q_local;
          }
          const double u = unif(rng);
          double acc = 0.0;
          int branch = m - 1;
          for (int b = 0; b < m; ++b) {
            acc += (*q)(b);
            if (u <= acc) {
              branch = b;
              break;
            }
          }
          walker.step(branch);
          path.push_back(branch);
        }
        values[p] = payoff.terminal_only()
                        ? payoff.terminal_value(walker.prices().row(n).transpose())
                        : payoff.value_on_samples(walker.prices());
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };

  if (worker_count == 1 || paths < 256) {
    run_range(0, paths, 0);
  } else {
    std::vector<std::thread> threads;
    const long chunk = (paths + worker_count - 1) / worker_count;
    for (long w = 0; w < worker_count; ++w) {
      const long lo = w * chunk;
      const long hi = std::min(paths, lo + chunk);
      if (lo < hi) threads.emplace_back(run_range, lo, hi, static_cast<int>(w));
    }
    for (auto& t : threads) t.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  // Fixed-order reduction keeps the estimate independent of the thread count.
  double mean = 0.0;
  for (long p = 0; p < paths; ++p) mean += values[p];
  mean /= static_cast<double>(paths);
  double var = 0.0;
  for (long p = 0; p < paths; ++p) var += (values[p] - mean) * (values[p] - mean);
  var /= static_cast<double>(paths - 1);

  McResult out;
  out.estimate = mean;
  out.standard_error = std::sqrt(var / static_cast<double>(paths));
  out.paths = paths;
  out.infeasible_nodes = 0;
  return out;
}

}  // namespace superrep
