// Embedded LP solver: revised simplex over bounded variables.
//
// The model is brought to computational form  A x = b  with one logical
// variable per row (slack for <=, surplus for >=, fixed at 0 for =), so
// the all-logical basis is always available as a cold start. The basis
// is factorized with Eigen's sparse LU and kept current between
// refactorizations through product-form eta updates. Infeasibility is
// driven out by a composite phase 1 that minimizes the total bound
// violation of the basic variables; the same pivot loop then minimizes
// the true objective. Dantzig pricing switches to Bland's rule after
// 10 * num_vars degenerate pivots.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "windcap/errors.hpp"
#include "windcap/optkit/solve.hpp"

namespace windcap::optkit {

namespace {

enum VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFreeNB };

struct Eta {
  int row;                                   // pivot row r
  double pivot;                              // w_r
  std::vector<std::pair<int, double>> nnz;   // w entries, excluding row r
};

class Simplex {
 public:
  Simplex(const LinearModel& model, const SolveOptions& opt,
          const std::vector<double>* lo_override,
          const std::vector<double>* hi_override)
      : opt_(opt) {
    build(model, lo_override, hi_override);
  }

  SolveOutcome run(const BasisState* warm, BasisState* basis_out);

 private:
  // ---- problem data in computational form ----
  int nrows_ = 0, nstruct_ = 0, ntot_ = 0;
  bool maximize_ = false;
  std::vector<int> col_start_, col_row_;   // structural columns, CSC
  std::vector<double> col_val_;
  std::vector<double> lo_, hi_, cost_;     // size ntot_
  std::vector<double> rhs_;                // size nrows_
  SolveOptions opt_;

  // ---- solver state ----
  std::vector<int> basis_;                 // row -> variable
  std::vector<int> in_basis_;              // variable -> row or -1
  std::vector<std::uint8_t> vstat_;        // variable -> VarStatus
  std::vector<double> xval_;               // variable -> value
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  long iters_ = 0, degen_pivots_ = 0, refactors_ = 0;
  bool bland_ = false;

  void build(const LinearModel& model, const std::vector<double>* lo_ov,
             const std::vector<double>* hi_ov);
  void cold_basis();
  bool load_warm(const BasisState& warm);
  bool try_factorize();
  void recompute_basics();
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void column(int j, std::vector<double>& out) const;  // dense A_j
  bool any_infeasible(std::vector<double>& d) const;   // fills phase-1 costs
  double reduced_cost(int j, const std::vector<double>& cc,
                      const std::vector<double>& y) const;
};

void Simplex::build(const LinearModel& model, const std::vector<double>* lo_ov,
                    const std::vector<double>* hi_ov) {
  model.validate();
  nstruct_ = model.num_vars();
  nrows_ = model.num_rows();
  ntot_ = nstruct_ + nrows_;
  maximize_ = model.sense == Sense::Maximize;

  lo_.assign(ntot_, 0.0);
  hi_.assign(ntot_, 0.0);
  cost_.assign(ntot_, 0.0);
  for (int j = 0; j < nstruct_; ++j) {
    lo_[j] = lo_ov ? (*lo_ov)[j] : model.lo[j];
    hi_[j] = hi_ov ? (*hi_ov)[j] : model.hi[j];
    if (lo_[j] > hi_[j]) {
      throw ValidationError("variable " + std::to_string(j) +
                            ": crossed bounds in solve");
    }
    cost_[j] = maximize_ ? -model.obj[j] : model.obj[j];
  }

  // CSC of the structural block
  std::vector<int> count(nstruct_, 0);
  for (const Row& row : model.rows) {
    for (const Term& t : row.terms) ++count[t.var];
  }
  col_start_.assign(nstruct_ + 1, 0);
  for (int j = 0; j < nstruct_; ++j) col_start_[j + 1] = col_start_[j] + count[j];
  col_row_.resize(col_start_[nstruct_]);
  col_val_.resize(col_start_[nstruct_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  rhs_.resize(nrows_);
  for (int r = 0; r < nrows_; ++r) {
    const Row& row = model.rows[r];
    rhs_[r] = row.rhs;
    for (const Term& t : row.terms) {
      col_row_[fill[t.var]] = r;
      col_val_[fill[t.var]] = t.coef;
      ++fill[t.var];
    }
    const int s = nstruct_ + r;
    switch (row.rel) {
      case Relation::LessEqual:    lo_[s] = 0.0;   hi_[s] = kInf; break;
      case Relation::GreaterEqual: lo_[s] = -kInf; hi_[s] = 0.0;  break;
      case Relation::Equal:        lo_[s] = 0.0;   hi_[s] = 0.0;  break;
    }
  }
}

void Simplex::cold_basis() {
  basis_.resize(nrows_);
  in_basis_.assign(ntot_, -1);
  vstat_.assign(ntot_, kAtLower);
  for (int j = 0; j < nstruct_; ++j) {
    if (std::isfinite(lo_[j])) {
      vstat_[j] = kAtLower;
    } else if (std::isfinite(hi_[j])) {
      vstat_[j] = kAtUpper;
    } else {
      vstat_[j] = kFreeNB;
    }
  }
  for (int r = 0; r < nrows_; ++r) {
    const int s = nstruct_ + r;
    basis_[r] = s;
    in_basis_[s] = r;
    vstat_[s] = kBasic;
  }
}

bool Simplex::load_warm(const BasisState& warm) {
  if (static_cast<int>(warm.basic.size()) != nrows_ ||
      static_cast<int>(warm.status.size()) != ntot_) {
    return false;
  }
  basis_ = warm.basic;
  in_basis_.assign(ntot_, -1);
  vstat_ = warm.status;
  for (int r = 0; r < nrows_; ++r) {
    const int v = basis_[r];
    if (v < 0 || v >= ntot_ || in_basis_[v] != -1) return false;
    in_basis_[v] = r;
    vstat_[v] = kBasic;
  }
  // nonbasic statuses must be compatible with (possibly changed) bounds
  for (int j = 0; j < ntot_; ++j) {
    if (in_basis_[j] >= 0) continue;
    if (vstat_[j] == kBasic) return false;
    if (vstat_[j] == kAtLower && !std::isfinite(lo_[j])) {
      vstat_[j] = std::isfinite(hi_[j]) ? kAtUpper : kFreeNB;
    } else if (vstat_[j] == kAtUpper && !std::isfinite(hi_[j])) {
      vstat_[j] = std::isfinite(lo_[j]) ? kAtLower : kFreeNB;
    } else if (vstat_[j] == kFreeNB &&
               (std::isfinite(lo_[j]) || std::isfinite(hi_[j]))) {
      vstat_[j] = std::isfinite(lo_[j]) ? kAtLower : kAtUpper;
    }
  }
  return true;
}

bool Simplex::try_factorize() {
  etas_.clear();
  ++refactors_;
  if (nrows_ == 0) return true;
  Eigen::SparseMatrix<double> B(nrows_, nrows_);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(nrows_) * 3);
  for (int r = 0; r < nrows_; ++r) {
    const int v = basis_[r];
    if (v >= nstruct_) {
      trip.emplace_back(v - nstruct_, r, 1.0);
    } else {
      for (int k = col_start_[v]; k < col_start_[v + 1]; ++k) {
        trip.emplace_back(col_row_[k], r, col_val_[k]);
      }
    }
  }
  B.setFromTriplets(trip.begin(), trip.end());
  lu_.analyzePattern(B);
  lu_.factorize(B);
  return lu_.info() == Eigen::Success;
}

void Simplex::ftran(std::vector<double>& v) const {
  if (nrows_ == 0) return;
  Eigen::Map<Eigen::VectorXd> mv(v.data(), nrows_);
  Eigen::VectorXd x = lu_.solve(mv);
  std::copy(x.data(), x.data() + nrows_, v.begin());
  for (const Eta& e : etas_) {
    const double t = v[e.row] / e.pivot;
    if (t != 0.0) {
      for (const auto& [i, wi] : e.nnz) v[i] -= wi * t;
    }
    v[e.row] = t;
  }
}

void Simplex::btran(std::vector<double>& v) const {
  if (nrows_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = 0.0;
    for (const auto& [i, wi] : it->nnz) s += wi * v[i];
    v[it->row] = (v[it->row] - s) / it->pivot;
  }
  Eigen::Map<Eigen::VectorXd> mv(v.data(), nrows_);
  Eigen::VectorXd y = lu_.adjoint().solve(mv);
  std::copy(y.data(), y.data() + nrows_, v.begin());
}

void Simplex::column(int j, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (j >= nstruct_) {
    out[j - nstruct_] = 1.0;
  } else {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      out[col_row_[k]] = col_val_[k];
    }
  }
}

void Simplex::recompute_basics() {
  std::vector<double> r(rhs_);
  for (int j = 0; j < ntot_; ++j) {
    if (in_basis_[j] >= 0) continue;
    double xj = 0.0;
    if (vstat_[j] == kAtLower) xj = lo_[j];
    else if (vstat_[j] == kAtUpper) xj = hi_[j];
    xval_[j] = xj;
    if (xj == 0.0) continue;
    if (j >= nstruct_) {
      r[j - nstruct_] -= xj;
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        r[col_row_[k]] -= col_val_[k] * xj;
      }
    }
  }
  ftran(r);
  for (int i = 0; i < nrows_; ++i) xval_[basis_[i]] = r[i];
}

bool Simplex::any_infeasible(std::vector<double>& d) const {
  bool found = false;
  std::fill(d.begin(), d.end(), 0.0);
  for (int r = 0; r < nrows_; ++r) {
    const int v = basis_[r];
    const double x = xval_[v];
    if (x < lo_[v] - opt_.feas_tol) {
      d[v] = -1.0;
      found = true;
    } else if (x > hi_[v] + opt_.feas_tol) {
      d[v] = 1.0;
      found = true;
    }
  }
  return found;
}

double Simplex::reduced_cost(int j, const std::vector<double>& cc,
                             const std::vector<double>& y) const {
  double r = cc[j];
  if (j >= nstruct_) {
    r -= y[j - nstruct_];
  } else {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      r -= y[col_row_[k]] * col_val_[k];
    }
  }
  return r;
}

SolveOutcome Simplex::run(const BasisState* warm, BasisState* basis_out) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveOutcome out;
  xval_.assign(ntot_, 0.0);

  int singular_resets = 0;
  auto refactorize = [&] {
    if (!try_factorize()) {
      // a defective pivot slipped a dependent column into the basis:
      // fall back to the all-logical basis and let phase 1 recover
      if (++singular_resets > 3) {
        throw NumericalError("simplex basis repeatedly singular");
      }
      cold_basis();
      if (!try_factorize()) {
        throw NumericalError("identity basis failed to factorize");
      }
    }
    recompute_basics();
  };

  if (!(warm && load_warm(*warm))) cold_basis();
  refactorize();

  std::vector<double> phase1_cost(ntot_, 0.0);
  std::vector<double> y(nrows_), w(nrows_);
  const long bland_threshold = 10L * static_cast<long>(ntot_);
  int pivots_since_refactor = 0;
  // after a clean refactorization, an optimal/infeasible verdict is final
  bool verdict_is_fresh = (etas_.empty());

  while (true) {
    if (iters_ >= opt_.max_lp_iterations) {
      out.status = SolveStatus::IterationLimit;
      break;
    }

    const bool phase1 = any_infeasible(phase1_cost);
    const std::vector<double>& cc = phase1 ? phase1_cost : cost_;

    // y = B^{-T} c_B
    for (int r = 0; r < nrows_; ++r) y[r] = cc[basis_[r]];
    btran(y);

    // pricing
    int enter = -1;
    int dir = +1;
    double best = 0.0;
    for (int j = 0; j < ntot_; ++j) {
      if (in_basis_[j] >= 0) continue;
      if (lo_[j] == hi_[j]) continue;  // fixed, never enters
      const double r = reduced_cost(j, cc, y);
      int d = 0;
      if (vstat_[j] == kAtLower) {
        if (r < -opt_.dual_tol) d = +1;
      } else if (vstat_[j] == kAtUpper) {
        if (r > opt_.dual_tol) d = -1;
      } else {  // free at zero
        if (r < -opt_.dual_tol) d = +1;
        else if (r > opt_.dual_tol) d = -1;
      }
      if (d == 0) continue;
      if (bland_) { enter = j; dir = d; break; }
      const double score = std::fabs(r);
      if (score > best) { best = score; enter = j; dir = d; }
    }

    if (enter < 0) {
      // no improving column: optimal (phase 2) or infeasible (phase 1);
      // confirm against a freshly factorized basis to rule out drift
      if (!verdict_is_fresh) {
        refactorize();
        pivots_since_refactor = 0;
        verdict_is_fresh = true;
        continue;
      }
      out.status = phase1 ? SolveStatus::Infeasible : SolveStatus::Optimal;
      break;
    }

    // direction through the basis: w = B^{-1} A_enter
    column(enter, w);
    ftran(w);

    // two-pass ratio test: pass 1 finds the largest step that keeps
    // every basic variable within a feasibility-tolerance band of its
    // blocking bound; pass 2 picks the largest pivot inside that band
    // (Bland mode: strict minimum ratio, lowest variable index)
    const double step_cap = hi_[enter] - lo_[enter];  // inf for free/one-sided
    const double own_cap = std::isfinite(step_cap) ? step_cap : kInf;
    auto strict_ratio = [&](int r, double wr, double& t,
                            std::uint8_t& to) -> bool {
      const int v = basis_[r];
      const double x = xval_[v];
      if (x < lo_[v] - opt_.feas_tol) {
        if (wr >= 0.0) return false;  // moving away from its bound
        t = (lo_[v] - x) / (-wr);
        to = kAtLower;
      } else if (x > hi_[v] + opt_.feas_tol) {
        if (wr <= 0.0) return false;
        t = (x - hi_[v]) / wr;
        to = kAtUpper;
      } else if (wr > 0.0) {
        if (!std::isfinite(lo_[v])) return false;
        t = (x - lo_[v]) / wr;
        to = kAtLower;
      } else {
        if (!std::isfinite(hi_[v])) return false;
        t = (hi_[v] - x) / (-wr);
        to = kAtUpper;
      }
      t = std::max(t, 0.0);
      return true;
    };

    double theta_limit = own_cap;
    for (int r = 0; r < nrows_; ++r) {
      const double wr = dir * w[r];
      if (std::fabs(wr) < opt_.zero_pivot) continue;
      double t;
      std::uint8_t to;
      if (!strict_ratio(r, wr, t, to)) continue;
      // relaxed by the feasibility tolerance for pivot freedom
      theta_limit = std::min(theta_limit, t + opt_.feas_tol / std::fabs(wr));
    }

    if (theta_limit == kInf) {
      if (phase1) {
        throw NumericalError("phase-1 ray without blocking variable");
      }
      out.status = SolveStatus::Unbounded;
      break;
    }

    int leave_row = -1;  // -1 = bound flip at own_cap
    std::uint8_t leave_to = kAtLower;
    double theta = own_cap;
    double leave_pivot = 0.0;
    for (int r = 0; r < nrows_; ++r) {
      const double wr = dir * w[r];
      if (std::fabs(wr) < opt_.zero_pivot) continue;
      double t;
      std::uint8_t to;
      if (!strict_ratio(r, wr, t, to)) continue;
      if (t > theta_limit) continue;
      bool better;
      if (leave_row < 0) {
        better = true;
      } else if (bland_) {
        better = t < theta - 1e-12 ||
                 (t <= theta + 1e-12 && basis_[r] < basis_[leave_row]);
      } else if (std::fabs(wr) > std::fabs(leave_pivot) * (1 + 1e-12)) {
        better = true;
      } else if (std::fabs(wr) >= std::fabs(leave_pivot) * (1 - 1e-12)) {
        better = basis_[r] < basis_[leave_row];
      } else {
        better = false;
      }
      if (better) {
        theta = t;
        leave_row = r;
        leave_to = to;
        leave_pivot = wr;
      }
    }
    if (leave_row >= 0) {
      theta = std::min(theta, own_cap);
    } else {
      theta = own_cap;  // clean bound flip
    }

    ++iters_;
    if (theta <= 1e-11) {
      if (++degen_pivots_ > bland_threshold) bland_ = true;
    }

    if (leave_row < 0) {
      // entering variable flips to its opposite bound
      const double step = dir * theta;
      for (int r = 0; r < nrows_; ++r) {
        if (w[r] != 0.0) xval_[basis_[r]] -= step * w[r];
      }
      xval_[enter] = (dir > 0) ? hi_[enter] : lo_[enter];
      vstat_[enter] = (dir > 0) ? kAtUpper : kAtLower;
      verdict_is_fresh = false;
      continue;
    }

    if (std::fabs(w[leave_row]) < opt_.zero_pivot) {
      // unusable pivot: refactorize and retry the iteration
      refactorize();
      pivots_since_refactor = 0;
      verdict_is_fresh = true;
      continue;
    }

    // pivot
    const int leave_var = basis_[leave_row];
    const double step = dir * theta;
    for (int r = 0; r < nrows_; ++r) {
      if (w[r] != 0.0) xval_[basis_[r]] -= step * w[r];
    }
    double enter_from = 0.0;
    if (vstat_[enter] == kAtLower) enter_from = lo_[enter];
    else if (vstat_[enter] == kAtUpper) enter_from = hi_[enter];
    xval_[enter] = enter_from + step;
    xval_[leave_var] = (leave_to == kAtLower) ? lo_[leave_var] : hi_[leave_var];

    Eta eta;
    eta.row = leave_row;
    eta.pivot = w[leave_row];
    for (int r = 0; r < nrows_; ++r) {
      if (r != leave_row && w[r] != 0.0) eta.nnz.emplace_back(r, w[r]);
    }
    etas_.push_back(std::move(eta));

    vstat_[leave_var] = leave_to;
    in_basis_[leave_var] = -1;
    vstat_[enter] = kBasic;
    in_basis_[enter] = leave_row;
    basis_[leave_row] = enter;
    verdict_is_fresh = false;

    if (++pivots_since_refactor >= opt_.refactor_every) {
      refactorize();
      pivots_since_refactor = 0;
      verdict_is_fresh = true;
    }
  }

  // ---- extract ----
  out.stats.iterations = iters_;
  out.stats.refactorizations = refactors_;
  out.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (basis_out) {
    basis_out->basic = basis_;
    basis_out->status = vstat_;
  }
  if (out.status != SolveStatus::Optimal) return out;

  out.primal.assign(xval_.begin(), xval_.begin() + nstruct_);
  double obj = 0.0;
  for (int j = 0; j < nstruct_; ++j) obj += cost_[j] * xval_[j];
  out.objective = maximize_ ? -obj : obj;

  // shadow prices of the internal minimization
  for (int r = 0; r < nrows_; ++r) y[r] = cost_[basis_[r]];
  btran(y);
  out.duals.resize(nrows_);
  out.reduced_costs.resize(nstruct_);
  for (int j = 0; j < nstruct_; ++j) {
    double rc = reduced_cost(j, cost_, y);
    out.reduced_costs[j] = maximize_ ? -rc : rc;
  }
  for (int r = 0; r < nrows_; ++r) {
    const double shadow = maximize_ ? -y[r] : y[r];  // d(user obj)/d(rhs)
    const int s = nstruct_ + r;
    double delta;
    if (lo_[s] == 0.0 && hi_[s] == 0.0) {
      delta = shadow;  // equality: raw shadow price
    } else if (std::isfinite(hi_[s])) {
      // >= row: multiplier of the row in its stated direction
      delta = maximize_ ? -shadow : shadow;
    } else {
      // <= row
      delta = maximize_ ? shadow : -shadow;
    }
    out.duals[r] = delta;
  }
  return out;
}

}  // namespace

SolveOutcome simplex_solve(const LinearModel& model, const SolveOptions& options,
                           const std::vector<double>* lo_override,
                           const std::vector<double>* hi_override,
                           const BasisState* warm, BasisState* basis_out) {
  Simplex s(model, options, lo_override, hi_override);
  return s.run(warm, basis_out);
}

}  // namespace windcap::optkit
