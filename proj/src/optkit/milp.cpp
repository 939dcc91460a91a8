// Embedded MILP solver: LP-based branch and bound over binary variables.
//
// Node selection is depth-first until the first incumbent (plunging),
// then best-bound; branching picks the most fractional binary, ties
// broken by lowest variable index. Node LPs warm-start from the parent
// basis. An integral node is polished by re-solving its LP with the
// binaries fixed at their rounded values, so incumbents carry exact 0/1
// entries and consistent continuous values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "windcap/errors.hpp"
#include "windcap/optkit/solve.hpp"

namespace windcap::optkit {

namespace {

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;                 // LP bound (minimization sense)
  std::vector<std::uint8_t> fix;        // per binary: 0 free, 1 at 0, 2 at 1
  std::shared_ptr<BasisState> basis;    // parent's optimal basis
};

struct OpenSet {
  std::vector<Node> nodes;

  bool empty() const { return nodes.empty(); }

  double best_bound() const {
    double b = kInf;
    for (const Node& n : nodes) b = std::min(b, n.bound);
    return b;
  }

  // plunge: deepest, newest; best-bound: smallest bound, oldest
  Node pop(bool plunge) {
    size_t pick = 0;
    for (size_t i = 1; i < nodes.size(); ++i) {
      const Node& a = nodes[i];
      const Node& b = nodes[pick];
      bool better;
      if (plunge) {
        better = a.depth > b.depth || (a.depth == b.depth && a.id > b.id);
      } else {
        better = a.bound < b.bound || (a.bound == b.bound && a.id < b.id);
      }
      if (better) pick = i;
    }
    Node n = std::move(nodes[pick]);
    nodes.erase(nodes.begin() + pick);
    return n;
  }
};

}  // namespace

SolveOutcome branch_and_bound(const LinearModel& model,
                              const SolveOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  model.validate();

  std::vector<int> bins;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.binary[j]) bins.push_back(j);
  }

  const bool maximize = model.sense == Sense::Maximize;
  const double flip = maximize ? -1.0 : 1.0;  // internal bounds are for min

  auto finish = [&](SolveOutcome out, long nodes, long pivots) {
    out.stats.nodes = nodes;
    out.stats.iterations = pivots;
    out.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
  };

  if (bins.empty()) {
    SolveOutcome out = simplex_solve(model, options);
    out.gap = 0.0;
    return finish(out, 1, out.stats.iterations);
  }

  std::vector<double> lo = model.lo, hi = model.hi;
  auto apply_fix = [&](const std::vector<std::uint8_t>& fix) {
    for (size_t k = 0; k < bins.size(); ++k) {
      const int j = bins[k];
      lo[j] = model.lo[j];
      hi[j] = model.hi[j];
      if (fix[k] == 1) hi[j] = 0.0;
      else if (fix[k] == 2) lo[j] = 1.0;
    }
  };

  long node_count = 0;
  long next_id = 0;
  long pivot_count = 0;
  bool have_incumbent = false;
  double incumbent = kInf;  // minimization sense
  std::vector<double> incumbent_x;
  bool hit_limit = false;

  OpenSet open;
  {
    Node root;
    root.id = node_count;
    root.fix.assign(bins.size(), 0);
    open.nodes.push_back(std::move(root));
  }

  const double int_tol = options.int_tol;

  while (!open.empty()) {
    // gap termination against the weakest open bound
    if (have_incumbent) {
      const double bb = std::min(open.best_bound(), incumbent);
      const double gap = (incumbent - bb) / std::max(1.0, std::fabs(incumbent));
      if (gap <= options.mip_gap) break;
    }
    if (node_count >= options.max_nodes) {
      hit_limit = true;
      break;
    }

    Node node = open.pop(!have_incumbent);
    if (have_incumbent && node.bound >= incumbent - 1e-12) continue;

    ++node_count;
    apply_fix(node.fix);
    BasisState basis_out;
    SolveOutcome lp = simplex_solve(model, options, &lo, &hi,
                                    node.basis.get(), &basis_out);
    pivot_count += lp.stats.iterations;

    if (lp.status == SolveStatus::Unbounded) {
      SolveOutcome out;
      out.status = SolveStatus::Unbounded;
      return finish(out, node_count, pivot_count);
    }
    if (lp.status == SolveStatus::IterationLimit) {
      hit_limit = true;
      break;
    }
    if (lp.status == SolveStatus::Infeasible) continue;

    const double node_obj = flip * lp.objective;
    const double bound = std::max(node_obj, node.bound);
    if (have_incumbent && bound >= incumbent - 1e-12) continue;

    // fractionality check
    int branch_k = -1;
    double most_frac = int_tol;
    for (size_t k = 0; k < bins.size(); ++k) {
      const double v = lp.primal[bins[k]];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > most_frac) {
        most_frac = frac;
        branch_k = static_cast<int>(k);
      }
    }

    if (branch_k < 0) {
      // integral: polish with binaries fixed at rounded values
      Node fixed = node;
      for (size_t k = 0; k < bins.size(); ++k) {
        fixed.fix[k] = lp.primal[bins[k]] > 0.5 ? 2 : 1;
      }
      apply_fix(fixed.fix);
      SolveOutcome polished =
          simplex_solve(model, options, &lo, &hi, &basis_out, nullptr);
      pivot_count += polished.stats.iterations;
      if (polished.status != SolveStatus::Optimal) continue;
      const double val = flip * polished.objective;
      if (!have_incumbent || val < incumbent - 1e-12) {
        have_incumbent = true;
        incumbent = val;
        incumbent_x = polished.primal;
        for (size_t k = 0; k < bins.size(); ++k) {
          incumbent_x[bins[k]] = fixed.fix[k] == 2 ? 1.0 : 0.0;
        }
      }
      continue;
    }

    // branch: the side nearest the LP value gets the larger id, so the
    // plunge (newest-first) explores it first
    const double v = lp.primal[bins[branch_k]];
    Node down = node, up = node;
    down.fix[branch_k] = 1;
    up.fix[branch_k] = 2;
    down.bound = up.bound = bound;
    down.depth = up.depth = node.depth + 1;
    auto basis_shared = std::make_shared<BasisState>(std::move(basis_out));
    down.basis = up.basis = basis_shared;
    if (v > 0.5) {
      down.id = ++next_id;
      up.id = ++next_id;
    } else {
      up.id = ++next_id;
      down.id = ++next_id;
    }
    open.nodes.push_back(std::move(down));
    open.nodes.push_back(std::move(up));
  }

  SolveOutcome out;
  if (have_incumbent) {
    const double bb = open.empty() ? incumbent
                                   : std::min(open.best_bound(), incumbent);
    out.status = hit_limit ? SolveStatus::IterationLimit : SolveStatus::Optimal;
    out.objective = flip * incumbent;
    out.primal = std::move(incumbent_x);
    out.gap = std::max(0.0, (incumbent - bb) /
                                std::max(1.0, std::fabs(incumbent)));
  } else {
    out.status = hit_limit ? SolveStatus::IterationLimit
                           : SolveStatus::Infeasible;
    out.gap = std::numeric_limits<double>::quiet_NaN();
  }
  return finish(out, node_count, pivot_count);
}

}  // namespace windcap::optkit
