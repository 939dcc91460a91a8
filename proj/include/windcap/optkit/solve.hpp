#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "windcap/optkit/model.hpp"

namespace windcap::optkit {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveStats {
  long iterations = 0;      // simplex pivots (LP) / total pivots (MILP)
  long refactorizations = 0;
  long nodes = 0;           // branch-and-bound nodes (MILP)
  double seconds = 0.0;
};

/// Result of an LP or MILP solve.
///
/// Dual convention (LP only): duals[i] is the nonnegative multiplier of
/// row i taken in its stated direction, i.e. the optimal objective
/// degrades by duals[i] * eps when a <= row's rhs is tightened by eps
/// (and improves when relaxed); equality rows carry the raw shadow price
/// d(objective)/d(rhs), which has no canonical sign. Internally a
/// minimization sees nonpositive shadow prices on <= rows; the exposed
/// value is the sign-flipped, nonnegative form.
struct SolveOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;         // structural variables
  std::vector<double> duals;          // per row, convention above (LP)
  std::vector<double> reduced_costs;  // per variable (LP)
  double gap = 0.0;                   // relative MIP gap (MILP)
  SolveStats stats;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SolveOptions {
  double feas_tol = 1e-7;     // row / bound feasibility
  double dual_tol = 1e-9;     // reduced-cost optimality threshold
  double zero_pivot = 1e-10;  // smallest acceptable pivot magnitude
  double int_tol = 1e-6;      // binary integrality
  double mip_gap = 1e-6;      // relative MIP termination gap
  long max_lp_iterations = 2'000'000;
  long max_nodes = 2'000'000;
  int refactor_every = 100;   // pivots between basis refactorizations
  std::string backend;        // empty = default ("embedded")
  std::string dump_path;      // write the model before solving if set
};

/// Warm-start state of the embedded simplex: which variable is basic in
/// each row, plus the at-bound status of every variable (structural then
/// one logical per row). Opaque to callers other than the MILP driver.
struct BasisState {
  std::vector<int> basic;
  std::vector<std::uint8_t> status;
  bool empty() const { return basic.empty(); }
};

/// Backend interface. Third-party adapters implement the same contracts
/// as the embedded solver:
///  - solve_lp ignores integrality marks (relaxation) and fills duals
///    using the convention documented on SolveOutcome;
///  - solve_milp honors binary marks and reaches the requested gap;
///  - Infeasible / Unbounded are statuses, not exceptions; dimension or
///    input errors are exceptions.
/// Results returned through solve_lp()/solve_milp() below are re-checked
/// for primal feasibility, so a misbehaving adapter surfaces as a
/// ContractViolation rather than silent bad numbers.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolveOutcome solve_lp(const LinearModel& model,
                                const SolveOptions& options) = 0;
  virtual SolveOutcome solve_milp(const LinearModel& model,
                                  const SolveOptions& options) = 0;
};

/// Registers a backend under a unique name. Throws ValidationError on a
/// duplicate name. The embedded solver is pre-registered as "embedded".
void backend_register(const std::string& name,
                      std::shared_ptr<SolverBackend> backend);
std::vector<std::string> backend_names();
std::shared_ptr<SolverBackend> backend_get(const std::string& name);

/// Checked entry points: route to options.backend (default "embedded"),
/// then re-verify row feasibility / integrality of Optimal outcomes.
SolveOutcome solve_lp(const LinearModel& model,
                      const SolveOptions& options = {});
SolveOutcome solve_milp(const LinearModel& model,
                        const SolveOptions& options = {});

/// Embedded revised simplex (bounded variables, two-phase, Bland
/// fallback after 10*num_vars degenerate pivots). Used directly by the
/// branch-and-bound driver for warm starts and bound overrides.
SolveOutcome simplex_solve(const LinearModel& model,
                           const SolveOptions& options,
                           const std::vector<double>* lo_override = nullptr,
                           const std::vector<double>* hi_override = nullptr,
                           const BasisState* warm = nullptr,
                           BasisState* basis_out = nullptr);

/// Embedded branch and bound over the binary variables of the model.
SolveOutcome branch_and_bound(const LinearModel& model,
                              const SolveOptions& options);

}  // namespace windcap::optkit
