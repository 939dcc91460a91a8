#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windcap/model.hpp"
#include "windcap/optkit/solve.hpp"

namespace windcap {

/// Variable layout of the commitment model: all matrices are
/// units x hours, flattened row-major into [u | v | p] blocks.
struct UcIndex {
  int units = 0, horizon = 0;
  int u(int i, int h) const { return i * horizon + h; }
  int v(int i, int h) const { return units * horizon + i * horizon + h; }
  int p(int i, int h) const { return 2 * units * horizon + i * horizon + h; }
  int num_vars() const { return 3 * units * horizon; }
};

/// Day-ahead schedule: on/off states, startup indicators and dispatch at
/// the forecast wind, plus the optimal cost.
struct CommitmentSchedule {
  Eigen::MatrixXi u_star;  // units x hours
  Eigen::MatrixXi v;       // startups
  Eigen::MatrixXd p;       // MW
  double objective = 0.0;  // $
};

/// Hour-by-hour constants consumed by the feasibility check, all derived
/// from the committed states:
///   p_lo/p_hi      committed generation bounds u* P-/u* P+   (N x H)
///   dp_hi(i,h)     max upward move from hour h to h+1         (N x H-1)
///   dp_lo(i,h)     max downward move from hour h to h+1       (N x H-1)
///   r_lo(h)        committed minimum plus down-reserve demand (H)
///   r_hi(h)        committed capacity minus up-reserve demand (H)
struct CkConstants {
  Eigen::MatrixXd p_lo, p_hi;
  Eigen::MatrixXd dp_lo, dp_hi;
  Eigen::VectorXd r_lo, r_hi;
};

/// Builds the unit-commitment MILP at forecast wind. Layout per UcIndex.
optkit::LinearModel build_uc(const SystemCase& c, const PtdfMatrix& ptdf);

/// Hours the unit must stay on (off) at the start of the horizon to
/// serve the remainder of a minimum-run (minimum-down) obligation
/// carried in through initial_state.
int forced_on_hours(const ThermalUnit& u);
int forced_off_hours(const ThermalUnit& u);

/// Solves the UC and re-validates the schedule by direct substitution
/// into the commitment constraints (independent of solver residuals).
/// Throws InfeasibleError when no feasible commitment exists.
CommitmentSchedule solve_uc(const SystemCase& c,
                            const optkit::SolveOptions& options = {});

/// Direct-substitution checker; returns human-readable violations
/// (empty when the schedule satisfies every constraint to `tol` MW).
std::vector<std::string> check_schedule(const SystemCase& c,
                                        const PtdfMatrix& ptdf,
                                        const CommitmentSchedule& s,
                                        double tol = 1e-6);

CkConstants derive_ck_constants(const SystemCase& c,
                                const CommitmentSchedule& s);

/// Schedule file: {"u": matrix, "p": matrix, "objective": cost}.
std::string schedule_to_json_text(const CommitmentSchedule& s);
CommitmentSchedule schedule_from_json_text(const std::string& text,
                                           const std::string& origin);
void save_schedule(const CommitmentSchedule& s, const std::string& path);
CommitmentSchedule load_schedule(const std::string& path);

/// Fixed-width commitment table for terminal output.
std::string schedule_table(const SystemCase& c, const CommitmentSchedule& s);

}  // namespace windcap
