#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windcap/commitment.hpp"
#include "windcap/model.hpp"
#include "windcap/optkit/solve.hpp"
#include "windcap/uncertainty.hpp"

namespace windcap {

/// Row families of the feasibility check, in emission order.
enum class CkRowLabel { Capacity, Ramp, BalancePlus, BalanceMinus, Reserve, Line };

const char* to_string(CkRowLabel label);

/// The feasibility-check LP for one wind realization: dispatch variables
/// p (free), the uncertain wind coordinates w (fixed via bounds), and
/// one nonnegative slack per row; the objective is the total slack. A
/// zero optimum certifies that the committed fleet can absorb w.
struct CkProblem {
  optkit::LinearModel model;
  int units = 0, horizon = 0, lines = 0, m = 0;
  int p_offset = 0, w_offset = 0, z_offset = 0;
  std::vector<CkRowLabel> row_labels;
  std::vector<int> row_slack;  // row -> absolute slack variable index

  int num_rows() const { return static_cast<int>(row_labels.size()); }
  int num_slacks() const { return num_rows(); }
};

/// Compact matrix form of the feasibility check over [p; w; z]:
///   M p + T w + Q z <= m_vec
/// with Q carrying exactly one -1 per row (that row's slack).
struct StandardFormCK {
  int num_rows = 0, num_p = 0, m = 0;
  std::vector<std::vector<std::pair<int, double>>> m_rows;  // p coefficients
  std::vector<std::vector<std::pair<int, double>>> t_rows;  // w coefficients
  std::vector<int> q_slack;        // row -> slack index (0-based, == row)
  Eigen::VectorXd m_vec;
  std::vector<CkRowLabel> row_labels;

  /// Residual M p + T w + Q z - m_vec of one row.
  double residual(int row, const Eigen::VectorXd& p, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& z) const;
  /// T w for all rows.
  Eigen::VectorXd t_times(const Eigen::VectorXd& w) const;
};

struct CkReport {
  double value = 0.0;  // total violation, >= 0
  std::map<std::string, double> slack_breakdown;  // per family
  Eigen::MatrixXd dispatch;  // valid when value == 0 (units x hours)
};

struct WorstCaseResult {
  double value = 0.0;            // worst violation over the box
  bool conclusive = true;        // false when the MILP hit its node limit
  double gap = 0.0;              // MIP gap of the dual solve
  Eigen::VectorXd w_worst;       // MW, the maximizing corner
  Eigen::VectorXd tau;           // corner selectors (0 = low face)
  Eigen::VectorXd delta;         // row multipliers
  Eigen::VectorXd rho;           // decorrelated row image of delta
  Eigen::VectorXd t;             // linearized bilinear terms
  double cross_check = 0.0;      // direct F_c(w_worst)
};

/// Builds the feasibility-check LP at wind w (MW over the uncertain
/// coordinates of `um`).
CkProblem build_ck(const SystemCase& c, const CkConstants& k,
                   const UncertaintyModel& um, const Eigen::VectorXd& w);

/// Solves the check and reports the violation split by row family.
CkReport evaluate_ck(const SystemCase& c, const CkConstants& k,
                     const UncertaintyModel& um, const Eigen::VectorXd& w,
                     const optkit::SolveOptions& options = {});

StandardFormCK assemble_standard_form(const CkProblem& ck);

/// Interval bounds on rho = Lambda^(1/2) T' delta over all row
/// multipliers in [0, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> estimate_rho_bounds(
    const StandardFormCK& sf, const UncertaintyModel& um);

/// Dual of the feasibility check at a fixed wind vector (an LP): used by
/// the strong-duality checks.
optkit::LinearModel build_dual_lp(const StandardFormCK& sf,
                                  const Eigen::VectorXd& w);

/// Variable layout of the worst-case dual MILP.
struct DualMilp {
  optkit::LinearModel model;
  int delta_offset = 0, rho_offset = 0, t_offset = 0, tau_offset = 0;
  int num_rows = 0, m = 0;
};

/// The worst-case problem over the box as a MILP: maximize the dual
/// objective over row multipliers and the corner-selection binaries,
/// with the bilinear corner terms linearized through the rho bounds.
DualMilp build_dual_milp(const StandardFormCK& sf, const UncertaintyModel& um,
                         const BoxSet& box);

/// Worst violation over the probability-alpha box, via the dual MILP,
/// cross-checked by a direct primal solve at the recovered corner.
/// Throws NumericalError when the cross-check disagrees beyond 1e-5
/// relative.
WorstCaseResult solve_fw(const SystemCase& c, const CkConstants& k,
                         const UncertaintyModel& um, double alpha,
                         const optkit::SolveOptions& options = {});

/// CSV of the worst-case corner: label, forecast, worst value, side.
void write_worst_case_csv(const std::string& path, const UncertaintyModel& um,
                          const BoxSet& box, const WorstCaseResult& r);
std::string slack_breakdown_json(const CkReport& report);

}  // namespace windcap
