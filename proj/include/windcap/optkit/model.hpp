#pragma once

#include <limits>
#include <string>
#include <vector>

namespace windcap::optkit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };

/// One nonzero coefficient of a row.
struct Term {
  int var;
  double coef;
};

struct Row {
  std::vector<Term> terms;  // sorted by var, no duplicates
  Relation rel;
  double rhs;
  std::string name;
};

/// In-memory LP/MILP: min (or max) c'x subject to rows and variable
/// bounds, with an optional set of binary variables. Rows are stored
/// sparse; duplicate indices passed to add_row are merged.
class LinearModel {
 public:
  Sense sense = Sense::Minimize;
  std::vector<double> obj;
  std::vector<double> lo, hi;
  std::vector<bool> binary;
  std::vector<std::string> var_names;
  std::vector<Row> rows;

  int num_vars() const { return static_cast<int>(obj.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_binaries() const;

  int add_var(double lo_, double hi_, double obj_coef, std::string name = {});
  int add_binary(double obj_coef, std::string name = {});
  int add_row(Relation rel, double rhs, std::vector<Term> terms,
              std::string name = {});

  /// Throws ValidationError on bad indices, binary bounds outside [0,1],
  /// or a non-finite rhs.
  void validate() const;

  /// Row activity a'x for a given point.
  double row_activity(const Row& row, const std::vector<double>& x) const;

  /// Largest violation of any row or variable bound at x (0 if feasible).
  double max_violation(const std::vector<double>& x) const;

  /// Plain-text dump in an LP-format style, for debugging.
  void dump(std::ostream& os) const;
  void dump_to_file(const std::string& path) const;
};

}  // namespace windcap::optkit
