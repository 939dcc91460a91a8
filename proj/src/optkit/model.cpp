#include "windcap/optkit/model.hpp"

#include <algorithm>

#include "windcap/optkit/solve.hpp"
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "windcap/errors.hpp"

namespace windcap::optkit {

int LinearModel::num_binaries() const {
  return static_cast<int>(std::count(binary.begin(), binary.end(), true));
}

int LinearModel::add_var(double lo_, double hi_, double obj_coef,
                         std::string name) {
  obj.push_back(obj_coef);
  lo.push_back(lo_);
  hi.push_back(hi_);
  binary.push_back(false);
  var_names.push_back(std::move(name));
  return num_vars() - 1;
}

int LinearModel::add_binary(double obj_coef, std::string name) {
  int v = add_var(0.0, 1.0, obj_coef, std::move(name));
  binary[v] = true;
  return v;
}

int LinearModel::add_row(Relation rel, double rhs, std::vector<Term> terms,
                         std::string name) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  // merge duplicate variables, drop exact zeros
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  rows.push_back(Row{std::move(merged), rel, rhs, std::move(name)});
  return num_rows() - 1;
}

void LinearModel::validate() const {
  const int n = num_vars();
  for (int j = 0; j < n; ++j) {
    if (lo[j] > hi[j]) {
      throw ValidationError("variable " + std::to_string(j) +
                            ": lower bound exceeds upper bound");
    }
    if (binary[j] && (lo[j] < 0.0 || hi[j] > 1.0)) {
      throw ValidationError("binary variable " + std::to_string(j) +
                            ": bounds outside [0,1]");
    }
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    if (!std::isfinite(rows[r].rhs)) {
      throw ValidationError("row " + std::to_string(r) + ": non-finite rhs");
    }
    for (const Term& t : rows[r].terms) {
      if (t.var < 0 || t.var >= n) {
        throw ValidationError("row " + std::to_string(r) +
                              ": variable index out of range");
      }
      if (!std::isfinite(t.coef)) {
        throw ValidationError("row " + std::to_string(r) +
                              ": non-finite coefficient");
      }
    }
  }
}

double LinearModel::row_activity(const Row& row,
                                 const std::vector<double>& x) const {
  double a = 0.0;
  for (const Term& t : row.terms) a += t.coef * x[t.var];
  return a;
}

double LinearModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lo[j] - x[j]);
    worst = std::max(worst, x[j] - hi[j]);
  }
  for (const Row& row : rows) {
    const double a = row_activity(row, x);
    switch (row.rel) {
      case Relation::LessEqual: worst = std::max(worst, a - row.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, row.rhs - a); break;
      case Relation::Equal: worst = std::max(worst, std::fabs(a - row.rhs)); break;
    }
  }
  return worst;
}

namespace {

std::string var_label(const LinearModel& m, int j) {
  if (!m.var_names[j].empty()) return m.var_names[j];
  return "x" + std::to_string(j);
}

void write_expr(std::ostream& os, const LinearModel& m,
                const std::vector<Term>& terms) {
  bool first = true;
  for (const Term& t : terms) {
    const double c = t.coef;
    if (first) {
      if (c == 1.0) os << var_label(m, t.var);
      else if (c == -1.0) os << "- " << var_label(m, t.var);
      else os << c << " " << var_label(m, t.var);
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
      const double a = std::fabs(c);
      if (a == 1.0) os << var_label(m, t.var);
      else os << a << " " << var_label(m, t.var);
    }
  }
  if (first) os << "0";
}

}  // namespace

void LinearModel::dump(std::ostream& os) const {
  os << (sense == Sense::Minimize ? "minimize" : "maximize") << "\n  obj: ";
  std::vector<Term> objterms;
  for (int j = 0; j < num_vars(); ++j) {
    if (obj[j] != 0.0) objterms.push_back({j, obj[j]});
  }
  write_expr(os, *this, objterms);
  os << "\nsubject to\n";
  for (int r = 0; r < num_rows(); ++r) {
    const Row& row = rows[r];
    os << "  " << (row.name.empty() ? "r" + std::to_string(r) : row.name)
       << ": ";
    write_expr(os, *this, row.terms);
    switch (row.rel) {
      case Relation::LessEqual: os << " <= "; break;
      case Relation::Equal: os << " = "; break;
      case Relation::GreaterEqual: os << " >= "; break;
    }
    os << row.rhs << "\n";
  }
  os << "bounds\n";
  for (int j = 0; j < num_vars(); ++j) {
    os << "  " << lo[j] << " <= " << var_label(*this, j) << " <= " << hi[j]
       << "\n";
  }
  bool any_bin = false;
  for (int j = 0; j < num_vars(); ++j) {
    if (binary[j]) {
      if (!any_bin) { os << "binary\n "; any_bin = true; }
      os << " " << var_label(*this, j);
    }
  }
  if (any_bin) os << "\n";
  os << "end\n";
}

void LinearModel::dump_to_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot open model dump file: " + path);
  dump(f);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

}  // namespace windcap::optkit
