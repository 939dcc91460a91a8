#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "windcap/errors.hpp"
#include "windcap/optkit/solve.hpp"

namespace windcap::optkit {

namespace {

class EmbeddedBackend final : public SolverBackend {
 public:
  SolveOutcome solve_lp(const LinearModel& model,
                        const SolveOptions& options) override {
    return simplex_solve(model, options);
  }
  SolveOutcome solve_milp(const LinearModel& model,
                          const SolveOptions& options) override {
    return branch_and_bound(model, options);
  }
};

struct Registry {
  std::mutex mu;
  std::map<std::string, std::shared_ptr<SolverBackend>> backends;
  Registry() { backends.emplace("embedded", std::make_shared<EmbeddedBackend>()); }
};

Registry& registry() {
  static Registry r;
  return r;
}

std::string known_names(Registry& r) {
  std::string s;
  for (const auto& [name, _] : r.backends) {
    if (!s.empty()) s += ", ";
    s += name;
  }
  return s;
}

/// Re-check an adapter's claim of optimality against the model.
void check_contract(const LinearModel& model, const SolveOptions& options,
                    const SolveOutcome& out, bool integrality) {
  if (out.status != SolveStatus::Optimal) return;
  if (static_cast<int>(out.primal.size()) != model.num_vars()) {
    throw ContractViolation("solver returned a primal of wrong dimension");
  }
  const double viol = model.max_violation(out.primal);
  if (viol > 10 * options.feas_tol) {
    throw ContractViolation(
        "solver returned an infeasible 'Optimal' point (violation " +
        std::to_string(viol) + ")");
  }
  if (integrality) {
    for (int j = 0; j < model.num_vars(); ++j) {
      if (!model.binary[j]) continue;
      const double v = out.primal[j];
      if (std::fabs(v - std::round(v)) > options.int_tol) {
        throw ContractViolation("solver returned a fractional binary (var " +
                                std::to_string(j) + " = " + std::to_string(v) +
                                ")");
      }
    }
  }
}

std::shared_ptr<SolverBackend> resolve(const SolveOptions& options) {
  return backend_get(options.backend.empty() ? "embedded" : options.backend);
}

}  // namespace

void backend_register(const std::string& name,
                      std::shared_ptr<SolverBackend> backend) {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  if (!r.backends.emplace(name, std::move(backend)).second) {
    throw ValidationError("solver backend already registered: " + name);
  }
}

std::vector<std::string> backend_names() {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> names;
  names.reserve(r.backends.size());
  for (const auto& [name, _] : r.backends) names.push_back(name);
  return names;
}

std::shared_ptr<SolverBackend> backend_get(const std::string& name) {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.backends.find(name);
  if (it == r.backends.end()) {
    throw ValidationError("unknown solver backend '" + name +
                          "' (registered: " + known_names(r) + ")");
  }
  return it->second;
}

SolveOutcome solve_lp(const LinearModel& model, const SolveOptions& options) {
  model.validate();
  if (!options.dump_path.empty()) model.dump_to_file(options.dump_path);
  SolveOutcome out = resolve(options)->solve_lp(model, options);
  check_contract(model, options, out, /*integrality=*/false);
  return out;
}

SolveOutcome solve_milp(const LinearModel& model, const SolveOptions& options) {
  model.validate();
  if (!options.dump_path.empty()) model.dump_to_file(options.dump_path);
  SolveOutcome out = resolve(options)->solve_milp(model, options);
  check_contract(model, options, out, /*integrality=*/true);
  return out;
}

}  // namespace windcap::optkit
