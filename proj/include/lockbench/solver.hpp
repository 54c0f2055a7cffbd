#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace lockbench {

/// DIMACS-style literal: +v asserts variable v, -v its negation. Variables
/// are positive integers.
using Lit = int;

enum class SolveResult { Sat, Unsat, Unknown };

/// Incremental CDCL solver: two-watched-literal propagation, 1UIP clause
/// learning, VSIDS branching with phase saving, Luby restarts, solving
/// under assumptions, and an optional wall-clock deadline (Unknown on
/// expiry). Clauses may be added between solve() calls.
class Solver {
      public:
	Solver();
	~Solver();
	Solver(const Solver &) = delete;
	Solver &operator=(const Solver &) = delete;

	int new_var();
	void ensure_vars(int max_var);
	int num_vars() const;
	uint64_t num_clauses() const;
	uint64_t num_conflicts() const;

	/// False when the clause set is already unsatisfiable at the root.
	bool add_clause(const std::vector<Lit> &clause);

	SolveResult solve(const std::vector<Lit> &assumptions = {});
	SolveResult solve_until(const std::vector<Lit> &assumptions,
				std::optional<std::chrono::steady_clock::time_point> deadline);

	/// Model access after Sat. Unassigned (eliminated) variables read as
	/// false.
	bool model_value(int var) const;

      private:
	struct Impl;
	Impl *impl_;
};

} // namespace lockbench
