#pragma once

#include "lockbench/netlist.hpp"
#include "lockbench/sim.hpp"
#include "lockbench/solver.hpp"

#include <map>
#include <string>
#include <vector>

namespace lockbench {

/// CNF over positive integer variables. Named circuit signals map to
/// variables via var_of_signal; Tseitin chaining may allocate anonymous
/// auxiliaries beyond the named ones.
struct CnfInstance {
	std::vector<std::vector<Lit>> clauses;
	std::map<std::string, int> var_of_signal;
	int num_vars = 0;

	int var(const std::string &signal) const;
	int fresh_var() { return ++num_vars; }
	void add(std::vector<Lit> clause) { clauses.push_back(std::move(clause)); }
	void add_unit(const std::string &signal, bool value);

	/// Bit-exact DIMACS: `p cnf V C` header, clauses zero-terminated.
	std::string to_dimacs() const;
	/// var_map as JSON ({"signal": var, ...}) for debugging.
	std::string var_map_json() const;
	/// Loads every clause into a solver (which must be fresh or already
	/// consistent with earlier loads of the same instance).
	void load_into(Solver &s) const;
};

/// Tseitin encoding of a combinational netlist (no DFFs, no ROMs). Every
/// total assignment of the input/key variables extends to exactly one
/// model. Variable numbering: signals sorted by (frame, name) where the
/// frame is the `@k` suffix produced by unroll (-1 when absent), so keys
/// and plain signals come first and frames are contiguous.
CnfInstance tseitin(const Netlist &comb);

/// Appends the Tseitin clauses of `comb` into an existing instance with a
/// caller-chosen variable for each signal: `shared` maps signals that
/// reuse existing variables (inputs, keys); all other signals get fresh
/// variables. Returns the full signal -> variable map of this copy.
std::map<std::string, int> tseitin_into(CnfInstance &cnf, const Netlist &comb,
					const std::map<std::string, int> &shared);

/// Time-frame unrolling: a purely combinational netlist over renamed
/// signals `<sig>@<frame>`. Frame-0 DFF outputs and ROM read registers are
/// bound to the initial state via `bound_constants`; frame k+1 DFF outputs
/// alias frame k effective next-state values; ROM reads are inlined with
/// their one-cycle latency (contents known — for unknown contents convert
/// with memory_as_luts first). Key inputs keep their names and are shared
/// across frames.
struct UnrolledCircuit {
	Netlist comb;
	int frames = 0;
	std::vector<std::vector<std::string>> frame_inputs;  // [frame][orig input order]
	std::vector<std::vector<std::string>> frame_outputs; // [frame][orig output order]
	std::vector<std::string> key_inputs;
	std::map<std::string, bool> bound_constants;

	/// Evaluates the unrolled circuit on a b-frame input sequence,
	/// returning per-frame outputs (cross-check against Simulator::run).
	std::vector<OutputVector> eval(const std::vector<InputVector> &seq,
				       const std::map<std::string, bool> &key) const;
};

UnrolledCircuit unroll(const Netlist &n, int frames, const SimState &initial);

/// Two key-disjoint copies of the unrolled circuit sharing all frame
/// inputs, with a difference flag forced true: SAT models are
/// discriminating input sequences for some key pair.
struct Miter {
	CnfInstance cnf;
	std::map<std::string, int> shared_vars; // frame inputs + bound constants
	std::map<std::string, int> key1, key2;  // key name -> variable
	std::map<std::string, int> out1, out2;  // frame output signal -> variable
	std::map<std::string, int> map1, map2;  // full signal -> variable maps per copy
	int diff_var = 0;
};

/// With force_diff the difference flag is asserted as a unit clause;
/// attacks pass false and instead assume diff_var, keeping one
/// incremental solver usable for both DIS search and key extraction.
Miter build_miter(const UnrolledCircuit &u, bool force_diff = true);

/// Algorithm-2-style constraining: appends two fresh copies of the
/// unrolled circuit (sharing the miter's key variables) with inputs fixed
/// to `seq` and outputs fixed to the oracle's `outs`. New clauses go to
/// m.cnf.clauses; callers tracking a solver incrementally should note the
/// clause count before calling.
void constrain_io(Miter &m, const UnrolledCircuit &u, const std::vector<InputVector> &seq,
		  const std::vector<OutputVector> &outs);

/// Appends activatable K1 = K2 equality clauses and returns the
/// activation variable: assuming it forces the two key copies equal
/// (KeyGenCircuit extraction); leaving it free keeps the miter intact.
int add_key_equality(Miter &m);

} // namespace lockbench
