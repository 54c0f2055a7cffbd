#pragma once

#include "lockbench/cnf.hpp"
#include "lockbench/fsm.hpp"

#include <chrono>
#include <map>
#include <string>
#include <vector>

namespace lockbench {

/// Black-box oracle over the functional (unlocked) circuit. Attack code
/// sees only the pin interface and query(); the netlist stays private so
/// structural access from attack paths cannot compile.
class Oracle {
      public:
	/// Wraps an original netlist, or a locked netlist plus its correct
	/// key. Resets to the all-zero state on every query.
	explicit Oracle(Netlist n, const std::map<std::string, bool> &key = {});
	Oracle(const Oracle &) = delete; // the simulator points into the hidden netlist
	Oracle &operator=(const Oracle &) = delete;

	std::vector<OutputVector> query(const std::vector<InputVector> &seq) const;

	const std::vector<std::string> &input_names() const { return inputs_; }
	const std::vector<std::string> &output_names() const { return outputs_; }

      private:
	Netlist netlist_;
	Simulator sim_;
	std::vector<std::string> inputs_, outputs_;
};

/// Stage 1 of the 2-stage FSM attack: candidate state-register sets.
/// Pipeline: classify DFFs by structural control signature, drop DFFs on
/// no feedback cycle, split sets along SCC boundaries, drop registers
/// whose next state never (transitively) depends on a primary input.
/// Deterministic order; empty result when nothing survives.
std::vector<std::vector<std::string>> topological_analysis(const Netlist &n);

struct FunctionalResult {
	Stg stg;
	/// False when some (state, input) pair reaches more than one next
	/// state (free key/memory/datapath variables make the STG ambiguous).
	bool determinate = true;
	uint64_t sat_calls = 0;
};

struct FunctionalLimits {
	size_t max_states = 1u << 16;
	size_t max_transitions = 1u << 20;
};

/// Stage 2: STG extraction by SAT enumeration. Per reachable state, all
/// (input, next-state) pairs are enumerated with blocking clauses;
/// non-state DFFs and key inputs are free variables; ROMs are treated as
/// unknown logic (converted to free-key LUTs).
FunctionalResult functional_analysis(const Netlist &n, const std::vector<std::string> &state_ffs,
				     uint32_t initial, const FunctionalLimits &limits = {});

struct TwoStageReport {
	std::vector<std::vector<std::string>> candidate_sets;
	std::vector<std::string> chosen_state_ffs; // largest candidate set
	uint32_t initial_state = 0;
	FunctionalResult functional;
	int64_t stage1_ms = 0;
	int64_t stage2_ms = 0;
};

TwoStageReport two_stage_attack(const Netlist &n, const FunctionalLimits &limits = {});

enum class UbsatStatus { KeyFound, Timeout, InconclusiveAtBound };

const char *ubsat_status_name(UbsatStatus s);

struct UbsatConfig {
	int initial_boundary = 1;
	int boundary_step = 1;
	int max_bound = 40;
	std::chrono::milliseconds time_limit{600000};
	int verify_sequences = 1000;
	int verify_cycles = 50;
	uint64_t verify_seed = 12345;
};

struct UbsatResult {
	UbsatStatus status = UbsatStatus::InconclusiveAtBound;
	std::map<std::string, bool> key; // best candidate; authoritative when key-found
	int bound = 0;
	int dis_count = 0;
	int64_t wall_ms = 0;
	int verify_sequences = 0;
	int verify_mismatches = 0;
	bool key_verified = false;

	std::string to_json() const;
};

/// Unrolling-based SAT attack: DIS loop at growing bounds; on inner-loop
/// UNSAT the termination checks run in order — unique completion (exactly
/// one surviving key up to the bound), combinational equivalence of all
/// surviving keys on outputs and observable next state, and the bound cap
/// standing in for unbounded model checking. Any returned key is
/// re-verified against the oracle on random sequences.
UbsatResult ubsat_attack(const Netlist &locked, const Oracle &oracle, const UbsatConfig &cfg = {});

/// ScanSAT-style attack on a scan-stitched locked netlist: one scan-load,
/// one capture, one scan-read window is modeled as a single unrolled
/// combinational function of the scan-in vector, capture inputs and key.
UbsatResult scan_unroll_attack(const Netlist &locked, const Oracle &oracle, const UbsatConfig &cfg = {});

} // namespace lockbench
