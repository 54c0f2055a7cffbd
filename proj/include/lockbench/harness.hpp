#pragma once

#include "lockbench/attack.hpp"
#include "lockbench/lock_c.hpp"
#include "lockbench/lock_l.hpp"

#include <filesystem>

namespace lockbench {

/// One locking job. `method` is "scramble-c" or "scramble-l"; targets is
/// fsm|datapath|scan (pin family the CRLB cuts); strategy is
/// msb|lsb|mixed|scan-window|explicit.
struct LockRequest {
	std::string method = "scramble-c";
	int size = 2;	    // CRLB port count (scramble-c)
	int m = 0, p = 1;   // extra LOG2 network parameters
	int addr_width = 0; // scramble-l: expected ROM address width, 0 = accept natural
	bool fsmim = false;
	std::string targets = "fsm";
	std::string strategy = "lsb";
	std::vector<std::string> explicit_ffs;
	std::vector<std::string> state_hint; // state register, MSB first
	uint64_t seed = 1;
	int self_check_sequences = 100;
};

struct LockOutcome {
	LockPackage package;
	bool self_check = false;
	uint64_t key_bits = 0; // key inputs, or ROM content bits for scramble-l
};

LockOutcome lock_circuit(const Netlist &n, const LockRequest &req);

/// Writes the locked bench (plus hex sidecar for memory locks) and the
/// key JSON next to it.
void write_lock_outputs(const LockOutcome &outcome, const std::filesystem::path &bench_path,
			const std::filesystem::path &key_path);

struct AttackRequest {
	std::string method = "ubsat"; // ubsat | two-stage | scansat
	UbsatConfig ubsat;
	FunctionalLimits functional;
};

struct AttackOutcome {
	std::string method;
	UbsatResult ubsat;	 // ubsat/scansat
	TwoStageReport two_stage; // two-stage
	bool used_lut_model = false;
	int64_t wall_ms = 0;

	std::string status() const;
	std::string to_json() const;
	/// 0 = attack positive, 1 = attack negative.
	int exit_code() const;
};

/// Runs one attack with the oracle wrapped query-only. Locked memories
/// are modeled as free-key LUTs for the SAT attacks.
AttackOutcome run_attack(const Netlist &locked, const Netlist &original, const AttackRequest &req);

struct ExperimentPlan {
	struct Lock {
		std::string label;
		LockRequest req;
	};
	struct Attack {
		std::string label;
		AttackRequest req;
	};
	std::vector<std::filesystem::path> circuits;
	std::vector<Lock> locks;
	std::vector<Attack> attacks; // empty = lock-only sweep
	int workers = 1;

	/// Referenced files must exist and time limits must be positive.
	void validate() const;
};

ExperimentPlan parse_plan_json(const std::string &text, const std::filesystem::path &base_dir);

struct ReportRow {
	std::string circuit;
	int ffs = 0;
	int gates = 0;
	std::string method;
	std::string param;
	std::string attack; // "-" for lock-only rows
	std::string status; // key-found | TIMEOUT | inconclusive-at-bound | ok | ... | error
	int64_t wall_ms = 0;
	bool key_verified = false;
};

struct ExperimentReport {
	std::vector<ReportRow> rows;

	std::string to_csv() const;
	/// Paper-style pivots (circuit rows, lock columns, ✗ for timeouts)
	/// followed by a flat table carrying the full CSV data.
	std::string to_markdown() const;
};

/// One row per (circuit, lock, attack) cell; cells run in a worker pool
/// and per-cell failures are recorded as error rows, never aborting the
/// sweep.
ExperimentReport run_experiments(const ExperimentPlan &plan);

} // namespace lockbench
