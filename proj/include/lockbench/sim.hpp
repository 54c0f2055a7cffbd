#pragma once

#include "lockbench/netlist.hpp"

#include <map>

namespace lockbench {

/// Register state of a sequential netlist: one bit per DFF plus the
/// registered read word of each ROM. Caller-owned.
struct SimState {
	std::vector<bool> dff_values;
	std::vector<std::vector<bool>> rom_pipeline;

	static SimState all_zero(const Netlist &n);
};

using InputVector = std::vector<bool>;  // one bit per primary input, netlist order
using OutputVector = std::vector<bool>; // one bit per primary output

/// Cycle-accurate two-valued simulator. Compiles the netlist once
/// (signal numbering + topological gate order); stepping is then cheap.
/// Deterministic: DFFs update on cycle boundaries, ROM reads have one
/// cycle of latency, initial state is whatever SimState the caller hands
/// in (all-zero by convention).
class Simulator {
      public:
	explicit Simulator(const Netlist &n);

	/// Binds the key inputs once. Must be called before step/run when
	/// the netlist has key inputs. Order follows n.key_inputs.
	void bind_key(const std::vector<bool> &key_bits);
	void bind_key(const std::map<std::string, bool> &key);

	/// Advances one cycle: evaluates combinational logic on (state,
	/// inputs), returns outputs, updates state in place.
	OutputVector step(SimState &state, const InputVector &in) const;

	std::vector<OutputVector> run(SimState state, const std::vector<InputVector> &seq) const;
	std::vector<OutputVector> run_from_zero(const std::vector<InputVector> &seq) const;

	/// Current value of an arbitrary signal after the most recent step's
	/// combinational evaluation. Mainly for tests and cone extraction.
	bool value_of(const std::string &signal) const;

	const Netlist &netlist() const { return *netlist_; }

      private:
	const Netlist *netlist_;
	int num_signals_ = 0;
	std::unordered_map<std::string, int> signal_id_;
	std::vector<int> input_ids_, key_ids_, output_ids_;
	std::vector<int> dff_d_ids_, dff_q_ids_;
	std::vector<int> dff_si_ids_, dff_se_ids_; // -1 when not scan
	struct CompiledGate {
		GateKind kind;
		std::vector<int> in;
		int out;
	};
	std::vector<CompiledGate> order_; // topological
	struct CompiledRom {
		std::vector<int> addr;
		std::vector<int> data;
		const std::vector<std::vector<bool>> *contents;
	};
	std::vector<CompiledRom> roms_;
	std::vector<bool> key_values_;
	bool key_bound_ = false;
	mutable std::vector<uint8_t> values_;

	void eval_comb(const SimState &state, const InputVector &in) const;
};

/// Runs both netlists from all-zero state on the same sequences and
/// reports the first mismatching (sequence, cycle) if any. Keys are bound
/// per netlist (empty map allowed when a netlist has no key inputs).
struct EquivalenceReport {
	bool equivalent = true;
	int sequence = -1;
	int cycle = -1;
	int sequences_run = 0;
};

EquivalenceReport check_equivalence_random(const Netlist &a, const std::map<std::string, bool> &key_a,
					   const Netlist &b, const std::map<std::string, bool> &key_b,
					   int num_sequences, int cycles, uint64_t seed);

/// Exhaustive over all input sequences of the given length. Only sane for
/// tiny circuits.
bool check_equivalence_exhaustive(const Netlist &a, const std::map<std::string, bool> &key_a,
				  const Netlist &b, const std::map<std::string, bool> &key_b,
				  int max_cycles);

} // namespace lockbench
