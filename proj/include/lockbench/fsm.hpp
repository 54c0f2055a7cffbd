#pragma once

#include "lockbench/netlist.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lockbench {

/// One expanded transition: concrete input vector, no cubes. Inputs and
/// outputs are packed LSB-first over the corresponding name lists; state
/// codes are packed with the MSB-first bit order of the state register.
struct StgTransition {
	uint32_t state;
	uint32_t input;
	uint32_t next;
	uint32_t output;

	auto operator<=>(const StgTransition &) const = default;
};

/// Explicit state transition graph over reachable states.
struct Stg {
	int state_width = 0;
	int input_width = 0;
	int output_width = 0;
	uint32_t initial = 0;
	std::set<uint32_t> states;
	std::set<StgTransition> transitions;
	std::vector<std::string> input_names;
	std::vector<std::string> output_names;

	/// No two transitions from one (state, input) with different next
	/// state or output.
	bool is_deterministic() const;
	void validate() const;
};

bool stg_equal(const Stg &a, const Stg &b);

struct StgDiff {
	std::set<uint32_t> extra_states;          // in b, not in a
	std::set<StgTransition> missing_transitions; // in a, not in b
	std::set<StgTransition> false_transitions;   // in b, not in a

	bool empty() const
	{
		return extra_states.empty() && missing_transitions.empty() && false_transitions.empty();
	}
};

StgDiff stg_diff(const Stg &a, const Stg &b);

std::string stg_to_dot(const Stg &stg);

/// Symbolic FSM description. Encodings are injective maps from state
/// names to codes of a shared width.
struct FsmSpec {
	std::vector<std::string> inputs;
	std::vector<std::string> outputs;
	std::vector<std::string> state_names;
	std::map<std::string, uint32_t> encoding;
	int state_width = 0;
	std::string initial;

	struct Transition {
		std::string from;
		std::string input_cube; // over inputs, chars 0/1/-, inputs[0] first
		std::string to;
		std::string output_bits; // chars 0/1, outputs[0] first
	};
	std::vector<Transition> transitions;

	/// Requires: complete (every state covers every input pattern) and
	/// deterministic. Throws NetlistError otherwise.
	void validate() const;

	/// Reference STG (expanded over concrete inputs, reachable states
	/// only).
	Stg to_stg() const;
};

/// Parses the small FSM text format:
///   inputs a b
///   outputs y
///   encoding binary | onehot | explicit
///   state S0 [code]       (code required for explicit encoding)
///   initial S0
///   trans S0 0- S1 1      (from, input cube, to, output bits)
FsmSpec parse_fsm_spec(const std::string &text);
std::string write_fsm_spec(const FsmSpec &spec);

struct SynthesizedFsm {
	Netlist netlist;
	std::vector<std::string> state_ffs; // MSB first
};

/// Two-level (sum-of-products) implementation of the next-state and
/// output functions. FF q names are `<prefix>_q<i>` with q0 the MSB.
SynthesizedFsm synthesize_fsm(const FsmSpec &spec, const std::string &prefix = "fsm");

/// Exact reachable STG by BFS with exhaustive input sweep. The netlist
/// must be a pure FSM: its DFFs are exactly `state_ffs` (MSB first) and
/// it has at most 16 inputs.
Stg extract_stg_explicit(const Netlist &n, const std::vector<std::string> &state_ffs, uint32_t initial);

} // namespace lockbench
