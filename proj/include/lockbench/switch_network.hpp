#pragma once

#include "lockbench/netlist.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lockbench {

/// Parameters of a generalized logarithmic switching network with n
/// inputs, m extra cascaded stages and p vertically cascaded copies.
/// n must be a power of two. Switch stage count is p * (log2(n) + m).
struct NetworkParams {
	int n = 2;
	int m = 0;
	int p = 1;

	int log2n() const;
	int stages() const { return p * (log2n() + m); }
	int switches_per_stage() const { return n / 2; }
	int switch_count() const { return stages() * switches_per_stage(); }

	/// The near non-blocking instantiation: m = log2(n) - 2 (clamped at
	/// 0), p = 1.
	static NetworkParams near_non_blocking(int n);
};

/// Key-programmable switching network: `stages()` layers of 2x2
/// switchboxes, a fixed perfect-shuffle interconnect in front of every
/// layer, and an optional key-controlled XOR inversion layer on the
/// outputs.
struct SwitchNetwork {
	NetworkParams params;
	bool has_inversion_layer = true;

	int switch_count() const { return params.switch_count(); }
	int key_bit_count() const
	{
		return switch_count() + (has_inversion_layer ? params.n : 0);
	}
};

/// One bit per switchbox (stage-major, box order within a stage), 0 =
/// pass-through, 1 = cross; plus one inversion bit per output port.
struct SwitchConfig {
	std::vector<bool> switch_bits;
	std::vector<bool> inversion_bits;
};

/// Realized function of a configured network: input port i emerges on
/// output port permutation[i], negated iff negation[permutation[i]].
struct PortMapping {
	std::vector<int> permutation; // index: input port, value: output port
	std::vector<bool> negation;   // index: output port

	static PortMapping identity(int n);
	bool is_valid() const;
};

SwitchNetwork build_network(const NetworkParams &params, bool inversion_layer = true);

/// Port index after the fixed perfect-shuffle interconnect (left rotate
/// of the log2(n)-bit port index).
int shuffle_port(int port, int n);

PortMapping apply_config(const SwitchNetwork &net, const SwitchConfig &cfg);

/// Finds a configuration realizing the target mapping, or nullopt when
/// the (blocking) network cannot route the permutation. Deterministic:
/// inputs are routed in ascending order by depth-first search over the
/// switch settings along the path, trying pass before cross at each
/// undecided box. Negation is always satisfiable via the inversion layer
/// and is set last.
std::optional<SwitchConfig> route(const SwitchNetwork &net, const PortMapping &target);

struct RoutableFraction {
	double fraction = 0.0;
	uint64_t routable = 0;
	uint64_t total = 0;
};

/// Exact fraction of the n! permutations that route (exhaustive mode,
/// n <= 8 only), or a sampled estimate over k uniform random
/// permutations.
RoutableFraction routable_fraction_exhaustive(const SwitchNetwork &net);
RoutableFraction routable_fraction_sampled(const SwitchNetwork &net, uint64_t samples, uint64_t seed);

struct SynthesizedNetwork {
	Netlist netlist;                        // combinational sub-netlist
	std::vector<std::string> key_names;     // stage-major switch keys, then inversion keys
	std::vector<std::string> input_ports;   // port-order input signal names
	std::vector<std::string> output_ports;  // port-order output signal names
};

/// Gate-level synthesis: each switchbox becomes two MUX2 gates sharing
/// one key signal, each inversion bit one XOR gate with its own key
/// signal. All signals are prefixed to avoid collisions.
SynthesizedNetwork synthesize(const SwitchNetwork &net, const std::string &prefix);

/// Config bits in the same order as the synthesized key names.
std::vector<bool> config_to_key_bits(const SwitchNetwork &net, const SwitchConfig &cfg);

} // namespace lockbench
