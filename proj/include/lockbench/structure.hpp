#pragma once

#include "lockbench/netlist.hpp"

#include <set>
#include <string>
#include <vector>

namespace lockbench {

/// Combinational fan-in cone. Sinks must be DFF d-pins or primary
/// outputs. The frontier consists of DFF q-pins, ROM data bits, primary
/// inputs, and key inputs; the cone's gate set is the smallest one
/// driving the sinks.
struct Cone {
	std::vector<std::string> sinks;
	std::set<std::string> frontier;  // source signals feeding the cone
	std::vector<int> gate_indices;   // indices into the parent netlist, topological
};

Cone fan_in_cone(const Netlist &n, const std::vector<std::string> &sinks);

/// Directed graph over DFF indices: edge a -> b iff a.q is in the fan-in
/// cone of b.d (through combinational logic only).
struct FfDependencyGraph {
	std::vector<std::vector<int>> succ; // adjacency, per DFF index
	std::vector<std::vector<int>> pred;

	bool has_edge(int a, int b) const;
};

FfDependencyGraph ff_dependency_graph(const Netlist &n);

/// Tarjan SCCs of an adjacency list. Returns the component id per node;
/// component ids are in reverse topological order of the condensation.
std::vector<int> strongly_connected_components(const std::vector<std::vector<int>> &succ,
					       int *num_components = nullptr);

/// True for nodes that lie on a directed cycle (SCC of size >= 2, or a
/// self-loop).
std::vector<bool> on_cycle(const std::vector<std::vector<int>> &succ);

/// Stitches every DFF into a single scan chain, in DFF declaration order.
/// Adds inputs `<prefix>_si`, `<prefix>_se` and output `<prefix>_so`.
Netlist stitch_scan_chain(const Netlist &n, const std::string &prefix = "scan");

} // namespace lockbench
