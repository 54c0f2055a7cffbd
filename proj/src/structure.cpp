#include "lockbench/structure.hpp"

#include <algorithm>
#include <functional>

namespace lockbench {

Cone fan_in_cone(const Netlist &n, const std::vector<std::string> &sinks)
{
	auto drv = n.driver_map();
	std::set<std::string> valid_sinks;
	for (const auto &f : n.dffs)
		valid_sinks.insert(f.d);
	for (const auto &o : n.outputs)
		valid_sinks.insert(o);
	Cone cone;
	cone.sinks = sinks;
	std::set<int> gate_set;
	std::vector<std::string> work;
	for (const auto &s : sinks) {
		if (!valid_sinks.count(s))
			throw NetlistError("cone sink '" + s + "' is not a DFF d-pin or primary output");
		work.push_back(s);
	}
	std::set<std::string> visited;
	while (!work.empty()) {
		std::string sig = work.back();
		work.pop_back();
		if (!visited.insert(sig).second)
			continue;
		auto it = drv.find(sig);
		if (it == drv.end())
			throw NetlistError("undefined signal '" + sig + "' in cone");
		if (it->second.kind == DriverKind::GateOutput) {
			gate_set.insert(it->second.index);
			for (const auto &in : n.gates[it->second.index].inputs)
				work.push_back(in);
		} else {
			cone.frontier.insert(sig);
		}
	}
	// Topological order within the cone, reusing netlist gate order is
	// not guaranteed topological, so sort by dependency depth.
	std::vector<int> gates(gate_set.begin(), gate_set.end());
	std::unordered_map<std::string, int> gate_of;
	for (int gi : gates)
		gate_of[n.gates[gi].output] = gi;
	std::unordered_map<int, int> depth;
	std::function<int(int)> depth_of = [&](int gi) -> int {
		auto it = depth.find(gi);
		if (it != depth.end())
			return it->second;
		depth[gi] = 0; // placeholder; cone is acyclic
		int d = 0;
		for (const auto &in : n.gates[gi].inputs) {
			auto g = gate_of.find(in);
			if (g != gate_of.end())
				d = std::max(d, depth_of(g->second) + 1);
		}
		depth[gi] = d;
		return d;
	};
	for (int gi : gates)
		depth_of(gi);
	std::stable_sort(gates.begin(), gates.end(), [&](int a, int b) { return depth.at(a) < depth.at(b); });
	cone.gate_indices = std::move(gates);
	return cone;
}

FfDependencyGraph ff_dependency_graph(const Netlist &n)
{
	FfDependencyGraph g;
	int nd = (int)n.dffs.size();
	g.succ.resize(nd);
	g.pred.resize(nd);
	std::unordered_map<std::string, int> q_index;
	for (int i = 0; i < nd; ++i)
		q_index[n.dffs[i].q] = i;
	for (int b = 0; b < nd; ++b) {
		Cone cone = fan_in_cone(n, {n.dffs[b].d});
		std::set<int> preds;
		for (const auto &sig : cone.frontier) {
			auto it = q_index.find(sig);
			if (it != q_index.end())
				preds.insert(it->second);
		}
		for (int a : preds) {
			g.succ[a].push_back(b);
			g.pred[b].push_back(a);
		}
	}
	for (auto &v : g.succ)
		std::sort(v.begin(), v.end());
	for (auto &v : g.pred)
		std::sort(v.begin(), v.end());
	return g;
}

bool FfDependencyGraph::has_edge(int a, int b) const
{
	return std::binary_search(succ[a].begin(), succ[a].end(), b);
}

std::vector<int> strongly_connected_components(const std::vector<std::vector<int>> &succ, int *num_components)
{
	int n = (int)succ.size();
	std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
	std::vector<bool> on_stack(n, false);
	std::vector<int> stack;
	int next_index = 0, next_comp = 0;

	// Iterative Tarjan.
	struct Frame {
		int v;
		size_t child;
	};
	for (int root = 0; root < n; ++root) {
		if (index[root] != -1)
			continue;
		std::vector<Frame> frames{{root, 0}};
		index[root] = low[root] = next_index++;
		stack.push_back(root);
		on_stack[root] = true;
		while (!frames.empty()) {
			Frame &f = frames.back();
			if (f.child < succ[f.v].size()) {
				int w = succ[f.v][f.child++];
				if (index[w] == -1) {
					index[w] = low[w] = next_index++;
					stack.push_back(w);
					on_stack[w] = true;
					frames.push_back({w, 0});
				} else if (on_stack[w]) {
					low[f.v] = std::min(low[f.v], index[w]);
				}
			} else {
				int v = f.v;
				frames.pop_back();
				if (!frames.empty())
					low[frames.back().v] = std::min(low[frames.back().v], low[v]);
				if (low[v] == index[v]) {
					while (true) {
						int w = stack.back();
						stack.pop_back();
						on_stack[w] = false;
						comp[w] = next_comp;
						if (w == v)
							break;
					}
					++next_comp;
				}
			}
		}
	}
	if (num_components)
		*num_components = next_comp;
	return comp;
}

std::vector<bool> on_cycle(const std::vector<std::vector<int>> &succ)
{
	int n = (int)succ.size();
	auto comp = strongly_connected_components(succ);
	std::vector<int> comp_size(n, 0);
	for (int c : comp)
		++comp_size[c];
	std::vector<bool> res(n, false);
	for (int v = 0; v < n; ++v) {
		if (comp_size[comp[v]] >= 2)
			res[v] = true;
		else
			for (int w : succ[v])
				if (w == v)
					res[v] = true;
	}
	return res;
}

Netlist stitch_scan_chain(const Netlist &n, const std::string &prefix)
{
	Netlist out = n;
	std::string si = prefix + "_si", se = prefix + "_se", so = prefix + "_so";
	for (const auto &name : {si, se, so})
		if (out.has_signal(name))
			throw NetlistError("scan signal '" + name + "' collides with an existing signal");
	out.inputs.push_back(si);
	out.inputs.push_back(se);
	std::string prev = si;
	for (auto &f : out.dffs) {
		f.scan = ScanPins{prev, se};
		prev = f.q;
	}
	// Scan-out observes the last flop in the chain.
	Gate buf;
	buf.kind = GateKind::Buf;
	buf.inputs = {prev};
	buf.output = so;
	out.gates.push_back(buf);
	out.outputs.push_back(so);
	out.validate();
	return out;
}

} // namespace lockbench
