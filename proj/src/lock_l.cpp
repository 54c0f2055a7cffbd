#include "lockbench/lock_l.hpp"

#include <algorithm>
#include <deque>

namespace lockbench {

namespace {

/// Cone compiled to integer signal ids for fast repeated evaluation.
struct CompiledCone {
	std::vector<std::string> frontier_order; // id i = frontier signal i
	std::vector<int> sink_ids;
	struct G {
		GateKind kind;
		std::vector<int> in;
		int out;
	};
	std::vector<G> gates;
	int num_ids = 0;

	CompiledCone(const Netlist &n, const Cone &cone, const std::vector<std::string> &frontier)
	    : frontier_order(frontier)
	{
		std::map<std::string, int> id;
		for (const auto &s : frontier)
			id[s] = num_ids++;
		for (int gi : cone.gate_indices) {
			const Gate &g = n.gates[gi];
			G cg;
			cg.kind = g.kind;
			for (const auto &in : g.inputs)
				cg.in.push_back(id.at(in));
			id[g.output] = num_ids++;
			cg.out = id.at(g.output);
			gates.push_back(cg);
		}
		for (const auto &s : cone.sinks)
			sink_ids.push_back(id.at(s));
	}

	std::vector<bool> eval(const std::vector<bool> &frontier_vals) const
	{
		std::vector<uint8_t> v(num_ids, 0);
		for (size_t i = 0; i < frontier_order.size(); ++i)
			v[i] = frontier_vals[i];
		std::vector<bool> in;
		for (const auto &g : gates) {
			in.clear();
			for (int i : g.in)
				in.push_back(v[i]);
			v[g.out] = eval_gate(g.kind, in);
		}
		std::vector<bool> out;
		for (int s : sink_ids)
			out.push_back(v[s]);
		return out;
	}
};

struct Targets {
	std::vector<size_t> dff_index;
	std::vector<std::string> q_names;
	std::vector<std::string> d_pins;
};

Targets locate_targets(const Netlist &n, const std::vector<std::string> &ffs)
{
	if (ffs.empty())
		throw NetlistError("no FFs targeted for memory locking");
	Targets t;
	std::set<std::string> seen;
	for (const auto &q : ffs) {
		if (!seen.insert(q).second)
			throw NetlistError("targeted FF '" + q + "' listed twice");
		size_t found = n.dffs.size();
		for (size_t d = 0; d < n.dffs.size(); ++d)
			if (n.dffs[d].q == q)
				found = d;
		if (found == n.dffs.size())
			throw NetlistError("targeted FF '" + q + "' does not exist");
		if (n.dffs[found].scan)
			throw NetlistError("memory locking of scan FFs is not supported");
		t.dff_index.push_back(found);
		t.q_names.push_back(q);
		t.d_pins.push_back(n.dffs[found].d);
	}
	return t;
}

std::string unique_prefix(const Netlist &n, const std::string &base)
{
	std::set<std::string> names(n.inputs.begin(), n.inputs.end());
	names.insert(n.key_inputs.begin(), n.key_inputs.end());
	for (const auto &g : n.gates)
		names.insert(g.output);
	for (const auto &f : n.dffs)
		names.insert(f.q);
	for (const auto &r : n.roms)
		names.insert(r.data.begin(), r.data.end());
	auto collides = [&](const std::string &p) {
		for (const auto &s : names)
			if (s.rfind(p + "_", 0) == 0)
				return true;
		return false;
	};
	std::string prefix = base;
	int c = 0;
	while (collides(prefix))
		prefix = base + std::to_string(c++);
	return prefix;
}

/// Cone gates whose entire fanout lies inside the removed set (targeted
/// DFFs plus other removable cone gates): classic dead-code fixpoint.
std::vector<int> removable_gates(const Netlist &n, const Cone &cone, const std::set<size_t> &removed_dffs)
{
	std::set<std::string> outs(n.outputs.begin(), n.outputs.end());
	struct Consumer {
		char kind; // 'g' gate, 'd' dff, 'r' rom
		size_t index;
	};
	std::map<std::string, std::vector<Consumer>> consumers;
	for (size_t g = 0; g < n.gates.size(); ++g)
		for (const auto &in : n.gates[g].inputs)
			consumers[in].push_back({'g', g});
	for (size_t d = 0; d < n.dffs.size(); ++d) {
		consumers[n.dffs[d].d].push_back({'d', d});
		if (n.dffs[d].scan) {
			consumers[n.dffs[d].scan->si].push_back({'d', d});
			consumers[n.dffs[d].scan->se].push_back({'d', d});
		}
	}
	for (size_t r = 0; r < n.roms.size(); ++r)
		for (const auto &a : n.roms[r].address)
			consumers[a].push_back({'r', r});

	std::set<size_t> cone_gates(cone.gate_indices.begin(), cone.gate_indices.end());
	std::set<size_t> removable;
	bool changed = true;
	while (changed) {
		changed = false;
		for (size_t g : cone_gates) {
			if (removable.count(g))
				continue;
			const std::string &sig = n.gates[g].output;
			if (outs.count(sig))
				continue;
			bool all_removed = true;
			for (const auto &c : consumers[sig]) {
				bool ok = (c.kind == 'g' && removable.count(c.index)) ||
					  (c.kind == 'd' && removed_dffs.count(c.index));
				if (!ok) {
					all_removed = false;
					break;
				}
			}
			if (all_removed) {
				removable.insert(g);
				changed = true;
			}
		}
	}
	return {removable.begin(), removable.end()};
}

} // namespace

ConeTable extract_cone_table(const Netlist &n, const std::vector<std::string> &ffs, ConeTableMode mode)
{
	Targets t = locate_targets(n, ffs);
	Cone cone = fan_in_cone(n, t.d_pins);
	auto drv = n.driver_map();

	ConeTable table;
	table.mode = mode;
	table.sinks = t.d_pins;

	if (mode == ConeTableMode::Full) {
		// Address order: targeted q pins that feed back (targets order)
		// high, then the remaining frontier lexicographically.
		std::set<std::string> frontier = cone.frontier;
		for (const auto &q : t.q_names)
			if (frontier.erase(q))
				table.support.push_back(q);
		for (const auto &s : frontier) {
			const Driver &d = drv.at(s);
			if (d.kind == DriverKind::KeyInput)
				throw NetlistError("cone depends on key input '" + s + "'");
			if (d.kind == DriverKind::RomData)
				throw NetlistError("cone depends on ROM output '" + s + "'");
			table.support.push_back(s);
		}
		if (table.support.size() > 20)
			throw NetlistError("cone support " + std::to_string(table.support.size()) +
					   " exceeds the 20-signal full-table cap");
		CompiledCone cc(n, cone, table.support);
		size_t S = table.support.size();
		std::vector<bool> fv(S);
		for (uint64_t addr = 0; addr < (uint64_t(1) << S); ++addr) {
			for (size_t k = 0; k < S; ++k)
				fv[k] = (addr >> (S - 1 - k)) & 1;
			table.rows.push_back(cc.eval(fv));
		}
		return table;
	}

	// FSMIM: the cones must be a self-contained FSM block over the
	// targeted state register and primary inputs.
	std::set<std::string> targeted(t.q_names.begin(), t.q_names.end());
	std::set<std::string> frontier_inputs;
	for (const auto &s : cone.frontier) {
		if (targeted.count(s))
			continue;
		const Driver &d = drv.at(s);
		if (d.kind != DriverKind::PrimaryInput)
			throw NetlistError("fsmim cone frontier signal '" + s +
					   "' is neither a targeted q pin nor a primary input");
		frontier_inputs.insert(s);
	}
	std::vector<std::string> inputs; // n.inputs order = ascending index
	for (const auto &i : n.inputs)
		if (frontier_inputs.count(i))
			inputs.push_back(i);

	size_t W = t.q_names.size(), I = inputs.size();
	if (W > 20 || I > 20)
		throw NetlistError("fsmim enumeration cap exceeded");

	// Frontier order for evaluation: state bits (MSB first) then inputs.
	std::vector<std::string> ev_order(t.q_names);
	ev_order.insert(ev_order.end(), inputs.begin(), inputs.end());
	CompiledCone cc(n, cone, ev_order);
	auto next_state = [&](uint32_t state, uint32_t in) {
		std::vector<bool> fv(W + I);
		for (size_t b = 0; b < W; ++b)
			fv[b] = (state >> (W - 1 - b)) & 1;
		for (size_t b = 0; b < I; ++b)
			fv[W + b] = (in >> b) & 1;
		auto out = cc.eval(fv);
		uint32_t ns = 0;
		for (size_t b = 0; b < W; ++b)
			if (out[b])
				ns |= uint32_t(1) << (W - 1 - b);
		return ns;
	};

	// Reachability from the all-zero reset state.
	std::set<uint32_t> reachable{0};
	std::deque<uint32_t> queue{0};
	uint64_t visits = 0;
	while (!queue.empty()) {
		uint32_t s = queue.front();
		queue.pop_front();
		for (uint32_t in = 0; in < (uint32_t(1) << I); ++in) {
			if (++visits > (uint64_t(1) << 20))
				throw NetlistError("fsmim reachability enumeration exceeded 2^20 visits");
			uint32_t ns = next_state(s, in);
			if (reachable.insert(ns).second)
				queue.push_back(ns);
		}
	}

	// Per-state dependency testing: exhaustive cofactor comparison.
	FsmimSpec spec;
	spec.state_signals = t.q_names;
	for (uint32_t s : reachable) {
		std::vector<std::string> sel;
		for (size_t i = 0; i < I; ++i) {
			bool depends = false;
			for (uint32_t rest = 0; rest < (uint32_t(1) << I) && !depends; ++rest) {
				uint32_t a = rest & ~(uint32_t(1) << i);
				uint32_t b = a | (uint32_t(1) << i);
				std::vector<bool> fa(W + I), fb(W + I);
				for (size_t k = 0; k < W; ++k)
					fa[k] = fb[k] = (s >> (W - 1 - k)) & 1;
				for (size_t k = 0; k < I; ++k) {
					fa[W + k] = (a >> k) & 1;
					fb[W + k] = (b >> k) & 1;
				}
				depends = cc.eval(fa) != cc.eval(fb);
			}
			if (depends)
				sel.push_back(inputs[i]);
		}
		spec.per_state_inputs[s] = sel;
		spec.mux_width = std::max(spec.mux_width, (int)sel.size());
	}
	{
		std::string layout;
		for (const auto &q : t.q_names)
			layout += q + ",";
		layout += "|";
		for (int k = 0; k < spec.mux_width; ++k)
			layout += "sel" + std::to_string(k) + (k + 1 < spec.mux_width ? "," : "");
		spec.address_layout = layout;
	}

	table.support = t.q_names;
	for (int k = 0; k < spec.mux_width; ++k)
		table.support.push_back("sel" + std::to_string(k));

	// Contents: reachable states use their selected inputs (others held
	// at 0, sound per the dependency check); unreachable rows are zero.
	int mw = spec.mux_width;
	std::map<std::string, size_t> input_pos;
	for (size_t i = 0; i < I; ++i)
		input_pos[inputs[i]] = i;
	for (uint64_t addr = 0; addr < (uint64_t(1) << (W + mw)); ++addr) {
		uint32_t state = (uint32_t)(addr >> mw);
		uint32_t v = (uint32_t)(addr & ((uint64_t(1) << mw) - 1));
		auto it = spec.per_state_inputs.find(state);
		if (it == spec.per_state_inputs.end()) {
			table.rows.emplace_back(W, false);
			continue;
		}
		std::vector<bool> fv(W + I, false);
		for (size_t b = 0; b < W; ++b)
			fv[b] = (state >> (W - 1 - b)) & 1;
		for (size_t k = 0; k < it->second.size(); ++k)
			if ((v >> (mw - 1 - (int)k)) & 1)
				fv[W + input_pos.at(it->second[k])] = true;
		table.rows.push_back(cc.eval(fv));
	}
	table.fsmim = spec;
	return table;
}

MemoryLockResult lock_memory(const Netlist &n, const std::vector<std::string> &ffs, ConeTableMode mode)
{
	MemoryLockResult res;
	res.table = extract_cone_table(n, ffs, mode);
	Targets t = locate_targets(n, ffs);
	Cone cone = fan_in_cone(n, t.d_pins);

	std::set<size_t> removed_dffs(t.dff_index.begin(), t.dff_index.end());
	std::vector<int> dead = removable_gates(n, cone, removed_dffs);
	std::set<int> dead_set(dead.begin(), dead.end());

	Netlist locked;
	locked.name = n.name + (mode == ConeTableMode::Fsmim ? "_fsmim" : "_rom");
	locked.inputs = n.inputs;
	locked.outputs = n.outputs;
	locked.key_inputs = n.key_inputs;
	locked.roms = n.roms;
	for (size_t g = 0; g < n.gates.size(); ++g)
		if (!dead_set.count((int)g))
			locked.gates.push_back(n.gates[g]);
	for (size_t d = 0; d < n.dffs.size(); ++d)
		if (!removed_dffs.count(d))
			locked.dffs.push_back(n.dffs[d]);

	RomNode rom;
	rom.data = t.q_names;
	rom.contents = res.table.rows;

	if (mode == ConeTableMode::Full) {
		rom.address = res.table.support;
	} else {
		const FsmimSpec &spec = *res.table.fsmim;
		std::string prefix = unique_prefix(n, "fsmim");
		size_t W = t.q_names.size();
		// Shared inverted state bits for the decoders.
		std::map<size_t, std::string> nq;
		auto lit = [&](size_t bit, bool positive) -> std::string {
			if (positive)
				return t.q_names[bit];
			auto it = nq.find(bit);
			if (it != nq.end())
				return it->second;
			std::string o = prefix + "_nq" + std::to_string(bit);
			locked.gates.push_back(Gate{GateKind::Not, {t.q_names[bit]}, o});
			nq[bit] = o;
			return o;
		};
		std::map<uint32_t, std::string> decode;
		for (const auto &[state, sel] : spec.per_state_inputs) {
			if (sel.empty())
				continue; // no mux term ever reads this decoder
			std::vector<std::string> lits;
			for (size_t b = 0; b < W; ++b)
				lits.push_back(lit(b, (state >> (W - 1 - b)) & 1));
			if (lits.size() == 1) {
				decode[state] = lits[0];
			} else {
				std::string o = prefix + "_st" + std::to_string(state);
				locked.gates.push_back(Gate{GateKind::And, lits, o});
				decode[state] = o;
			}
		}
		rom.address = t.q_names;
		for (int k = 0; k < spec.mux_width; ++k) {
			std::vector<std::string> terms;
			for (const auto &[state, sel] : spec.per_state_inputs) {
				if ((size_t)k >= sel.size())
					continue;
				std::string o =
				    prefix + "_t" + std::to_string(state) + "_" + std::to_string(k);
				locked.gates.push_back(Gate{GateKind::And, {decode.at(state), sel[k]}, o});
				terms.push_back(o);
				res.memory.muxes.push_back(locked.gates.back());
			}
			std::string mx = prefix + "_sel" + std::to_string(k);
			if (terms.size() == 1)
				locked.gates.push_back(Gate{GateKind::Buf, terms, mx});
			else
				locked.gates.push_back(Gate{GateKind::Or, terms, mx});
			res.memory.muxes.push_back(locked.gates.back());
			rom.address.push_back(mx);
		}
	}
	locked.roms.push_back(rom);
	locked.validate();

	res.memory.rom = rom;
	res.memory.key = rom.contents;
	res.package.locked = locked;
	res.package.meta.method = "scramble-l";
	res.package.meta.params = {{"addr_width", (int64_t)rom.address.size()},
				   {"data_width", (int64_t)rom.data.size()},
				   {"fsmim", mode == ConeTableMode::Fsmim ? 1 : 0}};
	res.package.meta.target_mode = mode == ConeTableMode::Fsmim ? "fsmim" : "full";
	res.package.meta.target_ffs = ffs;
	{
		std::string layout;
		for (size_t i = 0; i < rom.address.size(); ++i)
			layout += rom.address[i] + (i + 1 < rom.address.size() ? "," : "");
		res.package.address_layout = layout;
	}
	return res;
}

LutModel memory_as_luts(const Netlist &n, size_t rom_index, int max_addr_width)
{
	if (rom_index >= n.roms.size())
		throw NetlistError("no such ROM");
	const RomNode rom = n.roms[rom_index];
	int A = (int)rom.address.size();
	if (A > max_addr_width)
		throw NetlistError("ROM address width " + std::to_string(A) + " exceeds the LUT cap of " +
				   std::to_string(max_addr_width));
	LutModel model;
	model.netlist = n;
	model.netlist.roms.erase(model.netlist.roms.begin() + (ptrdiff_t)rom_index);
	std::string prefix = unique_prefix(n, "lut");

	for (size_t j = 0; j < rom.data.size(); ++j) {
		std::vector<std::string> layer;
		for (uint64_t r = 0; r < (uint64_t(1) << A); ++r) {
			std::string k = prefix + "_b" + std::to_string(j) + "_k" + std::to_string(r);
			model.netlist.key_inputs.push_back(k);
			model.key_names.push_back(k);
			model.contents_key[k] = rom.contents[r][j];
			layer.push_back(k);
		}
		// Selector tree, LSB address bit at the leaves.
		int aux = 0;
		for (int depth = A - 1; depth >= 0; --depth) {
			std::vector<std::string> next;
			for (size_t i = 0; i < layer.size(); i += 2) {
				std::string o = depth == 0
				    ? prefix + "_b" + std::to_string(j) + "_d"
				    : prefix + "_b" + std::to_string(j) + "_t" + std::to_string(aux++);
				model.netlist.gates.push_back(
				    Gate{GateKind::Mux2, {rom.address[depth], layer[i], layer[i + 1]}, o});
				next.push_back(o);
			}
			layer = next;
		}
		// The register restores the ROM's one-cycle read latency.
		model.netlist.dffs.push_back(Dff{layer[0], rom.data[j], std::nullopt});
	}
	model.netlist.validate();
	return model;
}

} // namespace lockbench
