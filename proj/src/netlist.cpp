#include "lockbench/netlist.hpp"

#include <algorithm>
#include <unordered_set>

namespace lockbench {

const char *gate_kind_name(GateKind k)
{
	switch (k) {
	case GateKind::And:
		return "AND";
	case GateKind::Nand:
		return "NAND";
	case GateKind::Or:
		return "OR";
	case GateKind::Nor:
		return "NOR";
	case GateKind::Xor:
		return "XOR";
	case GateKind::Xnor:
		return "XNOR";
	case GateKind::Not:
		return "NOT";
	case GateKind::Buf:
		return "BUF";
	case GateKind::Mux2:
		return "MUX2";
	}
	return "?";
}

std::optional<GateKind> gate_kind_from_name(const std::string &name)
{
	std::string up;
	up.reserve(name.size());
	for (char c : name)
		up.push_back((char)std::toupper((unsigned char)c));
	if (up == "AND")
		return GateKind::And;
	if (up == "NAND")
		return GateKind::Nand;
	if (up == "OR")
		return GateKind::Or;
	if (up == "NOR")
		return GateKind::Nor;
	if (up == "XOR")
		return GateKind::Xor;
	if (up == "XNOR")
		return GateKind::Xnor;
	if (up == "NOT")
		return GateKind::Not;
	if (up == "BUF" || up == "BUFF")
		return GateKind::Buf;
	if (up == "MUX2")
		return GateKind::Mux2;
	return std::nullopt;
}

int gate_min_arity(GateKind k)
{
	switch (k) {
	case GateKind::Not:
	case GateKind::Buf:
		return 1;
	case GateKind::Mux2:
		return 3;
	default:
		return 2;
	}
}

int gate_max_arity(GateKind k)
{
	switch (k) {
	case GateKind::Not:
	case GateKind::Buf:
		return 1;
	case GateKind::Mux2:
		return 3;
	default:
		return -1;
	}
}

bool eval_gate(GateKind kind, const std::vector<bool> &in)
{
	switch (kind) {
	case GateKind::And: {
		for (bool v : in)
			if (!v)
				return false;
		return true;
	}
	case GateKind::Nand: {
		for (bool v : in)
			if (!v)
				return true;
		return false;
	}
	case GateKind::Or: {
		for (bool v : in)
			if (v)
				return true;
		return false;
	}
	case GateKind::Nor: {
		for (bool v : in)
			if (v)
				return false;
		return true;
	}
	case GateKind::Xor: {
		bool r = false;
		for (bool v : in)
			r = r != v;
		return r;
	}
	case GateKind::Xnor: {
		bool r = false;
		for (bool v : in)
			r = r != v;
		return !r;
	}
	case GateKind::Not:
		return !in[0];
	case GateKind::Buf:
		return in[0];
	case GateKind::Mux2:
		return in[0] ? in[2] : in[1];
	}
	return false;
}

std::unordered_map<std::string, Driver> Netlist::driver_map() const
{
	std::unordered_map<std::string, Driver> drv;
	auto add = [&](const std::string &sig, Driver d) {
		auto [it, fresh] = drv.emplace(sig, d);
		if (!fresh)
			throw NetlistError("duplicate driver for signal '" + sig + "'");
	};
	for (int i = 0; i < (int)inputs.size(); ++i)
		add(inputs[i], {DriverKind::PrimaryInput, i});
	for (int i = 0; i < (int)key_inputs.size(); ++i)
		add(key_inputs[i], {DriverKind::KeyInput, i});
	for (int i = 0; i < (int)gates.size(); ++i)
		add(gates[i].output, {DriverKind::GateOutput, i});
	for (int i = 0; i < (int)dffs.size(); ++i)
		add(dffs[i].q, {DriverKind::DffOutput, i});
	for (int i = 0; i < (int)roms.size(); ++i)
		for (int b = 0; b < (int)roms[i].data.size(); ++b)
			add(roms[i].data[b], {DriverKind::RomData, i, b});
	return drv;
}

bool Netlist::has_signal(const std::string &sig) const
{
	for (const auto &s : inputs)
		if (s == sig)
			return true;
	for (const auto &s : key_inputs)
		if (s == sig)
			return true;
	for (const auto &g : gates)
		if (g.output == sig)
			return true;
	for (const auto &f : dffs)
		if (f.q == sig)
			return true;
	for (const auto &r : roms)
		for (const auto &s : r.data)
			if (s == sig)
				return true;
	return false;
}

bool Netlist::is_scan_stitched() const
{
	if (dffs.empty())
		return false;
	for (const auto &f : dffs)
		if (!f.scan)
			return false;
	return true;
}

std::vector<std::string> Netlist::dff_names() const
{
	std::vector<std::string> names;
	names.reserve(dffs.size());
	for (const auto &f : dffs)
		names.push_back(f.q);
	return names;
}

void Netlist::validate() const
{
	auto drv = driver_map();
	auto require = [&](const std::string &sig, const std::string &where) {
		if (!drv.count(sig))
			throw NetlistError("undefined signal '" + sig + "' referenced by " + where);
	};
	for (const auto &g : gates) {
		int lo = gate_min_arity(g.kind), hi = gate_max_arity(g.kind);
		if ((int)g.inputs.size() < lo || (hi >= 0 && (int)g.inputs.size() > hi))
			throw NetlistError("gate '" + g.output + "' (" + gate_kind_name(g.kind) +
					   ") has bad arity " + std::to_string(g.inputs.size()));
		for (const auto &in : g.inputs)
			require(in, "gate '" + g.output + "'");
	}
	for (const auto &f : dffs) {
		require(f.d, "DFF '" + f.q + "'");
		if (f.scan) {
			require(f.scan->si, "DFF '" + f.q + "' scan-in");
			require(f.scan->se, "DFF '" + f.q + "' scan-enable");
		}
	}
	for (const auto &r : roms) {
		for (const auto &a : r.address)
			require(a, "ROM address");
		size_t rows = size_t(1) << r.address.size();
		if (r.contents.size() != rows)
			throw NetlistError("ROM contents row count " + std::to_string(r.contents.size()) +
					   " does not match address width " + std::to_string(r.address.size()));
		for (const auto &word : r.contents)
			if (word.size() != r.data.size())
				throw NetlistError("ROM word width mismatch");
	}
	for (const auto &o : outputs)
		require(o, "OUTPUT");

	// Combinational acyclicity: DFF q and ROM data are sources.
	std::unordered_map<std::string, int> state; // 0 new, 1 visiting, 2 done
	// Iterative DFS over gate outputs.
	std::vector<std::string> stack;
	auto gate_of = [&](const std::string &sig) -> const Gate * {
		auto it = drv.find(sig);
		if (it == drv.end() || it->second.kind != DriverKind::GateOutput)
			return nullptr;
		return &gates[it->second.index];
	};
	for (const auto &g0 : gates) {
		if (state[g0.output])
			continue;
		stack.push_back(g0.output);
		while (!stack.empty()) {
			std::string sig = stack.back();
			int st = state[sig];
			if (st == 0) {
				state[sig] = 1;
				const Gate *g = gate_of(sig);
				for (const auto &in : g->inputs) {
					if (!gate_of(in))
						continue;
					int s = state[in];
					if (s == 1)
						throw NetlistError("combinational cycle through '" + in + "'");
					if (s == 0)
						stack.push_back(in);
				}
			} else {
				if (st == 1)
					state[sig] = 2;
				stack.pop_back();
			}
		}
	}
}

Netlist substitute_key(const Netlist &n, const std::map<std::string, bool> &key)
{
	Netlist out = n;
	out.key_inputs.clear();
	if (n.key_inputs.empty())
		return out;
	// Anchor for building constants: any signal is usable since XOR(a, a)
	// is 0 regardless of a's value.
	std::string anchor;
	if (!n.inputs.empty())
		anchor = n.inputs[0];
	else if (!n.dffs.empty())
		anchor = n.dffs[0].q;
	else if (!n.gates.empty())
		anchor = n.gates[0].output;
	else
		throw NetlistError("cannot build constants in an empty netlist");
	std::string zero = "__key_const0";
	std::string one = "__key_const1";
	int suffix = 0;
	while (n.has_signal(zero) || n.has_signal(one)) {
		++suffix;
		zero = "__key_const0_" + std::to_string(suffix);
		one = "__key_const1_" + std::to_string(suffix);
	}
	out.gates.push_back(Gate{GateKind::Xor, {anchor, anchor}, zero});
	out.gates.push_back(Gate{GateKind::Not, {zero}, one});
	for (const auto &k : n.key_inputs) {
		auto it = key.find(k);
		if (it == key.end())
			throw NetlistError("no value for key input '" + k + "'");
		out.gates.push_back(Gate{GateKind::Buf, {it->second ? one : zero}, k});
	}
	out.validate();
	return out;
}

} // namespace lockbench
