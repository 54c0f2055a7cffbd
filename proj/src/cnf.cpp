#include "lockbench/cnf.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace lockbench {

namespace {

/// Frame index from the `@k` suffix, -1 for unframed signals (keys,
/// plain combinational names).
int frame_of(const std::string &s)
{
	auto at = s.rfind('@');
	if (at == std::string::npos || at + 1 >= s.size())
		return -1;
	int f = 0;
	for (size_t i = at + 1; i < s.size(); ++i) {
		if (!isdigit((unsigned char)s[i]))
			return -1;
		f = f * 10 + (s[i] - '0');
	}
	return f;
}

std::vector<std::string> sorted_signals(const Netlist &comb)
{
	std::vector<std::string> sigs;
	sigs.insert(sigs.end(), comb.inputs.begin(), comb.inputs.end());
	sigs.insert(sigs.end(), comb.key_inputs.begin(), comb.key_inputs.end());
	for (const auto &g : comb.gates)
		sigs.push_back(g.output);
	std::sort(sigs.begin(), sigs.end(), [](const std::string &a, const std::string &b) {
		int fa = frame_of(a), fb = frame_of(b);
		return fa != fb ? fa < fb : a < b;
	});
	return sigs;
}

void encode_xor_clauses(CnfInstance &cnf, const std::vector<int> &in, int out, bool invert)
{
	// Direct enumeration: forbid every (inputs, wrong output) combination.
	size_t k = in.size();
	for (uint32_t m = 0; m < (uint32_t(1) << k); ++m) {
		int parity = invert ? 1 : 0;
		std::vector<Lit> clause;
		for (size_t i = 0; i < k; ++i) {
			bool v = (m >> i) & 1;
			parity ^= v ? 1 : 0;
			clause.push_back(v ? -in[i] : in[i]);
		}
		clause.push_back(parity ? out : -out);
		cnf.add(std::move(clause));
	}
}

void encode_gate(CnfInstance &cnf, GateKind kind, const std::vector<int> &in, int out)
{
	switch (kind) {
	case GateKind::Buf:
		cnf.add({-out, in[0]});
		cnf.add({out, -in[0]});
		return;
	case GateKind::Not:
		cnf.add({-out, -in[0]});
		cnf.add({out, in[0]});
		return;
	case GateKind::And:
	case GateKind::Nand: {
		int o = kind == GateKind::And ? out : -out;
		std::vector<Lit> big{o};
		for (int i : in) {
			cnf.add({-o, i});
			big.push_back(-i);
		}
		cnf.add(std::move(big));
		return;
	}
	case GateKind::Or:
	case GateKind::Nor: {
		int o = kind == GateKind::Or ? out : -out;
		std::vector<Lit> big{-o};
		for (int i : in) {
			cnf.add({o, -i});
			big.push_back(i);
		}
		cnf.add(std::move(big));
		return;
	}
	case GateKind::Xor:
	case GateKind::Xnor: {
		bool invert = kind == GateKind::Xnor;
		std::vector<int> rest = in;
		// Chain wide parities through anonymous auxiliaries to stay
		// linear; 2-input gates get the standard 4 clauses.
		while (rest.size() > 3) {
			int aux = cnf.fresh_var();
			encode_xor_clauses(cnf, {rest[0], rest[1]}, aux, false);
			rest.erase(rest.begin(), rest.begin() + 2);
			rest.insert(rest.begin(), aux);
		}
		encode_xor_clauses(cnf, rest, out, invert);
		return;
	}
	case GateKind::Mux2: {
		int s = in[0], a = in[1], b = in[2];
		cnf.add({s, -a, out});
		cnf.add({s, a, -out});
		cnf.add({-s, -b, out});
		cnf.add({-s, b, -out});
		return;
	}
	}
	throw NetlistError("unsupported gate kind in CNF encoding");
}

} // namespace

int CnfInstance::var(const std::string &signal) const
{
	auto it = var_of_signal.find(signal);
	if (it == var_of_signal.end())
		throw NetlistError("no CNF variable for signal '" + signal + "'");
	return it->second;
}

void CnfInstance::add_unit(const std::string &signal, bool value)
{
	int v = var(signal);
	add({value ? v : -v});
}

std::string CnfInstance::to_dimacs() const
{
	std::ostringstream out;
	out << "p cnf " << num_vars << " " << clauses.size() << "\n";
	for (const auto &c : clauses) {
		for (Lit l : c)
			out << l << " ";
		out << "0\n";
	}
	return out.str();
}

std::string CnfInstance::var_map_json() const
{
	nlohmann::ordered_json j = nlohmann::ordered_json::object();
	for (const auto &[sig, v] : var_of_signal)
		j[sig] = v;
	return j.dump(2);
}

void CnfInstance::load_into(Solver &s) const
{
	s.ensure_vars(num_vars);
	for (const auto &c : clauses)
		s.add_clause(c);
}

std::map<std::string, int> tseitin_into(CnfInstance &cnf, const Netlist &comb,
					const std::map<std::string, int> &shared)
{
	if (!comb.dffs.empty() || !comb.roms.empty())
		throw NetlistError("Tseitin encoding requires a combinational netlist");
	std::map<std::string, int> vars;
	for (const auto &sig : sorted_signals(comb)) {
		auto it = shared.find(sig);
		vars[sig] = it != shared.end() ? it->second : cnf.fresh_var();
	}
	for (const auto &g : comb.gates) {
		std::vector<int> in;
		for (const auto &s : g.inputs)
			in.push_back(vars.at(s));
		encode_gate(cnf, g.kind, in, vars.at(g.output));
	}
	return vars;
}

CnfInstance tseitin(const Netlist &comb)
{
	CnfInstance cnf;
	cnf.var_of_signal = tseitin_into(cnf, comb, {});
	return cnf;
}

UnrolledCircuit unroll(const Netlist &n, int frames, const SimState &initial)
{
	if (frames < 1)
		throw NetlistError("unroll requires at least one frame");
	n.validate();
	UnrolledCircuit u;
	u.frames = frames;
	u.comb.name = n.name + "_u" + std::to_string(frames);
	u.key_inputs = n.key_inputs;
	u.comb.key_inputs = n.key_inputs;

	std::set<std::string> keys(n.key_inputs.begin(), n.key_inputs.end());
	auto ref = [&](const std::string &s, int k) { return keys.count(s) ? s : s + "@" + std::to_string(k); };

	auto bind_const = [&](const std::string &sig, bool v) {
		u.bound_constants[sig] = v;
		u.comb.inputs.push_back(sig);
	};

	// Frame-0 register state.
	for (size_t d = 0; d < n.dffs.size(); ++d)
		bind_const(ref(n.dffs[d].q, 0), initial.dff_values[d]);
	for (size_t r = 0; r < n.roms.size(); ++r)
		for (size_t j = 0; j < n.roms[r].data.size(); ++j)
			bind_const(ref(n.roms[r].data[j], 0), initial.rom_pipeline[r][j]);

	bool have_consts = false;
	std::string c0, c1;
	auto want_consts = [&] {
		if (have_consts)
			return;
		c0 = "__const0@u";
		c1 = "__const1@u";
		bind_const(c0, false);
		bind_const(c1, true);
		have_consts = true;
	};

	for (int k = 0; k < frames; ++k) {
		u.frame_inputs.emplace_back();
		for (const auto &i : n.inputs) {
			u.comb.inputs.push_back(ref(i, k));
			u.frame_inputs.back().push_back(ref(i, k));
		}
		for (const auto &g : n.gates) {
			Gate gk = g;
			gk.output = ref(g.output, k);
			for (auto &in : gk.inputs)
				in = ref(in, k);
			u.comb.gates.push_back(std::move(gk));
		}
		u.frame_outputs.emplace_back();
		for (const auto &o : n.outputs) {
			u.comb.outputs.push_back(ref(o, k));
			u.frame_outputs.back().push_back(ref(o, k));
		}
		if (k + 1 >= frames)
			break;
		// Register transfer into frame k+1.
		for (const auto &f : n.dffs) {
			std::string q1 = ref(f.q, k + 1);
			if (f.scan)
				u.comb.gates.push_back(Gate{
				    GateKind::Mux2, {ref(f.scan->se, k), ref(f.d, k), ref(f.scan->si, k)}, q1});
			else
				u.comb.gates.push_back(Gate{GateKind::Buf, {ref(f.d, k)}, q1});
		}
		// Registered ROM read: data@(k+1) = contents[address@k],
		// inlined as a constant-leaf selector tree.
		for (size_t r = 0; r < n.roms.size(); ++r) {
			const RomNode &rom = n.roms[r];
			want_consts();
			int A = (int)rom.address.size();
			for (size_t j = 0; j < rom.data.size(); ++j) {
				std::vector<std::string> layer;
				for (uint64_t addr = 0; addr < (uint64_t(1) << A); ++addr)
					layer.push_back(rom.contents[addr][j] ? c1 : c0);
				int aux = 0;
				for (int depth = A - 1; depth >= 0; --depth) {
					std::vector<std::string> next;
					for (size_t i = 0; i < layer.size(); i += 2) {
						std::string o =
						    depth == 0
							? ref(rom.data[j], k + 1)
							: "__rom" + std::to_string(r) + "_b" +
							      std::to_string(j) + "_t" + std::to_string(aux++) +
							      "@" + std::to_string(k + 1);
						u.comb.gates.push_back(Gate{GateKind::Mux2,
									    {ref(rom.address[depth], k),
									     layer[i], layer[i + 1]},
									    o});
						next.push_back(o);
					}
					layer = next;
				}
			}
		}
	}
	u.comb.validate();
	return u;
}

std::vector<OutputVector> UnrolledCircuit::eval(const std::vector<InputVector> &seq,
						const std::map<std::string, bool> &key) const
{
	if ((int)seq.size() != frames)
		throw NetlistError("sequence length must match frame count");
	std::map<std::string, bool> values(bound_constants);
	for (int k = 0; k < frames; ++k)
		for (size_t i = 0; i < frame_inputs[k].size(); ++i)
			values[frame_inputs[k][i]] = seq[k][i];
	Simulator sim(comb);
	if (!comb.key_inputs.empty())
		sim.bind_key(key);
	InputVector in;
	for (const auto &sig : comb.inputs)
		in.push_back(values.at(sig));
	SimState st = SimState::all_zero(comb);
	OutputVector flat = sim.step(st, in);
	std::vector<OutputVector> out(frames);
	size_t pos = 0;
	for (int k = 0; k < frames; ++k)
		for (size_t i = 0; i < frame_outputs[k].size(); ++i)
			out[k].push_back(flat[pos++]);
	return out;
}

Miter build_miter(const UnrolledCircuit &u, bool force_diff)
{
	Miter m;
	// Shared variables: frame inputs and bound constants, numbered in
	// (frame, name) order for reproducible dumps.
	{
		std::vector<std::string> shared_names;
		for (const auto &sig : u.comb.inputs)
			shared_names.push_back(sig);
		std::sort(shared_names.begin(), shared_names.end(),
			  [](const std::string &a, const std::string &b) {
				  int fa = frame_of(a), fb = frame_of(b);
				  return fa != fb ? fa < fb : a < b;
			  });
		for (const auto &sig : shared_names)
			m.shared_vars[sig] = m.cnf.fresh_var();
	}
	m.map1 = tseitin_into(m.cnf, u.comb, m.shared_vars);
	m.map2 = tseitin_into(m.cnf, u.comb, m.shared_vars);
	for (const auto &k : u.key_inputs) {
		m.key1[k] = m.map1.at(k);
		m.key2[k] = m.map2.at(k);
	}
	for (const auto &frame : u.frame_outputs)
		for (const auto &o : frame) {
			m.out1[o] = m.map1.at(o);
			m.out2[o] = m.map2.at(o);
		}
	for (const auto &[sig, v] : u.bound_constants)
		m.cnf.add({v ? m.shared_vars.at(sig) : -m.shared_vars.at(sig)});

	m.diff_var = m.cnf.fresh_var();
	std::vector<Lit> any{-m.diff_var};
	for (const auto &[o, v1] : m.out1) {
		int x = m.cnf.fresh_var();
		encode_xor_clauses(m.cnf, {v1, m.out2.at(o)}, x, false);
		any.push_back(x);
	}
	m.cnf.add(std::move(any));
	if (force_diff)
		m.cnf.add({m.diff_var});

	// Debug map: shared names plain, per-copy names prefixed.
	for (const auto &[sig, v] : m.shared_vars)
		m.cnf.var_of_signal[sig] = v;
	for (const auto &[sig, v] : m.map1)
		if (!m.shared_vars.count(sig))
			m.cnf.var_of_signal["A|" + sig] = v;
	for (const auto &[sig, v] : m.map2)
		if (!m.shared_vars.count(sig))
			m.cnf.var_of_signal["B|" + sig] = v;
	return m;
}

void constrain_io(Miter &m, const UnrolledCircuit &u, const std::vector<InputVector> &seq,
		  const std::vector<OutputVector> &outs)
{
	if (seq.size() != outs.size() || (int)seq.size() > u.frames)
		throw NetlistError("constrain_io sequence length mismatch");
	for (const std::map<std::string, int> *keyvars : {&m.key1, &m.key2}) {
		std::map<std::string, int> shared(*keyvars);
		auto vars = tseitin_into(m.cnf, u.comb, shared);
		for (const auto &[sig, val] : u.bound_constants)
			m.cnf.add({val ? vars.at(sig) : -vars.at(sig)});
		for (size_t k = 0; k < seq.size(); ++k) {
			for (size_t i = 0; i < u.frame_inputs[k].size(); ++i) {
				int v = vars.at(u.frame_inputs[k][i]);
				m.cnf.add({seq[k][i] ? v : -v});
			}
			for (size_t i = 0; i < u.frame_outputs[k].size(); ++i) {
				int v = vars.at(u.frame_outputs[k][i]);
				m.cnf.add({outs[k][i] ? v : -v});
			}
		}
	}
}

int add_key_equality(Miter &m)
{
	int act = m.cnf.fresh_var();
	for (const auto &[k, v1] : m.key1) {
		int v2 = m.key2.at(k);
		m.cnf.add({-act, -v1, v2});
		m.cnf.add({-act, v1, -v2});
	}
	return act;
}

} // namespace lockbench
