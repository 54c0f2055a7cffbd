#include "lockbench/sim.hpp"

#include <deque>
#include <random>
#include <set>

namespace lockbench {

SimState SimState::all_zero(const Netlist &n)
{
	SimState s;
	s.dff_values.assign(n.dffs.size(), false);
	for (const auto &r : n.roms)
		s.rom_pipeline.emplace_back(r.data.size(), false);
	return s;
}

Simulator::Simulator(const Netlist &n) : netlist_(&n)
{
	auto id = [&](const std::string &sig) {
		auto [it, fresh] = signal_id_.emplace(sig, num_signals_);
		if (fresh)
			++num_signals_;
		return it->second;
	};
	for (const auto &s : n.inputs)
		input_ids_.push_back(id(s));
	for (const auto &s : n.key_inputs)
		key_ids_.push_back(id(s));
	for (const auto &f : n.dffs)
		dff_q_ids_.push_back(id(f.q));
	for (const auto &r : n.roms) {
		CompiledRom cr;
		for (const auto &s : r.data)
			cr.data.push_back(id(s));
		cr.contents = &r.contents;
		roms_.push_back(std::move(cr));
	}
	// Topological ordering of gates via Kahn's algorithm.
	auto drv = n.driver_map();
	std::vector<int> indeg(n.gates.size(), 0);
	std::vector<std::vector<int>> fanout(n.gates.size());
	for (int gi = 0; gi < (int)n.gates.size(); ++gi) {
		for (const auto &in : n.gates[gi].inputs) {
			auto d = drv.at(in);
			if (d.kind == DriverKind::GateOutput) {
				fanout[d.index].push_back(gi);
				++indeg[gi];
			}
		}
	}
	std::deque<int> ready;
	for (int gi = 0; gi < (int)n.gates.size(); ++gi)
		if (indeg[gi] == 0)
			ready.push_back(gi);
	while (!ready.empty()) {
		int gi = ready.front();
		ready.pop_front();
		const Gate &g = n.gates[gi];
		CompiledGate cg;
		cg.kind = g.kind;
		for (const auto &in : g.inputs)
			cg.in.push_back(id(in));
		cg.out = id(g.output);
		order_.push_back(std::move(cg));
		for (int f : fanout[gi])
			if (--indeg[f] == 0)
				ready.push_back(f);
	}
	if (order_.size() != n.gates.size())
		throw NetlistError("combinational cycle in netlist '" + n.name + "'");
	for (const auto &f : n.dffs) {
		dff_d_ids_.push_back(id(f.d));
		dff_si_ids_.push_back(f.scan ? id(f.scan->si) : -1);
		dff_se_ids_.push_back(f.scan ? id(f.scan->se) : -1);
	}
	for (auto &r : roms_)
		for (const auto &s : n.roms[&r - roms_.data()].address)
			r.addr.push_back(id(s));
	for (const auto &s : n.outputs)
		output_ids_.push_back(id(s));
	values_.assign(num_signals_, 0);
	if (n.key_inputs.empty())
		key_bound_ = true;
}

void Simulator::bind_key(const std::vector<bool> &key_bits)
{
	if (key_bits.size() != key_ids_.size())
		throw NetlistError("key width mismatch");
	key_values_ = key_bits;
	key_bound_ = true;
}

void Simulator::bind_key(const std::map<std::string, bool> &key)
{
	std::vector<bool> bits;
	for (const auto &name : netlist_->key_inputs) {
		auto it = key.find(name);
		if (it == key.end())
			throw NetlistError("key bit for '" + name + "' missing");
		bits.push_back(it->second);
	}
	bind_key(bits);
}

void Simulator::eval_comb(const SimState &state, const InputVector &in) const
{
	if (in.size() != input_ids_.size())
		throw NetlistError("input vector width mismatch");
	if (!key_bound_)
		throw NetlistError("key inputs present but no key bound");
	if (state.dff_values.size() != dff_q_ids_.size())
		throw NetlistError("SimState DFF width mismatch");
	for (size_t i = 0; i < input_ids_.size(); ++i)
		values_[input_ids_[i]] = in[i];
	for (size_t i = 0; i < key_ids_.size(); ++i)
		values_[key_ids_[i]] = key_values_[i];
	for (size_t i = 0; i < dff_q_ids_.size(); ++i)
		values_[dff_q_ids_[i]] = state.dff_values[i];
	for (size_t r = 0; r < roms_.size(); ++r)
		for (size_t b = 0; b < roms_[r].data.size(); ++b)
			values_[roms_[r].data[b]] = state.rom_pipeline[r][b];
	for (const auto &g : order_) {
		bool v;
		switch (g.kind) {
		case GateKind::And: {
			v = true;
			for (int i : g.in)
				v = v && values_[i];
			break;
		}
		case GateKind::Nand: {
			v = true;
			for (int i : g.in)
				v = v && values_[i];
			v = !v;
			break;
		}
		case GateKind::Or: {
			v = false;
			for (int i : g.in)
				v = v || values_[i];
			break;
		}
		case GateKind::Nor: {
			v = false;
			for (int i : g.in)
				v = v || values_[i];
			v = !v;
			break;
		}
		case GateKind::Xor: {
			v = false;
			for (int i : g.in)
				v = v != (bool)values_[i];
			break;
		}
		case GateKind::Xnor: {
			v = false;
			for (int i : g.in)
				v = v != (bool)values_[i];
			v = !v;
			break;
		}
		case GateKind::Not:
			v = !values_[g.in[0]];
			break;
		case GateKind::Buf:
			v = values_[g.in[0]];
			break;
		case GateKind::Mux2:
			v = values_[g.in[0]] ? values_[g.in[2]] : values_[g.in[1]];
			break;
		default:
			v = false;
		}
		values_[g.out] = v;
	}
}

OutputVector Simulator::step(SimState &state, const InputVector &in) const
{
	eval_comb(state, in);
	OutputVector out(output_ids_.size());
	for (size_t i = 0; i < output_ids_.size(); ++i)
		out[i] = values_[output_ids_[i]];
	// Cycle boundary: DFFs capture, ROMs register the addressed word.
	std::vector<bool> next(dff_q_ids_.size());
	for (size_t i = 0; i < dff_q_ids_.size(); ++i) {
		bool d = values_[dff_d_ids_[i]];
		if (dff_se_ids_[i] >= 0 && values_[dff_se_ids_[i]])
			d = values_[dff_si_ids_[i]];
		next[i] = d;
	}
	state.dff_values = std::move(next);
	for (size_t r = 0; r < roms_.size(); ++r) {
		size_t addr = 0;
		for (size_t a = 0; a < roms_[r].addr.size(); ++a)
			addr = (addr << 1) | (values_[roms_[r].addr[a]] ? 1 : 0);
		state.rom_pipeline[r] = (*roms_[r].contents)[addr];
	}
	return out;
}

std::vector<OutputVector> Simulator::run(SimState state, const std::vector<InputVector> &seq) const
{
	std::vector<OutputVector> outs;
	outs.reserve(seq.size());
	for (const auto &in : seq)
		outs.push_back(step(state, in));
	return outs;
}

std::vector<OutputVector> Simulator::run_from_zero(const std::vector<InputVector> &seq) const
{
	return run(SimState::all_zero(*netlist_), seq);
}

bool Simulator::value_of(const std::string &signal) const
{
	auto it = signal_id_.find(signal);
	if (it == signal_id_.end())
		throw NetlistError("unknown signal '" + signal + "'");
	return values_[it->second];
}

EquivalenceReport check_equivalence_random(const Netlist &a, const std::map<std::string, bool> &key_a,
					   const Netlist &b, const std::map<std::string, bool> &key_b,
					   int num_sequences, int cycles, uint64_t seed)
{
	Simulator sa(a), sb(b);
	sa.bind_key(key_a);
	sb.bind_key(key_b);
	if (a.inputs.size() != b.inputs.size() || a.outputs.size() != b.outputs.size())
		throw NetlistError("primary I/O mismatch between compared netlists");
	std::mt19937_64 rng(seed);
	EquivalenceReport rep;
	for (int s = 0; s < num_sequences; ++s) {
		SimState st_a = SimState::all_zero(a), st_b = SimState::all_zero(b);
		for (int c = 0; c < cycles; ++c) {
			InputVector in(a.inputs.size());
			for (size_t i = 0; i < in.size(); ++i)
				in[i] = rng() & 1;
			if (sa.step(st_a, in) != sb.step(st_b, in)) {
				rep.equivalent = false;
				rep.sequence = s;
				rep.cycle = c;
				rep.sequences_run = s + 1;
				return rep;
			}
		}
	}
	rep.sequences_run = num_sequences;
	return rep;
}

namespace {

std::vector<bool> pack_state(const SimState &s)
{
	std::vector<bool> v = s.dff_values;
	for (const auto &w : s.rom_pipeline)
		v.insert(v.end(), w.begin(), w.end());
	return v;
}

} // namespace

bool check_equivalence_exhaustive(const Netlist &a, const std::map<std::string, bool> &key_a,
				  const Netlist &b, const std::map<std::string, bool> &key_b,
				  int max_cycles)
{
	Simulator sa(a), sb(b);
	sa.bind_key(key_a);
	sb.bind_key(key_b);
	size_t ni = a.inputs.size();
	if (ni > 16)
		throw NetlistError("too many inputs for exhaustive equivalence");
	// Product-machine BFS: covers every input sequence up to the depth
	// at which the joint reachable set closes (and at least max_cycles).
	using Joint = std::pair<std::vector<bool>, std::vector<bool>>;
	std::set<Joint> seen;
	std::deque<std::pair<SimState, SimState>> queue;
	SimState z_a = SimState::all_zero(a), z_b = SimState::all_zero(b);
	seen.insert({pack_state(z_a), pack_state(z_b)});
	queue.push_back({z_a, z_b});
	int depth = 0;
	while (!queue.empty() && depth <= max_cycles) {
		size_t level = queue.size();
		bool expanded = false;
		for (size_t q = 0; q < level; ++q) {
			auto [st_a, st_b] = queue.front();
			queue.pop_front();
			for (size_t pat = 0; pat < (size_t(1) << ni); ++pat) {
				InputVector in(ni);
				for (size_t i = 0; i < ni; ++i)
					in[i] = (pat >> i) & 1;
				SimState na = st_a, nb = st_b;
				if (sa.step(na, in) != sb.step(nb, in))
					return false;
				Joint j{pack_state(na), pack_state(nb)};
				if (seen.insert(j).second) {
					queue.push_back({na, nb});
					expanded = true;
				}
			}
		}
		if (!expanded)
			break;
		++depth;
	}
	return true;
}

} // namespace lockbench
