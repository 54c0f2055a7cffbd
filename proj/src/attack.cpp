#include "lockbench/attack.hpp"

#include "lockbench/lock_l.hpp"
#include "lockbench/structure.hpp"

#include "json.hpp"

#include <algorithm>
#include <random>

namespace lockbench {

namespace {

using Clock = std::chrono::steady_clock;

int64_t ms_since(Clock::time_point t0)
{
	return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

/// Backward walk from the seed signals through combinational gates.
/// Returns the frontier (non-gate-driven sources) and collects every
/// signal used as a MUX2 select along the way.
std::set<std::string> walk_cone(const Netlist &n, const std::unordered_map<std::string, Driver> &drv,
				const std::vector<std::string> &seeds,
				std::set<std::string> *mux_selects = nullptr)
{
	std::set<std::string> frontier, seen;
	std::vector<std::string> stack(seeds.begin(), seeds.end());
	while (!stack.empty()) {
		std::string sig = stack.back();
		stack.pop_back();
		if (!seen.insert(sig).second)
			continue;
		const Driver &d = drv.at(sig);
		if (d.kind != DriverKind::GateOutput) {
			frontier.insert(sig);
			continue;
		}
		const Gate &g = n.gates[d.index];
		if (g.kind == GateKind::Mux2 && mux_selects)
			mux_selects->insert(g.inputs[0]);
		for (const auto &in : g.inputs)
			stack.push_back(in);
	}
	return frontier;
}

/// Storage nodes seen by the structural stage: DFFs plus individual ROM
/// data bits (a memory's registered read looks like a register bank).
struct StorageNode {
	std::string name;		      // q pin / data bit signal
	std::vector<std::string> next_seeds;  // signals its next value depends on
	std::set<std::string> signature;      // structural control signature
	std::set<std::string> frontier;
};

std::vector<StorageNode> storage_nodes(const Netlist &n)
{
	auto drv = n.driver_map();
	std::vector<StorageNode> nodes;
	for (const auto &f : n.dffs) {
		StorageNode node;
		node.name = f.q;
		node.next_seeds.push_back(f.d);
		if (f.scan) {
			node.next_seeds.push_back(f.scan->si);
			node.next_seeds.push_back(f.scan->se);
			node.signature.insert(f.scan->se);
		}
		node.frontier = walk_cone(n, drv, node.next_seeds, &node.signature);
		nodes.push_back(std::move(node));
	}
	for (const auto &r : n.roms)
		for (const auto &bit : r.data) {
			StorageNode node;
			node.name = bit;
			node.next_seeds = r.address;
			node.frontier = walk_cone(n, drv, node.next_seeds, &node.signature);
			nodes.push_back(std::move(node));
		}
	return nodes;
}

/// FFs (and ROM bits) whose value can reach a primary output, directly or
/// through other observable storage.
std::set<std::string> observable_storage(const Netlist &n)
{
	auto drv = n.driver_map();
	auto nodes = storage_nodes(n);
	std::set<std::string> obs;
	std::vector<std::string> sinks = n.outputs;
	for (;;) {
		std::set<std::string> frontier = walk_cone(n, drv, sinks);
		bool grew = false;
		for (const auto &node : nodes) {
			if (obs.count(node.name) || !frontier.count(node.name))
				continue;
			obs.insert(node.name);
			sinks.insert(sinks.end(), node.next_seeds.begin(), node.next_seeds.end());
			grew = true;
		}
		if (!grew)
			return obs;
	}
}

} // namespace

Oracle::Oracle(Netlist n, const std::map<std::string, bool> &key)
    : netlist_(std::move(n)), sim_(netlist_), inputs_(netlist_.inputs), outputs_(netlist_.outputs)
{
	if (!netlist_.key_inputs.empty())
		sim_.bind_key(key);
	else if (!key.empty())
		throw NetlistError("oracle netlist has no key inputs");
}

std::vector<OutputVector> Oracle::query(const std::vector<InputVector> &seq) const
{
	return sim_.run_from_zero(seq);
}

std::vector<std::vector<std::string>> topological_analysis(const Netlist &n)
{
	n.validate();
	auto nodes = storage_nodes(n);
	int count = (int)nodes.size();
	std::map<std::string, int> index;
	for (int i = 0; i < count; ++i)
		index[nodes[i].name] = i;

	// Dependency edges a -> b: a's stored value feeds b's next value.
	std::vector<std::vector<int>> succ(count);
	for (int b = 0; b < count; ++b)
		for (const auto &src : nodes[b].frontier) {
			auto it = index.find(src);
			if (it != index.end())
				succ[it->second].push_back(b);
		}
	std::vector<bool> cyc = on_cycle(succ);
	std::vector<int> comp = strongly_connected_components(succ);

	// Transitive primary-input dependence through the storage graph.
	std::set<std::string> pis(n.inputs.begin(), n.inputs.end());
	std::vector<bool> input_dep(count, false);
	std::vector<int> work;
	for (int i = 0; i < count; ++i)
		for (const auto &src : nodes[i].frontier)
			if (pis.count(src)) {
				input_dep[i] = true;
				work.push_back(i);
				break;
			}
	while (!work.empty()) {
		int a = work.back();
		work.pop_back();
		for (int b : succ[a])
			if (!input_dep[b]) {
				input_dep[b] = true;
				work.push_back(b);
			}
	}

	// Group by control signature, then split along SCC boundaries.
	std::map<std::set<std::string>, std::vector<int>> groups;
	for (int i = 0; i < count; ++i)
		groups[nodes[i].signature].push_back(i);
	std::vector<std::vector<std::string>> result;
	std::vector<int> first_member;
	for (const auto &[sig, members] : groups) {
		std::map<int, std::vector<int>> by_comp;
		for (int i : members)
			if (cyc[i] && input_dep[i])
				by_comp[comp[i]].push_back(i);
		for (const auto &[c, set] : by_comp) {
			std::vector<std::string> names;
			for (int i : set)
				names.push_back(nodes[i].name);
			first_member.push_back(set.front());
			result.push_back(std::move(names));
		}
	}
	// Deterministic order: by lowest member in storage declaration order.
	std::vector<size_t> order(result.size());
	for (size_t i = 0; i < order.size(); ++i)
		order[i] = i;
	std::sort(order.begin(), order.end(),
		  [&](size_t a, size_t b) { return first_member[a] < first_member[b]; });
	std::vector<std::vector<std::string>> out;
	for (size_t i : order)
		out.push_back(std::move(result[i]));
	return out;
}

FunctionalResult functional_analysis(const Netlist &n, const std::vector<std::string> &state_ffs,
				     uint32_t initial, const FunctionalLimits &limits)
{
	Netlist work = n;
	// Memories are unknown logic to the attacker: free-key LUT model.
	while (!work.roms.empty())
		work = memory_as_luts(work, 0).netlist;
	for (const auto &q : state_ffs)
		if (!work.has_signal(q))
			throw NetlistError("state FF '" + q + "' not present");

	UnrolledCircuit u = unroll(work, 2, SimState::all_zero(work));
	CnfInstance cnf = tseitin(u.comb);
	Solver solver;
	cnf.load_into(solver);

	int W = (int)state_ffs.size();
	std::vector<int> st0, st1, in0, out0;
	for (const auto &q : state_ffs) {
		st0.push_back(cnf.var(q + "@0"));
		st1.push_back(cnf.var(q + "@1"));
	}
	for (const auto &i : n.inputs)
		in0.push_back(cnf.var(i + "@0"));
	for (const auto &o : n.outputs)
		out0.push_back(cnf.var(o + "@0"));

	FunctionalResult res;
	res.stg.state_width = W;
	res.stg.input_width = (int)in0.size();
	res.stg.output_width = (int)out0.size();
	res.stg.initial = initial;
	res.stg.input_names = n.inputs;
	res.stg.output_names = n.outputs;

	std::vector<uint32_t> queue{initial};
	res.stg.states.insert(initial);
	while (!queue.empty()) {
		uint32_t state = queue.back();
		queue.pop_back();
		std::vector<Lit> as;
		for (int i = 0; i < W; ++i) {
			bool bit = (state >> (W - 1 - i)) & 1;
			as.push_back(bit ? st0[i] : -st0[i]);
		}
		while (solver.solve(as) == SolveResult::Sat) {
			++res.sat_calls;
			StgTransition t{state, 0, 0, 0};
			for (size_t i = 0; i < in0.size(); ++i)
				if (solver.model_value(in0[i]))
					t.input |= 1u << i;
			for (int i = 0; i < W; ++i)
				if (solver.model_value(st1[i]))
					t.next |= 1u << (W - 1 - i);
			for (size_t i = 0; i < out0.size(); ++i)
				if (solver.model_value(out0[i]))
					t.output |= 1u << i;
			res.stg.transitions.insert(t);
			if (res.stg.transitions.size() > limits.max_transitions)
				throw NetlistError("functional analysis exceeded the transition limit");
			if (!res.stg.states.count(t.next)) {
				if (res.stg.states.size() >= limits.max_states)
					throw NetlistError("functional analysis exceeded the state limit");
				res.stg.states.insert(t.next);
				queue.push_back(t.next);
			}
			// Block this (state, input, next) triple globally.
			std::vector<Lit> block;
			for (Lit l : as)
				block.push_back(-l);
			for (size_t i = 0; i < in0.size(); ++i)
				block.push_back((t.input >> i) & 1 ? -in0[i] : in0[i]);
			for (int i = 0; i < W; ++i)
				block.push_back((t.next >> (W - 1 - i)) & 1 ? -st1[i] : st1[i]);
			solver.add_clause(block);
		}
	}
	// Determinate: one (next, output) per (state, input).
	std::map<std::pair<uint32_t, uint32_t>, int> fan;
	for (const auto &t : res.stg.transitions)
		res.determinate = res.determinate && ++fan[{t.state, t.input}] == 1;
	return res;
}

TwoStageReport two_stage_attack(const Netlist &n, const FunctionalLimits &limits)
{
	TwoStageReport rep;
	auto t0 = Clock::now();
	rep.candidate_sets = topological_analysis(n);
	rep.stage1_ms = ms_since(t0);
	for (const auto &set : rep.candidate_sets)
		if (set.size() > rep.chosen_state_ffs.size())
			rep.chosen_state_ffs = set;
	rep.initial_state = 0; // all-zero reset convention
	auto t1 = Clock::now();
	if (!rep.chosen_state_ffs.empty())
		rep.functional = functional_analysis(n, rep.chosen_state_ffs, rep.initial_state, limits);
	rep.stage2_ms = ms_since(t1);
	return rep;
}

const char *ubsat_status_name(UbsatStatus s)
{
	switch (s) {
	case UbsatStatus::KeyFound:
		return "key-found";
	case UbsatStatus::Timeout:
		return "timeout";
	case UbsatStatus::InconclusiveAtBound:
		return "inconclusive-at-bound";
	}
	return "?";
}

std::string UbsatResult::to_json() const
{
	nlohmann::ordered_json j;
	j["status"] = ubsat_status_name(status);
	nlohmann::ordered_json k = nlohmann::ordered_json::object();
	for (const auto &[name, v] : key)
		k[name] = v ? 1 : 0;
	j["key"] = k;
	j["bound"] = bound;
	j["dis_count"] = dis_count;
	j["wall_ms"] = wall_ms;
	j["verification"] = {{"sequences", verify_sequences},
			     {"mismatches", verify_mismatches},
			     {"key_verified", key_verified}};
	return j.dump(2);
}

namespace {

/// Per-frame forced input bits (protocol schedule for the scan attack);
/// unset entries stay free.
using InputSchedule = std::vector<std::vector<std::optional<bool>>>;

/// Appends a single-step combinational miter (outputs + next state of the
/// observable FFs, state and inputs free and shared) reusing the main
/// miter's key variables. Returns its difference flag variable.
int embed_comb_miter(Miter &m, const Netlist &locked, const std::set<std::string> &observable)
{
	Netlist step;
	step.name = locked.name + "_step";
	step.inputs = locked.inputs;
	step.key_inputs = locked.key_inputs;
	step.gates = locked.gates;
	step.outputs = locked.outputs;
	for (const auto &f : locked.dffs) {
		step.inputs.push_back(f.q);
		if (!observable.count(f.q))
			continue;
		std::string nx = "__nx_" + f.q;
		if (f.scan)
			step.gates.push_back(Gate{GateKind::Mux2, {f.scan->se, f.d, f.scan->si}, nx});
		else
			step.gates.push_back(Gate{GateKind::Buf, {f.d}, nx});
		step.outputs.push_back(nx);
	}
	step.validate();

	std::map<std::string, int> shared;
	for (const auto &sig : step.inputs)
		shared[sig] = m.cnf.fresh_var();
	std::map<std::string, int> s1(shared), s2(shared);
	for (const auto &[k, v] : m.key1)
		s1[k] = v;
	for (const auto &[k, v] : m.key2)
		s2[k] = v;
	auto v1 = tseitin_into(m.cnf, step, s1);
	auto v2 = tseitin_into(m.cnf, step, s2);
	int diff = m.cnf.fresh_var();
	std::vector<Lit> any{-diff};
	for (const auto &o : step.outputs) {
		int x = m.cnf.fresh_var();
		int a = v1.at(o), b = v2.at(o);
		m.cnf.add({a, b, -x});
		m.cnf.add({a, -b, x});
		m.cnf.add({-a, b, x});
		m.cnf.add({-a, -b, -x});
		any.push_back(x);
	}
	m.cnf.add(std::move(any));
	return diff;
}

/// Appends the recurrence-diameter termination check to the bound-b miter
/// and returns its activation literal. Assuming the literal asks for a
/// surviving key pair whose joint register states at frames 0..b-1 are
/// pairwise distinct. Unsat (together with an empty DIS loop at this
/// bound) proves the surviving keys equivalent at every depth: a minimal
/// diverging trace visits pairwise-distinct joint states (otherwise the
/// loop between two equal states could be cut, shortening it), so its
/// length-b prefix would be exactly such a trajectory.
int embed_recurrence_check(Miter &m, const Netlist &locked, int b)
{
	int rec = m.cnf.fresh_var();
	for (int i = 0; i + 1 < b; ++i)
		for (int j = i + 1; j < b; ++j) {
			int dij = m.cnf.fresh_var();
			std::vector<Lit> any{-dij};
			for (const auto *copy : {&m.map1, &m.map2})
				for (const auto &f : locked.dffs) {
					int va = copy->at(f.q + "@" + std::to_string(i));
					int vb = copy->at(f.q + "@" + std::to_string(j));
					int x = m.cnf.fresh_var();
					m.cnf.add({va, vb, -x});
					m.cnf.add({va, -vb, x});
					m.cnf.add({-va, vb, x});
					m.cnf.add({-va, -vb, -x});
					any.push_back(x);
				}
			m.cnf.add(std::move(any));
			m.cnf.add({-rec, dij});
		}
	return rec;
}

UbsatResult run_sat_loop(const Netlist &locked, const Oracle &oracle, const UbsatConfig &cfg,
			 const InputSchedule &schedule, bool grow_bounds)
{
	locked.validate();
	if (locked.key_inputs.empty())
		throw NetlistError("locked netlist has no key inputs");
	if (!locked.roms.empty())
		throw NetlistError("model memory contents as LUT keys first (memory_as_luts)");
	if (oracle.input_names() != locked.inputs || oracle.output_names() != locked.outputs)
		throw NetlistError("oracle pinout does not match the locked netlist");

	auto t0 = Clock::now();
	auto deadline = t0 + cfg.time_limit;
	std::set<std::string> observable = observable_storage(locked);
	std::vector<std::pair<std::vector<InputVector>, std::vector<OutputVector>>> collected;

	UbsatResult res;
	int b = grow_bounds ? cfg.initial_boundary : (int)schedule.size();
	for (;;) {
		res.bound = b;
		if (grow_bounds && b > cfg.max_bound) {
			res.status = UbsatStatus::InconclusiveAtBound;
			res.bound = b - cfg.boundary_step;
			break;
		}
		UnrolledCircuit u = unroll(locked, b, SimState::all_zero(locked));
		Miter m = build_miter(u, false);
		int act = add_key_equality(m);
		int ce_diff = embed_comb_miter(m, locked, observable);
		for (size_t k = 0; k < schedule.size() && (int)k < b; ++k)
			for (size_t i = 0; i < schedule[k].size(); ++i)
				if (schedule[k][i]) {
					int v = m.shared_vars.at(u.frame_inputs[k][i]);
					m.cnf.add({*schedule[k][i] ? v : -v});
				}
		for (const auto &[seq, outs] : collected)
			constrain_io(m, u, seq, outs);
		Solver solver;
		size_t mark = 0;
		auto sync = [&] {
			solver.ensure_vars(m.cnf.num_vars);
			for (; mark < m.cnf.clauses.size(); ++mark)
				solver.add_clause(m.cnf.clauses[mark]);
		};
		sync();

		bool timed_out = false;
		auto solve = [&](std::vector<Lit> as) {
			SolveResult r = solver.solve_until(as, deadline);
			timed_out = timed_out || r == SolveResult::Unknown;
			return r;
		};

		// DIS loop at this bound.
		for (;;) {
			SolveResult r = solve({m.diff_var});
			if (r != SolveResult::Sat)
				break;
			std::vector<InputVector> seq(b);
			for (int k = 0; k < b; ++k)
				for (const auto &sig : u.frame_inputs[k])
					seq[k].push_back(solver.model_value(m.shared_vars.at(sig)));
			auto outs = oracle.query(seq);
			++res.dis_count;
			collected.emplace_back(seq, outs);
			constrain_io(m, u, seq, outs);
			sync();
		}
		if (timed_out) {
			res.status = UbsatStatus::Timeout;
			break;
		}

		// UC: is the surviving key unique up to this bound?
		if (solve({act}) != SolveResult::Sat) {
			res.status = timed_out ? UbsatStatus::Timeout : UbsatStatus::InconclusiveAtBound;
			break;
		}
		std::map<std::string, bool> key;
		std::vector<Lit> not_this_key;
		int blk = m.cnf.fresh_var();
		not_this_key.push_back(-blk);
		for (const auto &[name, v] : m.key1) {
			key[name] = solver.model_value(v);
			not_this_key.push_back(key[name] ? -v : v);
		}
		m.cnf.add(not_this_key);
		sync();
		if (solve({act, blk}) == SolveResult::Unsat) {
			res.status = UbsatStatus::KeyFound;
			res.key = key;
			break;
		}
		// CE: are all surviving key pairs combinationally equivalent
		// on outputs and observable next state?
		if (solve({ce_diff}) == SolveResult::Unsat) {
			res.status = UbsatStatus::KeyFound;
			res.key = key;
			break;
		}
		// UMC stand-in: recurrence check on the joint trajectory. Only
		// sound when the inputs are free — a forced per-frame schedule
		// breaks the loop-cutting argument.
		if (!timed_out && schedule.empty()) {
			int rec = embed_recurrence_check(m, locked, b);
			sync();
			if (solve({rec}) == SolveResult::Unsat && !timed_out) {
				res.status = UbsatStatus::KeyFound;
				res.key = key;
				break;
			}
		}
		if (timed_out) {
			res.status = UbsatStatus::Timeout;
			break;
		}
		if (!grow_bounds) {
			res.status = UbsatStatus::InconclusiveAtBound;
			break;
		}
		b += cfg.boundary_step;
	}

	if (res.status == UbsatStatus::KeyFound) {
		Simulator sim(locked);
		sim.bind_key(res.key);
		std::mt19937_64 rng(cfg.verify_seed);
		res.verify_sequences = cfg.verify_sequences;
		for (int s = 0; s < cfg.verify_sequences; ++s) {
			std::vector<InputVector> seq(cfg.verify_cycles, InputVector(locked.inputs.size()));
			for (auto &v : seq)
				for (size_t i = 0; i < v.size(); ++i)
					v[i] = rng() & 1;
			if (sim.run_from_zero(seq) != oracle.query(seq))
				++res.verify_mismatches;
		}
		res.key_verified = res.verify_mismatches == 0;
	}
	res.wall_ms = ms_since(t0);
	return res;
}

} // namespace

UbsatResult ubsat_attack(const Netlist &locked, const Oracle &oracle, const UbsatConfig &cfg)
{
	return run_sat_loop(locked, oracle, cfg, {}, true);
}

UbsatResult scan_unroll_attack(const Netlist &locked, const Oracle &oracle, const UbsatConfig &cfg)
{
	if (!locked.is_scan_stitched())
		throw NetlistError("scan attack requires a fully scan-stitched netlist");
	// Shared scan-enable and the external scan-in pin. The si pin is
	// derived from the se naming convention because a scan-locked chain
	// routes the per-FF si signals through the CRLB.
	std::string se = locked.dffs[0].scan->se;
	std::string si;
	if (se.size() > 3 && se.compare(se.size() - 3, 3, "_se") == 0)
		si = se.substr(0, se.size() - 3) + "_si";
	if (!si.empty() && std::find(locked.inputs.begin(), locked.inputs.end(), si) == locked.inputs.end())
		si.clear();
	if (si.empty()) {
		std::vector<std::string> names = locked.dff_names();
		std::set<std::string> qs(names.begin(), names.end());
		for (const auto &f : locked.dffs)
			if (!qs.count(f.scan->si))
				si = f.scan->si;
	}
	int se_idx = -1, si_idx = -1;
	for (size_t i = 0; i < locked.inputs.size(); ++i) {
		if (locked.inputs[i] == se)
			se_idx = (int)i;
		if (locked.inputs[i] == si)
			si_idx = (int)i;
	}
	if (se_idx < 0 || si_idx < 0)
		throw NetlistError("scan pins are not primary inputs");

	// One scan-load (L cycles), one capture, one scan-read window.
	int L = (int)locked.dffs.size();
	InputSchedule schedule(2 * L + 1, std::vector<std::optional<bool>>(locked.inputs.size()));
	for (int k = 0; k < 2 * L + 1; ++k) {
		bool capture = k == L;
		for (size_t i = 0; i < locked.inputs.size(); ++i) {
			if ((int)i == se_idx)
				schedule[k][i] = !capture;
			else if ((int)i == si_idx)
				schedule[k][i] = k < L ? std::optional<bool>() : std::optional<bool>(false);
			else
				schedule[k][i] = capture ? std::optional<bool>() : std::optional<bool>(false);
		}
	}
	return run_sat_loop(locked, oracle, cfg, schedule, false);
}

} // namespace lockbench
