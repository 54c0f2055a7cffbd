#include "lockbench/lock_c.hpp"

#include <algorithm>
#include <random>

namespace lockbench {

const char *lock_mode_name(LockMode m)
{
	switch (m) {
	case LockMode::FsmDataIn:
		return "fsm-data-in";
	case LockMode::DatapathDataIn:
		return "datapath-data-in";
	case LockMode::ScanIn:
		return "scan-in";
	}
	return "?";
}

static bool is_power_of_two(size_t v)
{
	return v >= 2 && (v & (v - 1)) == 0;
}

static std::vector<std::string> scan_chain_order(const Netlist &n)
{
	// Follow si links: the chain head's si is not any DFF's q.
	std::map<std::string, int> by_si; // si signal -> dff index
	std::set<std::string> qs;
	for (size_t i = 0; i < n.dffs.size(); ++i) {
		if (!n.dffs[i].scan)
			throw NetlistError("scan-window selection requires a fully scan-stitched netlist");
		by_si[n.dffs[i].scan->si] = (int)i;
		qs.insert(n.dffs[i].q);
	}
	int head = -1;
	for (const auto &[si, idx] : by_si)
		if (!qs.count(si))
			head = idx;
	if (head < 0)
		throw NetlistError("scan chain has no head (cyclic si wiring?)");
	std::vector<std::string> order;
	std::map<std::string, int> by_si_signal;
	for (size_t i = 0; i < n.dffs.size(); ++i)
		by_si_signal[n.dffs[i].scan->si] = (int)i;
	int cur = head;
	while (cur >= 0 && order.size() < n.dffs.size()) {
		order.push_back(n.dffs[cur].q);
		auto it = by_si_signal.find(n.dffs[cur].q);
		cur = it == by_si_signal.end() ? -1 : it->second;
	}
	if (order.size() != n.dffs.size())
		throw NetlistError("scan chain does not cover all DFFs");
	return order;
}

LockTargets select_target_ffs(const Netlist &n, const SelectionStrategy &strategy,
			      const std::optional<std::vector<std::string>> &state_ffs_hint)
{
	LockTargets t;
	size_t size = (size_t)strategy.size;
	if (strategy.kind == SelectionKind::Explicit)
		size = strategy.explicit_ffs.size();
	if (!is_power_of_two(size))
		throw NetlistError("CRLB size must be a power of two >= 2");
	std::vector<std::string> all_ffs = n.dff_names();
	std::set<std::string> dffs(all_ffs.begin(), all_ffs.end());

	switch (strategy.kind) {
	case SelectionKind::MsbState:
	case SelectionKind::LsbState: {
		if (!state_ffs_hint)
			throw NetlistError("msb/lsb selection requires a state register hint");
		const auto &hint = *state_ffs_hint;
		if (size > hint.size())
			throw NetlistError("selection size exceeds the state register width");
		t.mode = LockMode::FsmDataIn;
		if (strategy.kind == SelectionKind::MsbState)
			t.ffs.assign(hint.begin(), hint.begin() + size);
		else
			t.ffs.assign(hint.end() - size, hint.end());
		break;
	}
	case SelectionKind::MixedStateDatapath: {
		if (!state_ffs_hint)
			throw NetlistError("mixed selection requires a state register hint");
		std::set<std::string> state(state_ffs_hint->begin(), state_ffs_hint->end());
		std::vector<std::string> datapath;
		for (const auto &q : n.dff_names())
			if (!state.count(q))
				datapath.push_back(q);
		if (datapath.empty())
			throw NetlistError("mixed selection requires non-state DFFs");
		if (size / 2 > state_ffs_hint->size() || size / 2 > datapath.size())
			throw NetlistError("not enough DFFs of each class for mixed selection");
		std::mt19937_64 rng(strategy.rng_seed);
		std::vector<std::string> st(*state_ffs_hint);
		std::shuffle(st.begin(), st.end(), rng);
		std::shuffle(datapath.begin(), datapath.end(), rng);
		t.mode = LockMode::FsmDataIn;
		for (size_t i = 0; i < size / 2; ++i) {
			t.ffs.push_back(st[i]);
			t.ffs.push_back(datapath[i]);
		}
		break;
	}
	case SelectionKind::ScanWindow: {
		auto order = scan_chain_order(n);
		if (size > order.size())
			throw NetlistError("selection size exceeds the scan chain length");
		std::mt19937_64 rng(strategy.rng_seed);
		size_t start = order.size() == size ? 0 : rng() % (order.size() - size + 1);
		t.mode = LockMode::ScanIn;
		t.ffs.assign(order.begin() + start, order.begin() + start + size);
		break;
	}
	case SelectionKind::Explicit: {
		t.mode = LockMode::DatapathDataIn;
		t.ffs = strategy.explicit_ffs;
		break;
	}
	}
	std::set<std::string> seen;
	for (const auto &q : t.ffs) {
		if (!dffs.count(q))
			throw NetlistError("selected FF '" + q + "' does not exist");
		if (!seen.insert(q).second)
			throw NetlistError("selected FF '" + q + "' listed twice");
	}
	return t;
}

std::vector<std::string> add_decoy_ffs(Netlist &n, int count, const std::string &prefix)
{
	std::vector<std::string> names;
	bool stitched = n.is_scan_stitched() && !n.dffs.empty();
	size_t head = 0;
	if (stitched) {
		// Chain head: the one DFF whose si is not another DFF's q.
		std::set<std::string> qs;
		for (const auto &f : n.dffs)
			qs.insert(f.q);
		for (size_t i = 0; i < n.dffs.size(); ++i)
			if (!qs.count(n.dffs[i].scan->si))
				head = i;
	}
	int suffix = 0;
	for (int i = 0; i < count; ++i) {
		std::string q;
		do
			q = prefix + std::to_string(suffix++);
		while (n.has_signal(q));
		std::optional<ScanPins> scan;
		if (stitched) {
			// Splice in front of the old chain head so the netlist stays
			// fully stitched.
			scan = ScanPins{names.empty() ? n.dffs[head].scan->si : names.back(),
					n.dffs[head].scan->se};
		}
		n.dffs.push_back(Dff{q, q, scan});
		names.push_back(q);
	}
	if (stitched)
		n.dffs[head].scan->si = names.back();
	n.validate();
	return names;
}

LockPackage lock_connectivity(const Netlist &n, const LockTargets &targets, const NetworkParams &params,
			      uint64_t seed, const ConnectivityOptions &opt)
{
	const int cn = params.n;
	if ((size_t)cn != targets.ffs.size())
		throw NetlistError("CRLB size must equal the number of targeted FFs");
	if (!is_power_of_two(targets.ffs.size()))
		throw NetlistError("targeted FF count must be a power of two >= 2");
	std::set<std::string> seen;
	for (const auto &q : targets.ffs)
		if (!seen.insert(q).second)
			throw NetlistError("targeted FF '" + q + "' listed twice");

	// Locate targets and the wires the CRLB intercepts.
	std::vector<size_t> ff_index(cn);
	std::vector<std::string> wire(cn);
	for (int j = 0; j < cn; ++j) {
		size_t found = n.dffs.size();
		for (size_t d = 0; d < n.dffs.size(); ++d)
			if (n.dffs[d].q == targets.ffs[j])
				found = d;
		if (found == n.dffs.size())
			throw NetlistError("targeted FF '" + targets.ffs[j] + "' does not exist");
		ff_index[j] = found;
		if (targets.mode == LockMode::ScanIn) {
			if (!n.dffs[found].scan)
				throw NetlistError("scan-in lock on non-scan FF '" + targets.ffs[j] + "'");
			wire[j] = n.dffs[found].scan->si;
		} else {
			wire[j] = n.dffs[found].d;
		}
	}

	std::string prefix = opt.prefix;
	{
		std::set<std::string> names;
		for (const auto &s : n.inputs)
			names.insert(s);
		for (const auto &s : n.key_inputs)
			names.insert(s);
		for (const auto &g : n.gates)
			names.insert(g.output);
		for (const auto &f : n.dffs)
			names.insert(f.q);
		auto collides = [&](const std::string &p) {
			for (const auto &s : names)
				if (s.rfind(p + "_", 0) == 0)
					return true;
			return false;
		};
		int c = 0;
		while (collides(prefix))
			prefix = opt.prefix + std::to_string(c++);
	}

	SwitchNetwork net = build_network(params);

	// Seed-derived scramble: wire w[assign[i]] feeds input port i, inverted
	// when inv[i]. The correct key must route port i to output assign[i]
	// and cancel the inversion there.
	std::vector<int> assign(cn);
	std::vector<bool> inv(cn);
	std::optional<SwitchConfig> cfg;
	int attempt = 0;
	for (; attempt < opt.max_seed_retries && !cfg; ++attempt) {
		std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (uint64_t)attempt);
		for (int i = 0; i < cn; ++i)
			assign[i] = i;
		std::shuffle(assign.begin(), assign.end(), rng);
		for (int i = 0; i < cn; ++i)
			inv[i] = rng() & 1;
		PortMapping restore;
		restore.permutation.resize(cn);
		restore.negation.assign(cn, false);
		for (int i = 0; i < cn; ++i) {
			restore.permutation[i] = assign[i];
			restore.negation[assign[i]] = inv[i];
		}
		cfg = route(net, restore);
	}
	if (!cfg)
		throw NetlistError("no routable restoring permutation after " +
				   std::to_string(opt.max_seed_retries) + " seed retries");

	SynthesizedNetwork syn = synthesize(net, prefix);

	LockPackage pkg;
	pkg.locked = n;
	// Feed the CRLB: fixed BUF/NOT from the intercepted wires onto the
	// former port inputs, which become internal signals.
	for (int i = 0; i < cn; ++i)
		pkg.locked.gates.push_back(
		    Gate{inv[i] ? GateKind::Not : GateKind::Buf, {wire[assign[i]]}, syn.input_ports[i]});
	for (const auto &g : syn.netlist.gates)
		pkg.locked.gates.push_back(g);
	for (const auto &k : syn.netlist.key_inputs)
		pkg.locked.key_inputs.push_back(k);
	for (int j = 0; j < cn; ++j) {
		Dff &f = pkg.locked.dffs[ff_index[j]];
		if (targets.mode == LockMode::ScanIn)
			f.scan->si = syn.output_ports[j];
		else
			f.d = syn.output_ports[j];
	}
	pkg.locked.name = n.name + "_crlb" + std::to_string(cn);
	pkg.locked.validate();

	std::vector<bool> bits = config_to_key_bits(net, *cfg);
	for (size_t i = 0; i < syn.key_names.size(); ++i)
		pkg.correct_key[syn.key_names[i]] = bits[i];

	pkg.meta.method = "scramble-c";
	pkg.meta.params = {{"n", params.n}, {"m", params.m}, {"p", params.p}, {"seed_retries", attempt - 1}};
	pkg.meta.target_mode = lock_mode_name(targets.mode);
	pkg.meta.target_ffs = targets.ffs;
	pkg.meta.seed = seed;
	return pkg;
}

FalseTransitionReport count_false_transitions(const Stg &original, const Stg &locked_under_key)
{
	StgDiff d = stg_diff(original, locked_under_key);
	return FalseTransitionReport{d.extra_states, d.false_transitions};
}

} // namespace lockbench
