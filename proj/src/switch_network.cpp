#include "lockbench/switch_network.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace lockbench {

int NetworkParams::log2n() const
{
	int k = 0;
	while ((1 << k) < n)
		++k;
	return k;
}

NetworkParams NetworkParams::near_non_blocking(int n)
{
	NetworkParams p;
	p.n = n;
	p.p = 1;
	int k = 0;
	while ((1 << k) < n)
		++k;
	p.m = std::max(0, k - 2);
	return p;
}

static void check_params(const NetworkParams &p)
{
	if (p.n < 2 || (p.n & (p.n - 1)) != 0)
		throw NetlistError("network input count must be a power of two >= 2");
	if (p.m < 0 || p.p < 1)
		throw NetlistError("invalid network parameters");
}

SwitchNetwork build_network(const NetworkParams &params, bool inversion_layer)
{
	check_params(params);
	SwitchNetwork net;
	net.params = params;
	net.has_inversion_layer = inversion_layer;
	return net;
}

int shuffle_port(int port, int n)
{
	int k = 0;
	while ((1 << k) < n)
		++k;
	return ((port << 1) | (port >> (k - 1))) & (n - 1);
}

PortMapping PortMapping::identity(int n)
{
	PortMapping m;
	m.permutation.resize(n);
	std::iota(m.permutation.begin(), m.permutation.end(), 0);
	m.negation.assign(n, false);
	return m;
}

bool PortMapping::is_valid() const
{
	std::vector<bool> seen(permutation.size(), false);
	for (int p : permutation) {
		if (p < 0 || p >= (int)permutation.size() || seen[p])
			return false;
		seen[p] = true;
	}
	return negation.size() == permutation.size();
}

PortMapping apply_config(const SwitchNetwork &net, const SwitchConfig &cfg)
{
	const int n = net.params.n;
	const int stages = net.params.stages();
	if ((int)cfg.switch_bits.size() != net.switch_count())
		throw NetlistError("switch bit count mismatch");
	if (net.has_inversion_layer && (int)cfg.inversion_bits.size() != n)
		throw NetlistError("inversion bit count mismatch");
	PortMapping m;
	m.permutation.resize(n);
	m.negation.assign(n, false);
	for (int i = 0; i < n; ++i) {
		int port = i;
		for (int s = 0; s < stages; ++s) {
			port = shuffle_port(port, n);
			int box = port / 2;
			if (cfg.switch_bits[s * (n / 2) + box])
				port ^= 1;
		}
		m.permutation[i] = port;
	}
	if (net.has_inversion_layer)
		for (int o = 0; o < n; ++o)
			m.negation[o] = cfg.inversion_bits[o];
	return m;
}

namespace {

/// Backtracking router state. Routes input ports in ascending order;
/// along each path, pass is tried before cross at every undecided box.
struct Router {
	const SwitchNetwork &net;
	const PortMapping &target;
	int n, stages;
	std::vector<int> setting;       // per box: -1 undecided, 0 pass, 1 cross
	std::vector<bool> pin_used;     // stage-entry pin occupancy
	std::vector<int> decided_by;    // box -> input that fixed the setting, or -1

	explicit Router(const SwitchNetwork &net_, const PortMapping &target_)
	    : net(net_), target(target_), n(net_.params.n), stages(net_.params.stages()),
	      setting(net_.switch_count(), -1), pin_used((size_t)stages * n, false),
	      decided_by(net_.switch_count(), -1)
	{
	}

	bool route_from(int input, int stage, int port)
	{
		if (stage == stages) {
			if (port != target.permutation[input])
				return false;
			return route_input(input + 1);
		}
		int r = shuffle_port(port, n);
		size_t pin = (size_t)stage * n + r;
		if (pin_used[pin])
			return false;
		int box = stage * (n / 2) + r / 2;
		pin_used[pin] = true;
		bool ok = false;
		if (setting[box] != -1) {
			ok = route_from(input, stage + 1, (r & ~1) | ((r & 1) ^ setting[box]));
		} else {
			for (int v = 0; v <= 1 && !ok; ++v) {
				setting[box] = v;
				decided_by[box] = input;
				ok = route_from(input, stage + 1, (r & ~1) | ((r & 1) ^ v));
				if (!ok) {
					setting[box] = -1;
					decided_by[box] = -1;
				}
			}
		}
		if (!ok)
			pin_used[pin] = false;
		return ok;
	}

	bool route_input(int input)
	{
		if (input == n)
			return true;
		return route_from(input, 0, input);
	}
};

} // namespace

std::optional<SwitchConfig> route(const SwitchNetwork &net, const PortMapping &target)
{
	if ((int)target.permutation.size() != net.params.n || !target.is_valid())
		throw NetlistError("route target is not a bijection of the right size");
	Router r(net, target);
	if (!r.route_input(0))
		return std::nullopt;
	SwitchConfig cfg;
	cfg.switch_bits.resize(net.switch_count());
	for (int b = 0; b < net.switch_count(); ++b)
		cfg.switch_bits[b] = r.setting[b] == 1; // undecided boxes default to pass
	if (net.has_inversion_layer)
		cfg.inversion_bits.assign(target.negation.begin(), target.negation.end());
	return cfg;
}

RoutableFraction routable_fraction_exhaustive(const SwitchNetwork &net)
{
	if (net.params.n > 8)
		throw NetlistError("exhaustive routable fraction limited to n <= 8");
	std::vector<int> perm(net.params.n);
	std::iota(perm.begin(), perm.end(), 0);
	RoutableFraction rf;
	do {
		PortMapping t;
		t.permutation = perm;
		t.negation.assign(net.params.n, false);
		++rf.total;
		if (route(net, t))
			++rf.routable;
	} while (std::next_permutation(perm.begin(), perm.end()));
	rf.fraction = double(rf.routable) / double(rf.total);
	return rf;
}

RoutableFraction routable_fraction_sampled(const SwitchNetwork &net, uint64_t samples, uint64_t seed)
{
	std::mt19937_64 rng(seed);
	std::vector<int> perm(net.params.n);
	std::iota(perm.begin(), perm.end(), 0);
	RoutableFraction rf;
	for (uint64_t s = 0; s < samples; ++s) {
		std::shuffle(perm.begin(), perm.end(), rng);
		PortMapping t;
		t.permutation = perm;
		t.negation.assign(net.params.n, false);
		++rf.total;
		if (route(net, t))
			++rf.routable;
	}
	rf.fraction = double(rf.routable) / double(rf.total);
	return rf;
}

SynthesizedNetwork synthesize(const SwitchNetwork &net, const std::string &prefix)
{
	const int n = net.params.n;
	const int stages = net.params.stages();
	SynthesizedNetwork out;
	Netlist &nl = out.netlist;
	nl.name = prefix;
	std::vector<std::string> cur(n);
	for (int i = 0; i < n; ++i) {
		cur[i] = prefix + "_in" + std::to_string(i);
		nl.inputs.push_back(cur[i]);
		out.input_ports.push_back(cur[i]);
	}
	for (int s = 0; s < stages; ++s) {
		std::vector<std::string> shuffled(n);
		for (int q = 0; q < n; ++q)
			shuffled[shuffle_port(q, n)] = cur[q];
		std::vector<std::string> next(n);
		for (int b = 0; b < n / 2; ++b) {
			std::string key = prefix + "_k_sw" + std::to_string(s * (n / 2) + b);
			nl.key_inputs.push_back(key);
			out.key_names.push_back(key);
			std::string lo = shuffled[2 * b], hi = shuffled[2 * b + 1];
			std::string olo = prefix + "_s" + std::to_string(s) + "_p" + std::to_string(2 * b);
			std::string ohi = prefix + "_s" + std::to_string(s) + "_p" + std::to_string(2 * b + 1);
			nl.gates.push_back(Gate{GateKind::Mux2, {key, lo, hi}, olo});
			nl.gates.push_back(Gate{GateKind::Mux2, {key, hi, lo}, ohi});
			next[2 * b] = olo;
			next[2 * b + 1] = ohi;
		}
		cur = std::move(next);
	}
	for (int i = 0; i < n; ++i) {
		std::string o = prefix + "_out" + std::to_string(i);
		if (net.has_inversion_layer) {
			std::string key = prefix + "_k_inv" + std::to_string(i);
			nl.key_inputs.push_back(key);
			out.key_names.push_back(key);
			nl.gates.push_back(Gate{GateKind::Xor, {cur[i], key}, o});
		} else {
			nl.gates.push_back(Gate{GateKind::Buf, {cur[i]}, o});
		}
		nl.outputs.push_back(o);
		out.output_ports.push_back(o);
	}
	nl.validate();
	return out;
}

std::vector<bool> config_to_key_bits(const SwitchNetwork &net, const SwitchConfig &cfg)
{
	std::vector<bool> bits(cfg.switch_bits.begin(), cfg.switch_bits.end());
	if (net.has_inversion_layer)
		bits.insert(bits.end(), cfg.inversion_bits.begin(), cfg.inversion_bits.end());
	return bits;
}

} // namespace lockbench
