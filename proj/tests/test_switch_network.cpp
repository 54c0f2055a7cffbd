#include "doctest.h"
#include "test_util.hpp"

#include "lockbench/sim.hpp"
#include "lockbench/switch_network.hpp"

#include <map>
#include <set>

using namespace lockbench;

namespace {

// Independent reference: propagates a token per input through the layers
// one interconnect/box at a time, written against the network definition
// rather than apply_config's loop structure.
PortMapping reference_mapping(const SwitchNetwork &net, const SwitchConfig &cfg)
{
	int n = net.params.n;
	std::vector<int> token(n);  // token[port] = input index occupying port
	for (int i = 0; i < n; ++i)
		token[i] = i;
	for (int s = 0; s < net.params.stages(); ++s) {
		std::vector<int> after(n);
		for (int q = 0; q < n; ++q)
			after[shuffle_port(q, n)] = token[q];
		for (int b = 0; b < n / 2; ++b)
			if (cfg.switch_bits[s * (n / 2) + b])
				std::swap(after[2 * b], after[2 * b + 1]);
		token = after;
	}
	PortMapping m;
	m.permutation.resize(n);
	m.negation.assign(n, false);
	for (int port = 0; port < n; ++port)
		m.permutation[token[port]] = port;
	if (net.has_inversion_layer)
		for (int port = 0; port < n; ++port)
			m.negation[port] = cfg.inversion_bits[port];
	return m;
}

SwitchConfig config_from_bits(const SwitchNetwork &net, uint64_t sw, uint64_t inv)
{
	SwitchConfig cfg;
	cfg.switch_bits.resize(net.switch_count());
	for (int i = 0; i < net.switch_count(); ++i)
		cfg.switch_bits[i] = (sw >> i) & 1;
	cfg.inversion_bits.resize(net.params.n);
	for (int i = 0; i < net.params.n; ++i)
		cfg.inversion_bits[i] = (inv >> i) & 1;
	return cfg;
}

std::set<std::vector<int>> achievable_permutations(const SwitchNetwork &net)
{
	std::set<std::vector<int>> perms;
	for (uint64_t sw = 0; sw < (uint64_t(1) << net.switch_count()); ++sw) {
		SwitchConfig cfg = config_from_bits(net, sw, 0);
		perms.insert(apply_config(net, cfg).permutation);
	}
	return perms;
}

} // namespace

TEST_CASE("network shapes")
{
	SUBCASE("n=2 smallest")
	{
		auto net = build_network({2, 0, 1});
		CHECK(net.params.stages() == 1);
		CHECK(net.switch_count() == 1);
	}
	SUBCASE("n=8 m=1 near non-blocking")
	{
		auto net = build_network(NetworkParams::near_non_blocking(8));
		CHECK(net.params.m == 1);
		CHECK(net.params.stages() == 4);
		CHECK(net.switch_count() == 16);
		CHECK(net.key_bit_count() == 24);
	}
	SUBCASE("n=64 strictly non-blocking citation point")
	{
		auto net = build_network({64, 3, 6});
		CHECK(net.params.stages() == 6 * (6 + 3));
		CHECK(net.switch_count() == 32 * 54);
	}
	SUBCASE("bad n rejected")
	{
		CHECK_THROWS_AS(build_network({6, 0, 1}), NetlistError);
	}
}

TEST_CASE("apply_config agrees with reference propagation")
{
	for (NetworkParams params : {NetworkParams{2, 0, 1}, NetworkParams{4, 0, 1}, NetworkParams{4, 1, 1},
				     NetworkParams{8, 1, 1}, NetworkParams{4, 0, 2}}) {
		auto net = build_network(params);
		std::mt19937_64 rng(3);
		for (int t = 0; t < 200; ++t) {
			SwitchConfig cfg = config_from_bits(net, rng(), rng());
			PortMapping a = apply_config(net, cfg);
			PortMapping b = reference_mapping(net, cfg);
			REQUIRE(a.permutation == b.permutation);
			REQUIRE(a.negation == b.negation);
			REQUIRE(a.is_valid());
		}
	}
}

TEST_CASE("single crossbox and pointwise inversion")
{
	auto net = build_network({2, 0, 1});
	SwitchConfig cross = config_from_bits(net, 1, 0);
	PortMapping m = apply_config(net, cross);
	CHECK(m.permutation == std::vector<int>{1, 0});
	CHECK(m.negation == std::vector<bool>{false, false});

	SwitchConfig inv = config_from_bits(net, 0, 0b11);
	PortMapping mi = apply_config(net, inv);
	SwitchConfig plain = config_from_bits(net, 0, 0);
	CHECK(mi.permutation == apply_config(net, plain).permutation);
	CHECK(mi.negation == std::vector<bool>{true, true});
}

TEST_CASE("routing soundness and determinism")
{
	for (NetworkParams params : {NetworkParams{4, 0, 1}, NetworkParams{8, 0, 1}, NetworkParams{8, 1, 1}}) {
		auto net = build_network(params);
		std::mt19937_64 rng(17);
		std::vector<int> perm(params.n);
		for (int i = 0; i < params.n; ++i)
			perm[i] = i;
		for (int t = 0; t < 300; ++t) {
			std::shuffle(perm.begin(), perm.end(), rng);
			PortMapping target;
			target.permutation = perm;
			target.negation.resize(params.n);
			for (int i = 0; i < params.n; ++i)
				target.negation[i] = rng() & 1;
			auto cfg = route(net, target);
			if (!cfg)
				continue;
			PortMapping got = apply_config(net, *cfg);
			REQUIRE(got.permutation == target.permutation);
			REQUIRE(got.negation == target.negation);
			auto cfg2 = route(net, target);
			REQUIRE(cfg2);
			REQUIRE(cfg2->switch_bits == cfg->switch_bits);
		}
	}
}

TEST_CASE("routing completeness matches exhaustive enumeration (n=4 blocking)")
{
	auto net = build_network({4, 0, 1});
	auto achievable = achievable_permutations(net);
	CHECK(achievable.size() < 24); // 16 configs cannot cover 24 permutations

	std::vector<int> perm{0, 1, 2, 3};
	int routable = 0, unroutable = 0;
	do {
		PortMapping t;
		t.permutation = perm;
		t.negation.assign(4, false);
		bool can = achievable.count(perm) > 0;
		auto cfg = route(net, t);
		REQUIRE((cfg.has_value() == can));
		(can ? routable : unroutable)++;
	} while (std::next_permutation(perm.begin(), perm.end()));
	CHECK(routable + unroutable == 24);
	CHECK(unroutable > 0);
}

TEST_CASE("identity routes on the n=4 blocking network")
{
	auto net = build_network({4, 0, 1});
	CHECK(route(net, PortMapping::identity(4)).has_value());
}

TEST_CASE("routable fraction")
{
	SUBCASE("n=2 both permutations route")
	{
		auto net = build_network({2, 0, 1});
		auto rf = routable_fraction_exhaustive(net);
		CHECK(rf.fraction == 1.0);
	}
	SUBCASE("n=4 m=0 exact value vs brute force")
	{
		auto net = build_network({4, 0, 1});
		auto rf = routable_fraction_exhaustive(net);
		CHECK(rf.total == 24);
		CHECK(rf.routable == achievable_permutations(net).size());
		CHECK(rf.fraction < 1.0);
	}
	SUBCASE("extra stage strictly helps at n=8 (sampled paired check)")
	{
		auto blocking = build_network({8, 0, 1});
		auto extra = build_network({8, 1, 1});
		std::mt19937_64 rng(99);
		std::vector<int> perm(8);
		for (int i = 0; i < 8; ++i)
			perm[i] = i;
		int blocking_ok = 0, extra_ok = 0;
		for (int t = 0; t < 1000; ++t) {
			std::shuffle(perm.begin(), perm.end(), rng);
			PortMapping target;
			target.permutation = perm;
			target.negation.assign(8, false);
			if (route(blocking, target))
				++blocking_ok;
			if (route(extra, target))
				++extra_ok;
		}
		CHECK(extra_ok > blocking_ok);
	}
	SUBCASE("exhaustive rejected for n > 8")
	{
		auto net = build_network({16, 0, 1});
		CHECK_THROWS_AS(routable_fraction_exhaustive(net), NetlistError);
	}
}

TEST_CASE("synthesized network key counts")
{
	SUBCASE("n=2 with inversion: 3 key bits")
	{
		auto syn = synthesize(build_network({2, 0, 1}), "crlb");
		CHECK(syn.key_names.size() == 3);
	}
	SUBCASE("n=8 m=1 with inversion: 24 key bits")
	{
		auto syn = synthesize(build_network(NetworkParams::near_non_blocking(8)), "crlb");
		CHECK(syn.key_names.size() == 24);
		CHECK(syn.netlist.key_inputs.size() == 24);
	}
}

TEST_CASE("synthesized netlist matches apply_config exhaustively (n<=8)")
{
	for (NetworkParams params : {NetworkParams{2, 0, 1}, NetworkParams{4, 0, 1}, NetworkParams{8, 1, 1}}) {
		auto net = build_network(params);
		auto syn = synthesize(net, "crlb");
		Simulator sim(syn.netlist);
		std::mt19937_64 rng(41);
		int n = params.n;
		for (int t = 0; t < 30; ++t) {
			SwitchConfig cfg = config_from_bits(net, rng(), rng());
			PortMapping m = apply_config(net, cfg);
			sim.bind_key(config_to_key_bits(net, cfg));
			int patterns = n <= 4 ? (1 << n) : 64;
			for (int pat = 0; pat < patterns; ++pat) {
				size_t bits = n <= 4 ? (size_t)pat : rng();
				InputVector in(n);
				for (int i = 0; i < n; ++i)
					in[i] = (bits >> i) & 1;
				SimState st = SimState::all_zero(syn.netlist);
				auto out = sim.step(st, in);
				for (int i = 0; i < n; ++i) {
					bool expect = in[i] != m.negation[m.permutation[i]];
					REQUIRE(out[m.permutation[i]] == expect);
				}
			}
		}
	}
}

TEST_CASE("achievable permutation count bounded by min(2^switches, n!)")
{
	auto net = build_network({4, 1, 1});
	auto perms = achievable_permutations(net);
	CHECK(perms.size() <= (size_t)std::min<uint64_t>(uint64_t(1) << net.switch_count(), 24));
}
