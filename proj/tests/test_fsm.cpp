#include "doctest.h"
#include "test_util.hpp"

#include "lockbench/fsm.hpp"
#include "lockbench/sim.hpp"

#include <fstream>
#include <sstream>

using namespace lockbench;

namespace {

std::string slurp(const std::filesystem::path &p)
{
	std::ifstream in(p);
	REQUIRE(in.good());
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

const char *toggler_spec =
    "inputs en\n"
    "outputs out\n"
    "encoding binary\n"
    "state OFF\n"
    "state ON\n"
    "initial OFF\n"
    "trans OFF 0 OFF 0\n"
    "trans OFF 1 ON 0\n"
    "trans ON 0 ON 1\n"
    "trans ON 1 OFF 1\n";

const char *ring4_spec =
    "inputs\n"
    "outputs o0 o1\n"
    "encoding binary\n"
    "state A\nstate B\nstate C\nstate D\n"
    "initial A\n"
    "trans A . B 00\n"
    "trans B . C 10\n"
    "trans C . D 01\n"
    "trans D . A 11\n";

} // namespace

TEST_CASE("spec parsing and validation")
{
	SUBCASE("toggler parses")
	{
		FsmSpec s = parse_fsm_spec(toggler_spec);
		CHECK(s.state_width == 1);
		CHECK(s.encoding.at("OFF") == 0);
		CHECK(s.encoding.at("ON") == 1);
		CHECK(s.transitions.size() == 4);
	}
	SUBCASE("incomplete spec rejected")
	{
		std::string bad =
		    "inputs a\noutputs\nencoding binary\nstate S0\nstate S1\ninitial S0\n"
		    "trans S0 0 S1 .\ntrans S1 - S0 .\n"; // S0 under input 1 uncovered
		CHECK_THROWS_AS(parse_fsm_spec(bad), NetlistError);
	}
	SUBCASE("overlapping cubes rejected")
	{
		std::string bad =
		    "inputs a\noutputs\nencoding binary\nstate S0\nstate S1\ninitial S0\n"
		    "trans S0 - S1 .\ntrans S0 1 S0 .\ntrans S1 - S0 .\n";
		CHECK_THROWS_AS(parse_fsm_spec(bad), NetlistError);
	}
	SUBCASE("non-injective explicit encoding rejected")
	{
		std::string bad =
		    "inputs\noutputs\nencoding explicit\nstate S0 00\nstate S1 00\ninitial S0\n"
		    "trans S0 . S1 .\ntrans S1 . S0 .\n";
		CHECK_THROWS_AS(parse_fsm_spec(bad), NetlistError);
	}
	SUBCASE("unknown keyword reported with line number")
	{
		try {
			parse_fsm_spec("inputs a\nbogus x\n");
			FAIL("expected throw");
		} catch (const NetlistError &e) {
			CHECK(std::string(e.what()).find("line 2") != std::string::npos);
		}
	}
}

TEST_CASE("spec to_stg expands cubes over concrete inputs")
{
	FsmSpec s = parse_fsm_spec(toggler_spec);
	Stg stg = s.to_stg();
	CHECK(stg.state_width == 1);
	CHECK(stg.input_width == 1);
	CHECK(stg.states == std::set<uint32_t>{0, 1});
	CHECK(stg.transitions.size() == 4);
	CHECK(stg.transitions.count({0, 1, 1, 0}) == 1);
	CHECK(stg.transitions.count({1, 0, 1, 1}) == 1);
	CHECK(stg.is_deterministic());
}

TEST_CASE("synthesis round-trips through explicit extraction")
{
	for (const char *text : {toggler_spec, ring4_spec}) {
		FsmSpec s = parse_fsm_spec(text);
		SynthesizedFsm syn = synthesize_fsm(s);
		Stg ref = s.to_stg();
		Stg got = extract_stg_explicit(syn.netlist, syn.state_ffs, s.encoding.at(s.initial));
		CHECK(stg_equal(ref, got));
		CHECK(stg_diff(ref, got).empty());
	}
}

TEST_CASE("synthesized toggler is equivalent to the hand-written fixture")
{
	FsmSpec s = parse_fsm_spec(toggler_spec);
	SynthesizedFsm syn = synthesize_fsm(s);
	Netlist fixture_net = lbtest::load_fixture("toggler.bench");
	CHECK(check_equivalence_exhaustive(syn.netlist, {}, fixture_net, {}, 8));
}

TEST_CASE("fsm10 fixture: 10 reachable states on a 4-bit register")
{
	FsmSpec s = parse_fsm_spec(slurp(lbtest::fixture("fsm10.fsm")));
	CHECK(s.state_width == 4);
	Stg ref = s.to_stg();
	CHECK(ref.states.size() == 10);
	CHECK(ref.transitions.size() == 40);

	SynthesizedFsm syn = synthesize_fsm(s, "c10");
	CHECK(syn.state_ffs.size() == 4);
	CHECK(syn.state_ffs[0] == "c10_q0");
	Stg got = extract_stg_explicit(syn.netlist, syn.state_ffs, 0);
	CHECK(stg_equal(ref, got));

	// Input-dependent: from S0, input patterns 0 and 1 reach different states.
	auto next_of = [&](uint32_t st, uint32_t in) {
		for (const auto &t : got.transitions)
			if (t.state == st && t.input == in)
				return t.next;
		FAIL("missing transition");
		return uint32_t(0);
	};
	CHECK(next_of(0, 0) != next_of(0, 1));
}

TEST_CASE("write_fsm_spec round-trip preserves the STG")
{
	for (std::string text : {std::string(toggler_spec), slurp(lbtest::fixture("fsm10.fsm"))}) {
		FsmSpec a = parse_fsm_spec(text);
		FsmSpec b = parse_fsm_spec(write_fsm_spec(a));
		CHECK(a.encoding == b.encoding);
		CHECK(stg_equal(a.to_stg(), b.to_stg()));
	}
}

TEST_CASE("one-hot encoding")
{
	std::string text =
	    "inputs go\noutputs busy\nencoding onehot\n"
	    "state IDLE\nstate RUN\nstate DONE\ninitial IDLE\n"
	    "trans IDLE 0 IDLE 0\ntrans IDLE 1 RUN 1\n"
	    "trans RUN - DONE 1\ntrans DONE - IDLE 0\n";
	FsmSpec s = parse_fsm_spec(text);
	CHECK(s.state_width == 3);
	CHECK(s.encoding.at("IDLE") == 0b001);
	CHECK(s.encoding.at("RUN") == 0b010);
	SynthesizedFsm syn = synthesize_fsm(s, "oh");
	Stg got = extract_stg_explicit(syn.netlist, syn.state_ffs, s.encoding.at("IDLE"));
	CHECK(stg_equal(s.to_stg(), got));
}

TEST_CASE("stg_diff reports extra states and false transitions")
{
	FsmSpec s = parse_fsm_spec(toggler_spec);
	Stg a = s.to_stg();
	Stg b = a;
	b.states.insert(7);
	StgTransition t{0, 1, 1, 0};
	b.transitions.erase(t);
	b.transitions.insert({0, 1, 0, 1}); // misdirected copy of the erased edge
	StgDiff d = stg_diff(a, b);
	CHECK(d.extra_states == std::set<uint32_t>{7});
	CHECK(d.missing_transitions == std::set<StgTransition>{t});
	CHECK(d.false_transitions == std::set<StgTransition>{{0, 1, 0, 1}});
	CHECK(stg_diff(a, a).empty());
	CHECK_FALSE(stg_equal(a, b));
}

TEST_CASE("nondeterministic STG detected")
{
	Stg stg;
	stg.state_width = 1;
	stg.input_width = 0;
	stg.states = {0, 1};
	stg.initial = 0;
	stg.transitions.insert({0, 0, 0, 0});
	stg.transitions.insert({0, 0, 1, 0});
	stg.transitions.insert({1, 0, 0, 0});
	CHECK_FALSE(stg.is_deterministic());
	CHECK_THROWS_AS(stg.validate(), NetlistError);
}

TEST_CASE("dot export lists every reachable state")
{
	Stg stg = parse_fsm_spec(ring4_spec).to_stg();
	std::string dot = stg_to_dot(stg);
	for (uint32_t s : stg.states)
		CHECK(dot.find("s" + std::to_string(s)) != std::string::npos);
	CHECK(dot.find("doublecircle") != std::string::npos);
}

TEST_CASE("extraction guards")
{
	FsmSpec s = parse_fsm_spec(toggler_spec);
	SynthesizedFsm syn = synthesize_fsm(s);
	SUBCASE("wrong FF name")
	{
		CHECK_THROWS_AS(extract_stg_explicit(syn.netlist, {"nope"}, 0), NetlistError);
	}
	SUBCASE("key inputs rejected")
	{
		Netlist n = syn.netlist;
		n.key_inputs.push_back("k0");
		n.gates.push_back(Gate{GateKind::Buf, {"k0"}, "kx"});
		n.outputs.push_back("kx");
		n.validate();
		CHECK_THROWS_AS(extract_stg_explicit(n, syn.state_ffs, 0), NetlistError);
	}
}
