// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include "lockbench/attack.hpp"
#include "lockbench/bench.hpp"
#include "lockbench/fsm.hpp"
#include "lockbench/harness.hpp"
#include "lockbench/lock_c.hpp"
#include "lockbench/lock_l.hpp"
#include "lockbench/sim.hpp"
#include "lockbench/switch_network.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

using namespace lockbench;

namespace {

struct CheckFailure : std::runtime_error {
	explicit CheckFailure(const std::string &msg) : std::runtime_error(msg) {}
};

void require(bool ok, const std::string &what)
{
	if (!ok)
		throw CheckFailure(what);
}

FsmSpec fsm10_spec()
{
	std::ifstream in(lbtest::fixture("fsm10.fsm"));
	std::ostringstream ss;
	ss << in.rdbuf();
	return parse_fsm_spec(ss.str());
}

// 6-state/2-input controller, small enough for exhaustive STG work.
FsmSpec fsm6_spec()
{
	std::ostringstream ss;
	ss << "inputs a b\noutputs y\nencoding binary\n";
	for (int k = 0; k < 6; ++k)
		ss << "state T" << k << "\n";
	ss << "initial T0\n";
	for (int k = 0; k < 6; ++k) {
		ss << "trans T" << k << " 0- T" << (k + 1) % 6 << " " << (k & 1) << "\n";
		ss << "trans T" << k << " 10 T" << (k + 2) % 6 << " " << (~k & 1) << "\n";
		ss << "trans T" << k << " 11 T0 1\n";
	}
	return parse_fsm_spec(ss.str());
}

// 8-state FSM over 14 inputs where every state's behavior depends on at
// most two of them (a sparse-input controller in the FSMIM sense).
FsmSpec sparse14_spec()
{
	std::ostringstream ss;
	ss << "inputs";
	for (int i = 0; i < 14; ++i)
		ss << " x" << i;
	ss << "\noutputs y\nencoding binary\n";
	for (int k = 0; k < 8; ++k)
		ss << "state S" << k << "\n";
	ss << "initial S0\n";
	for (int k = 0; k < 8; ++k) {
		int d0 = k % 14, d1 = (k + 5) % 14;
		for (int v = 0; v < 4; ++v) {
			std::string cube(14, '-');
			cube[d0] = (v & 1) ? '1' : '0';
			cube[d1] = (v & 2) ? '1' : '0';
			int next = (k + 1 + v) % 8;
			ss << "trans S" << k << " " << cube << " S" << next << " " << ((k + v) & 1)
			   << "\n";
		}
	}
	return parse_fsm_spec(ss.str());
}

// FSM plus an independent, non-feedback datapath register pair that is
// observable but never feeds the state logic.
Netlist with_datapath(const SynthesizedFsm &fsm)
{
	Netlist n = fsm.netlist;
	n.dffs.push_back(Dff{n.inputs.at(0), "dp0", std::nullopt});
	n.dffs.push_back(Dff{"dp0", "dp1", std::nullopt});
	n.gates.push_back(Gate{GateKind::Xor, {"dp1", n.outputs.at(0)}, "dp_mix"});
	n.outputs.push_back("dp_mix");
	n.validate();
	return n;
}

// 8-register circuit whose next-state cones only read the first `span`
// registers plus one input, so a full memory lock yields a 2^(span+1) x 8
// ROM. The first `span` bits form a free-running counter: the reset
// trajectory walks 2^span distinct states, keeping most ROM rows out of
// reach of shallow unrollings.
Netlist rom_feedback_circuit(int span)
{
	Netlist n;
	n.name = "romfb" + std::to_string(span);
	n.inputs = {"in0"};
	std::string carry;
	for (int i = 0; i < span; ++i) {
		std::string q = "q" + std::to_string(i), nx = "n" + std::to_string(i);
		if (i == 0) {
			n.gates.push_back(Gate{GateKind::Not, {q}, nx});
			carry = q;
		} else {
			n.gates.push_back(Gate{GateKind::Xor, {q, carry}, nx});
			std::string c = "c" + std::to_string(i);
			n.gates.push_back(Gate{GateKind::And, {carry, q}, c});
			carry = c;
		}
		n.dffs.push_back(Dff{nx, q, std::nullopt});
		n.outputs.push_back(q);
	}
	for (int i = span; i < 8; ++i) {
		std::string q = "q" + std::to_string(i), nx = "n" + std::to_string(i);
		n.gates.push_back(Gate{GateKind::Xor, {"q" + std::to_string(i - span), "in0"}, nx});
		n.dffs.push_back(Dff{nx, q, std::nullopt});
		n.outputs.push_back(q);
	}
	n.validate();
	return n;
}

int64_t median3(std::vector<int64_t> v)
{
	std::sort(v.begin(), v.end());
	return v.at(1);
}

// --- criterion 1: correct-key equivalence across fixtures and locks ---

void criterion_equivalence()
{
	std::vector<std::pair<std::string, Netlist>> fixtures;
	for (const char *f : {"toggler.bench", "counter2.bench", "s27.bench", "s298_like.bench"})
		fixtures.emplace_back(f, lbtest::load_fixture(f));
	fixtures.emplace_back("fsm10", synthesize_fsm(fsm10_spec(), "c10").netlist);

	struct Cell {
		std::string label;
		LockRequest req;
	};
	std::vector<Cell> cells;
	for (int size : {2, 4, 8}) {
		LockRequest r;
		r.method = "scramble-c";
		r.size = size;
		r.seed = 40 + size;
		cells.push_back({"scramble-c n=" + std::to_string(size), r});
	}
	{
		LockRequest full, fsmim;
		full.method = fsmim.method = "scramble-l";
		fsmim.fsmim = true;
		cells.push_back({"scramble-l full", full});
		cells.push_back({"scramble-l fsmim", fsmim});
	}

	for (const auto &[fname, orig] : fixtures) {
		for (auto cell : cells) {
			cell.req.self_check_sequences = 10;
			LockOutcome out = lock_circuit(orig, cell.req);
			auto rep = check_equivalence_random(orig, {}, out.package.locked,
							    out.package.correct_key, 1000, 50,
							    0xACCE57 + cell.req.seed);
			require(rep.equivalent, fname + " / " + cell.label + ": mismatch at seq " +
						    std::to_string(rep.sequence) + " cycle " +
						    std::to_string(rep.cycle));
			if (orig.dffs.size() <= 6 && orig.inputs.size() <= 4)
				require(check_equivalence_exhaustive(orig, {}, out.package.locked,
								     out.package.correct_key, 12),
					fname + " / " + cell.label + ": exhaustive check failed");
		}
	}
}

// --- criterion 2: router vs exhaustive switch-config enumeration ---

void criterion_routability()
{
	SwitchNetwork net4 = build_network(NetworkParams{4, 0, 1}, false);
	require(net4.switch_count() == 4, "LOG2(4,0,1) must have 4 switchboxes");

	std::set<std::vector<int>> via_router, via_configs;
	std::vector<int> perm = {0, 1, 2, 3};
	do {
		PortMapping target;
		target.permutation = perm;
		target.negation.assign(4, false);
		auto cfg = route(net4, target);
		if (cfg) {
			PortMapping realized = apply_config(net4, *cfg);
			require(realized.permutation == perm, "router returned a wrong config");
			via_router.insert(perm);
		}
	} while (std::next_permutation(perm.begin(), perm.end()));
	for (int bits = 0; bits < 16; ++bits) {
		SwitchConfig cfg;
		for (int i = 0; i < 4; ++i)
			cfg.switch_bits.push_back((bits >> i) & 1);
		via_configs.insert(apply_config(net4, cfg).permutation);
	}
	require(via_router == via_configs,
		"router success set != exhaustive 16-config enumeration (" +
		    std::to_string(via_router.size()) + " vs " + std::to_string(via_configs.size()) +
		    ")");

	auto base = routable_fraction_exhaustive(build_network(NetworkParams{8, 0, 1}));
	auto extra = routable_fraction_exhaustive(build_network(NetworkParams{8, 1, 1}));
	require(base.total == 40320 && extra.total == 40320, "n=8 enumeration must cover 8! = 40320");
	require(extra.fraction > base.fraction,
		"m=1 routable fraction not above m=0 (" + std::to_string(extra.fraction) + " vs " +
		    std::to_string(base.fraction) + ")");
}

// --- criterion 3: UB-SAT key recovery, wall time vs CRLB size ---

void criterion_ubsat_recovery()
{
	auto attack_ms = [](const Netlist &orig, int size, uint64_t seed) {
		LockRequest lr;
		lr.method = "scramble-c";
		lr.size = size;
		lr.seed = seed;
		lr.self_check_sequences = 10;
		LockOutcome lock = lock_circuit(orig, lr);
		AttackRequest ar;
		std::vector<int64_t> times;
		for (int run = 0; run < 3; ++run) {
			AttackOutcome out = run_attack(lock.package.locked, orig, ar);
			require(out.status() == "key-found", orig.name + " n=" + std::to_string(size) +
								 ": status " + out.status());
			require(out.ubsat.key_verified,
				orig.name + " n=" + std::to_string(size) + ": key not verified");
			require(out.ubsat.wall_ms < 600000,
				orig.name + " n=" + std::to_string(size) + ": over budget");
			times.push_back(out.ubsat.wall_ms);
		}
		return median3(times);
	};
	for (const char *f : {"counter2.bench", "s27.bench"}) {
		Netlist orig = lbtest::load_fixture(f);
		int64_t t2 = attack_ms(orig, 2, 7);
		int64_t t4 = attack_ms(orig, 4, 7);
		require(t4 >= t2, std::string(f) + ": wall time decreased from n=2 (" +
				      std::to_string(t2) + " ms) to n=4 (" + std::to_string(t4) +
				      " ms)");
	}
}

// --- criterion 4: 2-stage attack recovers ground truth on pure FSMs ---

void criterion_two_stage_ground_truth()
{
	struct Case {
		FsmSpec spec;
		std::string prefix;
	};
	std::vector<Case> cases = {{fsm10_spec(), "c10"}, {fsm6_spec(), "c6"}};
	for (const auto &c : cases) {
		SynthesizedFsm fsm = synthesize_fsm(c.spec, c.prefix);
		require(fsm.netlist.dffs.size() <= 6, c.prefix + ": unexpected register count");

		Netlist combined = with_datapath(fsm);
		auto candidates = topological_analysis(combined);
		require(candidates.size() == 1,
			c.prefix + ": expected one candidate set, got " +
			    std::to_string(candidates.size()));
		std::set<std::string> got(candidates[0].begin(), candidates[0].end());
		std::set<std::string> want(fsm.state_ffs.begin(), fsm.state_ffs.end());
		require(got == want, c.prefix + ": candidate set is not the true state register");

		Stg truth = extract_stg_explicit(fsm.netlist, fsm.state_ffs, 0);
		FunctionalResult fr = functional_analysis(fsm.netlist, fsm.state_ffs, 0);
		require(fr.determinate, c.prefix + ": functional analysis not determinate");
		require(stg_equal(fr.stg, truth), c.prefix + ": recovered STG differs from truth");
	}
}

// --- criterion 5: memory lock mixing datapath FFs defeats the 2-stage ---

void criterion_two_stage_defeat()
{
	SynthesizedFsm fsm = synthesize_fsm(fsm10_spec(), "c10");
	Netlist n = fsm.netlist;
	// Rotating datapath register pair entangled with the state cones only
	// through the shared memory lock below.
	n.gates.push_back(Gate{GateKind::Xor, {n.inputs.at(0), "sh1"}, "sh0_d"});
	n.dffs.push_back(Dff{"sh0_d", "sh0", std::nullopt});
	n.dffs.push_back(Dff{"sh0", "sh1", std::nullopt});
	n.gates.push_back(Gate{GateKind::Xor, {"sh1", n.outputs.at(0)}, "mix"});
	n.outputs.push_back("mix");
	n.validate();

	std::vector<std::string> targets = fsm.state_ffs;
	targets.push_back("sh0");
	targets.push_back("sh1");
	MemoryLockResult lock = lock_memory(n, targets, ConeTableMode::Full);
	const Netlist &locked = lock.package.locked;

	auto candidates = topological_analysis(locked);
	bool mixed = false;
	for (const auto &set : candidates) {
		std::set<std::string> s(set.begin(), set.end());
		bool has_state = true;
		for (const auto &q : fsm.state_ffs)
			has_state = has_state && s.count(q);
		if (has_state)
			mixed = s.count("sh0") && s.count("sh1");
	}
	require(mixed, "stage 1 separated the datapath registers from the state register");

	Stg truth = extract_stg_explicit(fsm.netlist, fsm.state_ffs, 0);
	FunctionalLimits limits{32, 2000};
	bool recovered_original = false;
	try {
		TwoStageReport rep = two_stage_attack(locked, limits);
		recovered_original = rep.functional.determinate && stg_equal(rep.functional.stg, truth);
	} catch (const NetlistError &) {
		// State/transition explosion under free memory contents: no STG.
	}
	require(!recovered_original, "stage 2 recovered the original STG from the locked design");
}

// --- criterion 6: UB-SAT cost grows with memory-lock address width ---

void criterion_memory_resilience()
{
	auto run_case = [](int span) {
		Netlist orig = rom_feedback_circuit(span);
		MemoryLockResult lock = lock_memory(orig, orig.dff_names(), ConeTableMode::Full);
		const RomNode &rom = lock.package.locked.roms.at(0);
		require((int)rom.address.size() == span + 1 && rom.data.size() == 8,
			"unexpected ROM geometry for span " + std::to_string(span));
		AttackRequest ar;
		ar.ubsat.max_bound = 8;
		return run_attack(lock.package.locked, orig, ar);
	};
	AttackOutcome small = run_case(6); // 2^7 x 8
	AttackOutcome large = run_case(7); // 2^8 x 8
	require(large.status() == "timeout" || large.status() == "inconclusive-at-bound",
		"2^8 x 8 lock did not resist: " + large.status());
	require(small.wall_ms < large.wall_ms,
		"2^7 x 8 attack not strictly cheaper (" + std::to_string(small.wall_ms) + " ms vs " +
		    std::to_string(large.wall_ms) + " ms)");
}

// --- criterion 7: FSMIM table reduction on a sparse-input FSM ---

void criterion_fsmim_reduction()
{
	SynthesizedFsm fsm = synthesize_fsm(sparse14_spec(), "sp14");
	require(fsm.netlist.inputs.size() == 14, "sparse FSM must have 14 inputs");

	ConeTable full = extract_cone_table(fsm.netlist, fsm.state_ffs, ConeTableMode::Full);
	MemoryLockResult fsmim = lock_memory(fsm.netlist, fsm.state_ffs, ConeTableMode::Fsmim);
	uint64_t full_bits = full.table_bits(), fsmim_bits = fsmim.table.table_bits();
	require(fsmim_bits * 10 <= full_bits,
		"FSMIM table is " + std::to_string(fsmim_bits) + " bits, full support needs " +
		    std::to_string(full_bits));

	auto rep = check_equivalence_random(fsm.netlist, {}, fsmim.package.locked,
					    fsmim.package.correct_key, 1000, 50, 0xF5317);
	require(rep.equivalent, "FSMIM-locked circuit diverges at seq " +
				    std::to_string(rep.sequence) + " cycle " +
				    std::to_string(rep.cycle));
}

// --- criterion 8: infrastructure self-checks ---

void criterion_infrastructure()
{
	namespace fs = std::filesystem;
	fs::path tmp = fs::temp_directory_path() / "lockbench_acceptance";
	fs::create_directories(tmp);
	int corpus = 0;
	for (const auto &entry : fs::directory_iterator(LOCKBENCH_FIXTURE_DIR)) {
		if (entry.path().extension() != ".bench")
			continue;
		Netlist n = read_bench_file(entry.path());
		std::string text = write_bench(n, BenchWriteOptions{true, tmp});
		Netlist back = parse_bench(text, n.name, tmp);
		require(structurally_equal(n, back),
			entry.path().filename().string() + ": round trip not identical");
		++corpus;
	}
	require(corpus >= 5, "bench corpus unexpectedly small");

	std::mt19937_64 rng(0xC8C8C8);
	for (int iter = 0; iter < 20; ++iter) {
		int num_in = 2 + (int)(rng() % 5);
		Netlist n = lbtest::random_circuit(rng, num_in, 0, 4 + (int)(rng() % 7),
						   1 + (int)(rng() % 2));
		CnfInstance cnf = tseitin(n);
		Solver solver;
		cnf.load_into(solver);
		uint64_t models = 0;
		while (solver.solve() == SolveResult::Sat) {
			++models;
			require(models <= (1ull << num_in), "model count exceeds 2^inputs");
			std::vector<Lit> block;
			for (int v = 1; v <= cnf.num_vars; ++v)
				block.push_back(solver.model_value(v) ? -v : v);
			if (!solver.add_clause(block))
				break;
		}
		require(models == (1ull << num_in),
			"Tseitin model count " + std::to_string(models) + " != 2^" +
			    std::to_string(num_in));
	}

	for (int iter = 0; iter < 100; ++iter) {
		int num_in = 1 + (int)(rng() % 4);
		Netlist n = lbtest::random_circuit(rng, num_in, 1 + (int)(rng() % 4),
						   3 + (int)(rng() % 12), 1 + (int)(rng() % 3));
		int frames = 1 + (int)(rng() % 8);
		UnrolledCircuit u = unroll(n, frames, SimState::all_zero(n));
		auto seq = lbtest::random_sequence(rng, frames, num_in);
		require(u.eval(seq, {}) == Simulator(n).run_from_zero(seq),
			"unroll/simulate divergence at iteration " + std::to_string(iter));
	}
}

} // namespace

int main()
{
	struct Criterion {
		int id;
		const char *name;
		void (*fn)();
	};
	const Criterion criteria[] = {
	    {1, "correct-key equivalence across fixtures and lock methods", criterion_equivalence},
	    {2, "router matches exhaustive switch-config enumeration", criterion_routability},
	    {3, "UB-SAT recovers connectivity keys, cost grows with CRLB size",
	     criterion_ubsat_recovery},
	    {4, "2-stage attack recovers ground truth on pure FSMs", criterion_two_stage_ground_truth},
	    {5, "memory lock mixing datapath registers defeats the 2-stage attack",
	     criterion_two_stage_defeat},
	    {6, "UB-SAT resilience grows with memory-lock address width",
	     criterion_memory_resilience},
	    {7, "FSMIM shrinks the cone table on sparse-input FSMs", criterion_fsmim_reduction},
	    {8, "infrastructure: bench round trip, Tseitin counts, unroll vs simulate",
	     criterion_infrastructure},
	};

	bool all_ok = true;
	for (const auto &c : criteria) {
		auto t0 = std::chrono::steady_clock::now();
		std::string error;
		try {
			c.fn();
		} catch (const std::exception &e) {
			error = e.what();
			all_ok = false;
		}
		double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
		if (error.empty())
			std::printf("PASS  criterion %d: %s [%.1f s]\n", c.id, c.name, secs);
		else
			std::printf("FAIL  criterion %d: %s [%.1f s] -- %s\n", c.id, c.name, secs,
				    error.c_str());
		std::fflush(stdout);
	}
	return all_ok ? 0 : 1;
}
