#include "doctest.h"
#include "test_util.hpp"

#include "lockbench/harness.hpp"
#include "lockbench/lock_package.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace lockbench;

namespace {

std::filesystem::path work_dir()
{
	auto dir = std::filesystem::temp_directory_path() / "lockbench_harness_tests";
	std::filesystem::create_directories(dir);
	return dir;
}

int run_cli(const std::string &args)
{
	std::string cmd = std::string(LOCKBENCH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
	int rc = std::system(cmd.c_str());
	return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::filesystem::path &p)
{
	std::ifstream in(p);
	REQUIRE(in.good());
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

Netlist fsm10_netlist()
{
	std::ifstream in(lbtest::fixture("fsm10.fsm"));
	std::ostringstream ss;
	ss << in.rdbuf();
	return synthesize_fsm(parse_fsm_spec(ss.str()), "c10").netlist;
}

} // namespace

TEST_CASE("lock_circuit scramble-c locks, self-checks and pads with decoys")
{
	Netlist n = lbtest::load_fixture("counter2.bench");
	LockRequest req;
	req.method = "scramble-c";
	req.size = 2;
	req.strategy = "lsb";
	req.state_hint = {"b1", "b0"};
	LockOutcome out = lock_circuit(n, req);
	CHECK(out.self_check);
	CHECK(out.key_bits == 3); // one switch + two inversion bits
	CHECK(check_equivalence_exhaustive(n, {}, out.package.locked, out.package.correct_key, 8));

	// size 8 on a 3-FF circuit: decoy FFs are added automatically.
	Netlist s27 = lbtest::load_fixture("s27.bench");
	LockRequest big;
	big.method = "scramble-c";
	big.size = 8;
	big.strategy = "lsb";
	big.state_hint = s27.dff_names();
	LockOutcome bout = lock_circuit(s27, big);
	CHECK(bout.self_check);
	CHECK(bout.key_bits == (uint64_t)build_network(NetworkParams{8, 0, 1}).key_bit_count());
	CHECK(bout.package.locked.dffs.size() == 8);
}

TEST_CASE("lock_circuit scramble-l checks the address width contract")
{
	Netlist n = fsm10_netlist();
	LockRequest req;
	req.method = "scramble-l";
	req.state_hint = {"c10_q0", "c10_q1", "c10_q2", "c10_q3"};
	req.addr_width = 6; // 4 state bits + 2 inputs
	LockOutcome out = lock_circuit(n, req);
	CHECK(out.self_check);
	CHECK(out.key_bits == (uint64_t)(1 << 6) * 4);
	req.addr_width = 5;
	CHECK_THROWS_WITH_AS(lock_circuit(n, req) /**/,
			     doctest::Contains("needs 6"), NetlistError);
	// FSMIM variant shrinks the table.
	req.addr_width = 0;
	req.fsmim = true;
	// fsm10 depends on both inputs in most states, so the FSMIM table is
	// no larger but not necessarily smaller.
	LockOutcome fout = lock_circuit(n, req);
	CHECK(fout.self_check);
	CHECK(fout.key_bits <= out.key_bits);
}

TEST_CASE("lock outputs round-trip through the file formats")
{
	auto dir = work_dir();
	Netlist n = lbtest::load_fixture("s27.bench");
	LockRequest req;
	req.method = "scramble-c";
	req.size = 4;
	req.strategy = "lsb";
	req.state_hint = n.dff_names();
	req.seed = 21;
	LockOutcome out = lock_circuit(n, req);
	write_lock_outputs(out, dir / "s27_locked.bench", dir / "s27_key.json");
	Netlist reread = read_bench_file(dir / "s27_locked.bench");
	CHECK(structurally_equal(reread, out.package.locked));
	KeyFile kf = read_key_file(dir / "s27_key.json");
	CHECK(kf.method == "scramble-c");
	CHECK(kf.key == out.package.correct_key);
	auto rep = check_equivalence_random(n, {}, reread, kf.key, 100, 50, 77);
	CHECK(rep.equivalent);
}

TEST_CASE("run_attack drives each attack family")
{
	Netlist n = lbtest::load_fixture("counter2.bench");
	LockRequest lreq;
	lreq.method = "scramble-c";
	lreq.size = 2;
	lreq.strategy = "lsb";
	lreq.state_hint = {"b1", "b0"};
	LockOutcome locked = lock_circuit(n, lreq);

	AttackRequest areq;
	areq.method = "ubsat";
	areq.ubsat.verify_sequences = 100;
	AttackOutcome out = run_attack(locked.package.locked, n, areq);
	CHECK(out.status() == "key-found");
	CHECK(out.exit_code() == 0);
	CHECK(out.to_json().find("\"method\": \"ubsat\"") != std::string::npos);

	// Memory lock: the harness models the ROM as LUT keys automatically.
	Netlist tog = lbtest::load_fixture("toggler.bench");
	LockRequest mreq;
	mreq.method = "scramble-l";
	LockOutcome mem = lock_circuit(tog, mreq);
	AttackOutcome mout = run_attack(mem.package.locked, tog, areq);
	CHECK(mout.used_lut_model);
	CHECK(mout.status() == "key-found");

	// Two-stage on the unlocked FSM recovers the STG.
	Netlist fsm = fsm10_netlist();
	AttackRequest treq;
	treq.method = "two-stage";
	AttackOutcome tout = run_attack(fsm, fsm, treq);
	CHECK(tout.status() == "stg-recovered");
	CHECK(tout.exit_code() == 0);
	CHECK(tout.two_stage.functional.stg.states.size() == 10);

	CHECK_THROWS_AS(run_attack(fsm, fsm, AttackRequest{"nonsense", {}, {}}), NetlistError);
}

TEST_CASE("experiment plans validate their inputs")
{
	ExperimentPlan plan;
	CHECK_THROWS_AS(plan.validate(), NetlistError); // empty
	plan.circuits = {lbtest::fixture("counter2.bench")};
	plan.locks.push_back({"crlb-2", LockRequest{}});
	plan.validate();
	plan.workers = 0;
	CHECK_THROWS_AS(plan.validate(), NetlistError);
	plan.workers = 1;
	plan.circuits.push_back("no/such/file.bench");
	CHECK_THROWS_AS(plan.validate(), NetlistError);
	plan.circuits.pop_back();
	ExperimentPlan::Attack bad{"ubsat", {}};
	bad.req.ubsat.time_limit = std::chrono::milliseconds(0);
	plan.attacks.push_back(bad);
	CHECK_THROWS_AS(plan.validate(), NetlistError);
}

TEST_CASE("run_experiments sweeps cells and renders identical data")
{
	ExperimentPlan plan;
	plan.circuits = {lbtest::fixture("counter2.bench"), lbtest::fixture("s27.bench")};
	ExperimentPlan::Lock lock{"n=2", LockRequest{}};
	lock.req.strategy = "lsb";
	lock.req.seed = 3;
	plan.locks.push_back(lock);
	ExperimentPlan::Attack atk{"ubsat", {}};
	atk.req.ubsat.verify_sequences = 100;
	plan.attacks.push_back(atk);
	plan.workers = 2;

	ExperimentReport rep = run_experiments(plan);
	REQUIRE(rep.rows.size() == 2);
	for (const auto &row : rep.rows) {
		CHECK(row.status == "key-found");
		CHECK(row.key_verified);
		CHECK(row.attack == "ubsat");
	}
	CHECK(rep.rows[0].circuit == "counter2");
	CHECK(rep.rows[1].circuit == "s27");
	CHECK(rep.rows[1].ffs == 3);

	std::string csv = rep.to_csv();
	CHECK(csv.find("circuit,ffs,gates,method,param,attack,status,wall_ms,key_verified") == 0);
	CHECK(csv.find("counter2,2,4,scramble-c,n=2,ubsat,key-found") != std::string::npos);
	std::string md = rep.to_markdown();
	for (const auto &row : rep.rows) {
		CHECK(md.find(row.circuit) != std::string::npos);
		CHECK(md.find(row.status) != std::string::npos);
	}

	// Reruns reproduce the status column.
	ExperimentReport again = run_experiments(plan);
	for (size_t i = 0; i < rep.rows.size(); ++i)
		CHECK(again.rows[i].status == rep.rows[i].status);

	// Lock-only sweep reports key counts and self-check results.
	plan.attacks.clear();
	ExperimentReport lockonly = run_experiments(plan);
	REQUIRE(lockonly.rows.size() == 2);
	CHECK(lockonly.rows[0].attack == "-");
	CHECK(lockonly.rows[0].status == "ok k=3");

	// Per-cell failures never abort the sweep.
	plan.locks[0].req.strategy = "bogus"; // unknown strategy: cell error
	ExperimentReport errs = run_experiments(plan);
	CHECK(errs.rows[0].status == "error");
}

TEST_CASE("plan JSON parses into a runnable plan")
{
	std::string fixtures = lbtest::fixture("").string();
	std::string text = R"({
		"circuits": [")" + fixtures +
			   R"(counter2.bench"],
		"workers": 2,
		"locks": [{"label": "n=2", "method": "scramble-c", "size": 2, "strategy": "lsb", "seed": 5}],
		"attacks": [{"label": "ubsat", "method": "ubsat", "time_limit_s": 60, "verify_sequences": 50}]
	})";
	ExperimentPlan plan = parse_plan_json(text, ".");
	plan.validate();
	CHECK(plan.workers == 2);
	CHECK(plan.attacks[0].req.ubsat.time_limit == std::chrono::seconds(60));
	ExperimentReport rep = run_experiments(plan);
	REQUIRE(rep.rows.size() == 1);
	CHECK(rep.rows[0].status == "key-found");
}

TEST_CASE("cli locks, attacks and runs plans end to end")
{
	auto dir = work_dir();
	std::string counter = lbtest::fixture("counter2.bench").string();
	std::string locked = (dir / "counter_locked.bench").string();
	std::string key = (dir / "counter_key.json").string();

	REQUIRE(run_cli("lock " + counter + " --method scramble-c --size 2 --strategy lsb --seed 5 --out " +
			locked + " --key " + key) == 0);
	KeyFile kf = read_key_file(key);
	CHECK(kf.key.size() == 3);
	Netlist n = lbtest::load_fixture("counter2.bench");
	CHECK(check_equivalence_exhaustive(n, {}, read_bench_file(locked), kf.key, 8));

	std::string result = (dir / "attack.json").string();
	CHECK(run_cli("attack " + locked + " --method ubsat --oracle " + counter +
		      " --verify-sequences 100 --out " + result) == 0);
	CHECK(slurp(result).find("\"status\": \"key-found\"") != std::string::npos);

	// scramble-l lock + two-stage attack: negative result, exit code 1.
	std::string fsm_bench = (dir / "fsm10.bench").string();
	write_bench_file(fsm10_netlist(), fsm_bench);
	std::string mem_locked = (dir / "fsm10_locked.bench").string();
	std::string mem_key = (dir / "fsm10_key.json").string();
	REQUIRE(run_cli("lock " + fsm_bench +
			" --method scramble-l --state-hint c10_q0,c10_q1,c10_q2,c10_q3 --out " +
			mem_locked + " --key " + mem_key) == 0);
	CHECK(run_cli("attack " + mem_locked + " --method two-stage --oracle " + fsm_bench) == 1);

	// Errors exit with 2.
	CHECK(run_cli("lock missing.bench --method scramble-c --out x --key y") == 2);
	CHECK(run_cli("attack " + locked + " --method ubsat --oracle missing.bench") == 2);

	// Plan run produces CSV + markdown.
	std::string plan = (dir / "plan.json").string();
	{
		std::ofstream out(plan);
		out << R"({"circuits": [")" << counter
		    << R"("], "locks": [{"label": "n=2", "method": "scramble-c", "size": 2, "strategy": "lsb"}],)"
		    << R"( "attacks": [{"label": "ubsat", "method": "ubsat", "verify_sequences": 50}]})";
	}
	std::string prefix = (dir / "report").string();
	REQUIRE(run_cli("run --plan " + plan + " --out " + prefix) == 0);
	CHECK(slurp(prefix + ".csv").find("key-found") != std::string::npos);
	CHECK(slurp(prefix + ".md").find("key-found") != std::string::npos);
}
