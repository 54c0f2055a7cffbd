#include "lockbench/bench.hpp"
#include "lockbench/harness.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace lockbench;

namespace {

std::vector<std::string> split_list(const std::string &s)
{
	std::vector<std::string> out;
	std::stringstream ss(s);
	std::string item;
	while (std::getline(ss, item, ','))
		if (!item.empty())
			out.push_back(item);
	return out;
}

int cmd_lock(const std::string &input, const std::string &out_path, const std::string &key_path,
	     LockRequest req, const std::string &hint, const std::string &ffs)
{
	req.state_hint = split_list(hint);
	req.explicit_ffs = split_list(ffs);
	Netlist n = read_bench_file(input);
	LockOutcome outcome = lock_circuit(n, req);
	if (!outcome.self_check)
		throw NetlistError("post-lock equivalence self-check failed");
	write_lock_outputs(outcome, out_path, key_path);
	std::cout << "locked " << n.name << " with " << req.method << " (" << outcome.key_bits
		  << " key bits) -> " << out_path << ", " << key_path << "\n";
	return 0;
}

int cmd_attack(const std::string &locked_path, const std::string &oracle_path,
	       const std::string &out_path, AttackRequest req, double time_limit_s)
{
	req.ubsat.time_limit = std::chrono::milliseconds((int64_t)(time_limit_s * 1000.0));
	Netlist locked = read_bench_file(locked_path);
	Netlist original = read_bench_file(oracle_path);
	AttackOutcome outcome = run_attack(locked, original, req);
	std::string json = outcome.to_json();
	std::cout << json << "\n";
	if (!out_path.empty()) {
		std::ofstream out(out_path);
		if (!out)
			throw NetlistError("cannot write '" + out_path + "'");
		out << json << "\n";
	}
	return outcome.exit_code();
}

int cmd_run(const std::string &plan_path, const std::string &out_prefix)
{
	std::ifstream in(plan_path);
	if (!in)
		throw NetlistError("cannot open plan '" + plan_path + "'");
	std::ostringstream ss;
	ss << in.rdbuf();
	std::filesystem::path base = std::filesystem::path(plan_path).parent_path();
	ExperimentPlan plan = parse_plan_json(ss.str(), base.empty() ? "." : base);
	ExperimentReport report = run_experiments(plan);
	std::ofstream csv(out_prefix + ".csv"), md(out_prefix + ".md");
	if (!csv || !md)
		throw NetlistError("cannot write report files '" + out_prefix + ".{csv,md}'");
	csv << report.to_csv();
	md << report.to_markdown();
	std::cout << report.to_csv();
	return 0;
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"gate-level logic-locking workbench"};
	app.require_subcommand(1);

	auto *lock = app.add_subcommand("lock", "lock a bench circuit");
	std::string lock_in, lock_out, lock_key, lock_hint, lock_ffs;
	LockRequest lreq;
	lock->add_option("input", lock_in, "input bench file")->required();
	lock->add_option("--method", lreq.method, "scramble-c|scramble-l")->required();
	lock->add_option("--size", lreq.size, "CRLB port count (scramble-c)");
	lock->add_option("--addr-width", lreq.addr_width, "expected ROM address width (scramble-l)");
	lock->add_flag("--fsmim", lreq.fsmim, "FSMIM input multiplexing (scramble-l)");
	lock->add_option("--targets", lreq.targets, "fsm|datapath|scan");
	lock->add_option("--strategy", lreq.strategy, "msb|lsb|mixed|scan-window|explicit");
	lock->add_option("--seed", lreq.seed, "lock seed");
	lock->add_option("--state-hint", lock_hint, "state register FFs, MSB first, comma-separated");
	lock->add_option("--ffs", lock_ffs, "explicit target FFs, comma-separated");
	lock->add_option("--m", lreq.m, "extra LOG2 stages");
	lock->add_option("--p", lreq.p, "cascaded LOG2 copies");
	lock->add_option("--out", lock_out, "locked bench output")->required();
	lock->add_option("--key", lock_key, "key JSON output")->required();

	auto *attack = app.add_subcommand("attack", "attack a locked circuit");
	std::string atk_locked, atk_oracle, atk_out;
	AttackRequest areq;
	double time_limit_s = 600.0;
	attack->add_option("locked", atk_locked, "locked bench file")->required();
	attack->add_option("--method", areq.method, "ubsat|two-stage|scansat")->required();
	attack->add_option("--oracle", atk_oracle, "original bench file (black-box oracle)")->required();
	attack->add_option("--time-limit", time_limit_s, "seconds per attack");
	attack->add_option("--initial-bound", areq.ubsat.initial_boundary, "starting unroll depth");
	attack->add_option("--bound-step", areq.ubsat.boundary_step, "unroll depth increment");
	attack->add_option("--max-bound", areq.ubsat.max_bound, "unroll depth cap");
	attack->add_option("--verify-sequences", areq.ubsat.verify_sequences, "verification sequences");
	attack->add_option("--out", atk_out, "result JSON path");

	auto *run = app.add_subcommand("run", "run an experiment plan");
	std::string plan_path, out_prefix = "report";
	run->add_option("--plan", plan_path, "plan JSON file")->required();
	run->add_option("--out", out_prefix, "output prefix (.csv/.md)");

	CLI11_PARSE(app, argc, argv);

	try {
		if (lock->parsed())
			return cmd_lock(lock_in, lock_out, lock_key, lreq, lock_hint, lock_ffs);
		if (attack->parsed())
			return cmd_attack(atk_locked, atk_oracle, atk_out, areq, time_limit_s);
		if (run->parsed())
			return cmd_run(plan_path, out_prefix);
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return 2;
	}
	return 2;
}
