#include "lockbench/harness.hpp"

#include "lockbench/bench.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace lockbench {

namespace {

using Clock = std::chrono::steady_clock;

SelectionKind strategy_kind(const std::string &s)
{
	if (s == "msb")
		return SelectionKind::MsbState;
	if (s == "lsb")
		return SelectionKind::LsbState;
	if (s == "mixed")
		return SelectionKind::MixedStateDatapath;
	if (s == "scan-window")
		return SelectionKind::ScanWindow;
	if (s == "explicit")
		return SelectionKind::Explicit;
	throw NetlistError("unknown selection strategy '" + s + "'");
}

LockMode target_mode(const std::string &t)
{
	if (t == "fsm")
		return LockMode::FsmDataIn;
	if (t == "datapath")
		return LockMode::DatapathDataIn;
	if (t == "scan")
		return LockMode::ScanIn;
	throw NetlistError("unknown target class '" + t + "'");
}

void check_solver_backend()
{
	const char *backend = std::getenv("LOCKBENCH_SOLVER");
	if (backend && *backend && std::string(backend) != "cdcl")
		throw NetlistError(std::string("unknown solver backend '") + backend + "' (supported: cdcl)");
}

} // namespace

LockOutcome lock_circuit(const Netlist &n, const LockRequest &req)
{
	n.validate();
	LockOutcome out;
	if (req.method == "scramble-c") {
		if (req.size < 2 || (req.size & (req.size - 1)) != 0)
			throw NetlistError("CRLB size must be a power of two >= 2");
		Netlist work = n;
		std::vector<std::string> decoys;
		if ((int)work.dffs.size() < req.size)
			decoys = add_decoy_ffs(work, req.size - (int)work.dffs.size());
		SelectionStrategy st;
		st.kind = strategy_kind(req.strategy);
		st.size = req.size;
		st.rng_seed = req.seed;
		st.explicit_ffs = req.explicit_ffs;
		// Bench files carry no encoding metadata: without an explicit
		// hint the declaration order stands in for the state register,
		// with decoy FFs at the LSB end.
		std::vector<std::string> hint_ffs = req.state_hint.empty() ? n.dff_names() : req.state_hint;
		hint_ffs.insert(hint_ffs.end(), decoys.begin(), decoys.end());
		std::optional<std::vector<std::string>> hint(std::move(hint_ffs));
		LockTargets targets = select_target_ffs(work, st, hint);
		targets.mode = target_mode(req.targets);
		out.package = lock_connectivity(work, targets, NetworkParams{req.size, req.m, req.p}, req.seed);
		out.key_bits = out.package.correct_key.size();
	} else if (req.method == "scramble-l") {
		std::vector<std::string> ffs = req.explicit_ffs;
		if (ffs.empty())
			ffs = req.state_hint.empty() ? n.dff_names() : req.state_hint;
		MemoryLockResult res = lock_memory(n, ffs, req.fsmim ? ConeTableMode::Fsmim : ConeTableMode::Full);
		int actual = (int)res.package.locked.roms.at(0).address.size();
		if (req.addr_width > 0 && actual != req.addr_width)
			throw NetlistError("requested address width " + std::to_string(req.addr_width) +
					   " but the cone table needs " + std::to_string(actual));
		out.package = res.package;
		out.key_bits = res.table.table_bits();
	} else {
		throw NetlistError("unknown lock method '" + req.method + "'");
	}
	auto rep = check_equivalence_random(n, {}, out.package.locked, out.package.correct_key,
					    req.self_check_sequences, 50, req.seed ^ 0x5eedULL);
	out.self_check = rep.equivalent;
	return out;
}

void write_lock_outputs(const LockOutcome &outcome, const std::filesystem::path &bench_path,
			const std::filesystem::path &key_path)
{
	write_bench_file(outcome.package.locked, bench_path);
	write_key_file(outcome.package, key_path);
}

std::string AttackOutcome::status() const
{
	if (method == "two-stage") {
		if (two_stage.chosen_state_ffs.empty())
			return "no-candidates";
		return two_stage.functional.determinate ? "stg-recovered" : "indeterminate";
	}
	return ubsat_status_name(ubsat.status);
}

std::string AttackOutcome::to_json() const
{
	if (method != "two-stage") {
		auto j = nlohmann::ordered_json::parse(ubsat.to_json());
		j["method"] = method;
		j["lut_model"] = used_lut_model;
		return j.dump(2);
	}
	nlohmann::ordered_json j;
	j["method"] = method;
	j["status"] = status();
	j["candidate_sets"] = two_stage.candidate_sets;
	j["chosen_state_ffs"] = two_stage.chosen_state_ffs;
	j["initial_state"] = two_stage.initial_state;
	j["states"] = two_stage.functional.stg.states.size();
	j["transitions"] = two_stage.functional.stg.transitions.size();
	j["determinate"] = two_stage.functional.determinate;
	j["stage1_ms"] = two_stage.stage1_ms;
	j["stage2_ms"] = two_stage.stage2_ms;
	return j.dump(2);
}

int AttackOutcome::exit_code() const
{
	if (method == "two-stage")
		return status() == "stg-recovered" ? 0 : 1;
	return ubsat.status == UbsatStatus::KeyFound ? 0 : 1;
}

AttackOutcome run_attack(const Netlist &locked, const Netlist &original, const AttackRequest &req)
{
	check_solver_backend();
	AttackOutcome out;
	out.method = req.method;
	auto t0 = Clock::now();
	if (req.method == "two-stage") {
		out.two_stage = two_stage_attack(locked, req.functional);
	} else if (req.method == "ubsat" || req.method == "scansat") {
		Netlist model = locked;
		while (!model.roms.empty()) {
			model = memory_as_luts(model, 0).netlist;
			out.used_lut_model = true;
		}
		Oracle oracle(original);
		out.ubsat = req.method == "scansat" ? scan_unroll_attack(model, oracle, req.ubsat)
						    : ubsat_attack(model, oracle, req.ubsat);
	} else {
		throw NetlistError("unknown attack method '" + req.method + "'");
	}
	out.wall_ms =
	    std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
	return out;
}

void ExperimentPlan::validate() const
{
	if (circuits.empty() || locks.empty())
		throw NetlistError("experiment plan needs at least one circuit and one lock");
	for (const auto &c : circuits)
		if (!std::filesystem::exists(c))
			throw NetlistError("circuit file '" + c.string() + "' does not exist");
	for (const auto &a : attacks)
		if (a.req.ubsat.time_limit.count() <= 0)
			throw NetlistError("attack '" + a.label + "' has a non-positive time limit");
	if (workers < 1)
		throw NetlistError("worker count must be positive");
}

ExperimentPlan parse_plan_json(const std::string &text, const std::filesystem::path &base_dir)
{
	auto j = nlohmann::json::parse(text);
	ExperimentPlan plan;
	for (const auto &c : j.at("circuits")) {
		std::filesystem::path p = c.get<std::string>();
		plan.circuits.push_back(p.is_absolute() ? p : base_dir / p);
	}
	plan.workers = j.value("workers", 1);
	for (const auto &l : j.at("locks")) {
		ExperimentPlan::Lock cell;
		cell.label = l.at("label");
		cell.req.method = l.at("method");
		cell.req.size = l.value("size", 2);
		cell.req.m = l.value("m", 0);
		cell.req.p = l.value("p", 1);
		cell.req.addr_width = l.value("addr_width", 0);
		cell.req.fsmim = l.value("fsmim", false);
		cell.req.targets = l.value("targets", "fsm");
		cell.req.strategy = l.value("strategy", "lsb");
		cell.req.explicit_ffs = l.value("ffs", std::vector<std::string>{});
		cell.req.state_hint = l.value("state_hint", std::vector<std::string>{});
		cell.req.seed = l.value("seed", 1);
		plan.locks.push_back(std::move(cell));
	}
	for (const auto &a : j.value("attacks", nlohmann::json::array())) {
		ExperimentPlan::Attack cell;
		cell.label = a.at("label");
		cell.req.method = a.at("method");
		cell.req.ubsat.time_limit = std::chrono::milliseconds(
		    (int64_t)(a.value("time_limit_s", 600.0) * 1000.0));
		cell.req.ubsat.initial_boundary = a.value("initial_bound", 1);
		cell.req.ubsat.boundary_step = a.value("bound_step", 1);
		cell.req.ubsat.max_bound = a.value("max_bound", 40);
		cell.req.ubsat.verify_sequences = a.value("verify_sequences", 1000);
		cell.req.ubsat.verify_cycles = a.value("verify_cycles", 50);
		plan.attacks.push_back(std::move(cell));
	}
	return plan;
}

std::string ExperimentReport::to_csv() const
{
	std::ostringstream out;
	out << "circuit,ffs,gates,method,param,attack,status,wall_ms,key_verified\n";
	for (const auto &r : rows)
		out << r.circuit << "," << r.ffs << "," << r.gates << "," << r.method << "," << r.param
		    << "," << r.attack << "," << r.status << "," << r.wall_ms << ","
		    << (r.key_verified ? "true" : "false") << "\n";
	return out.str();
}

std::string ExperimentReport::to_markdown() const
{
	std::ostringstream out;
	// Pivot per attack: circuit rows, one column per lock config.
	std::vector<std::string> attacks, params, circuits;
	for (const auto &r : rows) {
		if (std::find(attacks.begin(), attacks.end(), r.attack) == attacks.end())
			attacks.push_back(r.attack);
		if (std::find(params.begin(), params.end(), r.param) == params.end())
			params.push_back(r.param);
		if (std::find(circuits.begin(), circuits.end(), r.circuit) == circuits.end())
			circuits.push_back(r.circuit);
	}
	auto cell_text = [&](const ReportRow &r) -> std::string {
		if (r.status == "TIMEOUT")
			return "✗";
		if (r.status == "key-found") {
			char buf[32];
			snprintf(buf, sizeof buf, "%.2f s", (double)r.wall_ms / 1000.0);
			return buf;
		}
		return r.status;
	};
	for (const auto &attack : attacks) {
		out << "## " << (attack == "-" ? "lock self-check" : attack) << "\n\n| circuit |";
		for (const auto &p : params)
			out << " " << p << " |";
		out << "\n|---|";
		for (size_t i = 0; i < params.size(); ++i)
			out << "---|";
		out << "\n";
		for (const auto &c : circuits) {
			out << "| " << c << " |";
			for (const auto &p : params) {
				std::string text;
				for (const auto &r : rows)
					if (r.attack == attack && r.param == p && r.circuit == c)
						text = cell_text(r);
				out << " " << text << " |";
			}
			out << "\n";
		}
		out << "\n";
	}
	// Flat table mirroring the CSV exactly.
	out << "## all cells\n\n| circuit | ffs | gates | method | param | attack | status | wall_ms | "
	       "key_verified |\n|---|---|---|---|---|---|---|---|---|\n";
	for (const auto &r : rows)
		out << "| " << r.circuit << " | " << r.ffs << " | " << r.gates << " | " << r.method
		    << " | " << r.param << " | " << r.attack << " | " << r.status << " | " << r.wall_ms
		    << " | " << (r.key_verified ? "true" : "false") << " |\n";
	return out.str();
}

ExperimentReport run_experiments(const ExperimentPlan &plan)
{
	plan.validate();
	struct Cell {
		size_t circuit;
		size_t lock;
		int attack; // -1 = lock-only
	};
	std::vector<Cell> cells;
	for (size_t c = 0; c < plan.circuits.size(); ++c)
		for (size_t l = 0; l < plan.locks.size(); ++l) {
			if (plan.attacks.empty())
				cells.push_back({c, l, -1});
			for (int a = 0; a < (int)plan.attacks.size(); ++a)
				cells.push_back({c, l, a});
		}

	ExperimentReport report;
	report.rows.resize(cells.size());
	std::atomic<size_t> next{0};
	auto worker = [&] {
		for (;;) {
			size_t i = next.fetch_add(1);
			if (i >= cells.size())
				return;
			const Cell &cell = cells[i];
			ReportRow &row = report.rows[i];
			const auto &lock = plan.locks[cell.lock];
			row.circuit = plan.circuits[cell.circuit].stem().string();
			row.method = lock.req.method;
			row.param = lock.label;
			row.attack = cell.attack < 0 ? "-" : plan.attacks[cell.attack].label;
			auto t0 = Clock::now();
			try {
				Netlist n = read_bench_file(plan.circuits[cell.circuit]);
				row.ffs = (int)n.dffs.size();
				row.gates = (int)n.gates.size();
				LockOutcome locked = lock_circuit(n, lock.req);
				if (cell.attack < 0) {
					row.status = locked.self_check
							 ? "ok k=" + std::to_string(locked.key_bits)
							 : "self-check-failed";
				} else {
					AttackOutcome out =
					    run_attack(locked.package.locked, n, plan.attacks[cell.attack].req);
					row.status = out.status() == "timeout" ? "TIMEOUT" : out.status();
					row.key_verified = out.ubsat.key_verified;
					row.wall_ms = out.wall_ms;
				}
			} catch (const std::exception &e) {
				row.status = "error";
			}
			if (row.wall_ms == 0)
				row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
						  Clock::now() - t0)
						  .count();
		}
	};
	std::vector<std::thread> pool;
	for (int w = 1; w < plan.workers; ++w)
		pool.emplace_back(worker);
	worker();
	for (auto &t : pool)
		t.join();
	return report;
}

} // namespace lockbench
