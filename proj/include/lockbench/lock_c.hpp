#pragma once

#include "lockbench/fsm.hpp"
#include "lockbench/lock_package.hpp"
#include "lockbench/switch_network.hpp"

#include <optional>

namespace lockbench {

enum class LockMode { FsmDataIn, DatapathDataIn, ScanIn };

const char *lock_mode_name(LockMode m);

/// Which wires the CRLB intercepts: the d-pins (or si-pins in scan mode)
/// of these DFFs, in port order.
struct LockTargets {
	LockMode mode = LockMode::FsmDataIn;
	std::vector<std::string> ffs; // distinct, power-of-two length
};

enum class SelectionKind { MsbState, LsbState, MixedStateDatapath, ScanWindow, Explicit };

struct SelectionStrategy {
	SelectionKind kind = SelectionKind::Explicit;
	int size = 2;
	uint64_t rng_seed = 0;
	std::vector<std::string> explicit_ffs; // for Explicit
};

/// Picks the DFFs to lock. msb-state/lsb-state need the state register
/// hint (MSB first) because bench files carry no encoding information;
/// mixed interleaves hinted state FFs with non-state FFs; scan-window
/// takes a seed-positioned window of the scan chain order.
LockTargets select_target_ffs(const Netlist &n, const SelectionStrategy &strategy,
			      const std::optional<std::vector<std::string>> &state_ffs_hint = std::nullopt);

/// Appends `count` self-loop filler DFFs (q feeds d; never observable,
/// constant under the all-zero reset) so a CRLB wider than the circuit's
/// register count has pins to land on. Returns the new q names.
std::vector<std::string> add_decoy_ffs(Netlist &n, int count, const std::string &prefix = "decoy");

struct ConnectivityOptions {
	int max_seed_retries = 64; // re-draws when the restoring permutation is unroutable
	std::string prefix = "crlb";
};

/// SCRAMBLE-C: cuts the wires feeding the targeted pins and re-drives
/// them through a synthesized CRLB. The wire-to-port assignment and a
/// pre-inversion pattern (fixed inverters on CRLB inputs) are drawn from
/// the seed; the correct key routes the restoring permutation and cancels
/// the inverters.
LockPackage lock_connectivity(const Netlist &n, const LockTargets &targets, const NetworkParams &params,
			      uint64_t seed, const ConnectivityOptions &opt = {});

struct FalseTransitionReport {
	std::set<uint32_t> extra_states;
	std::set<StgTransition> false_transitions;

	bool none() const { return extra_states.empty() && false_transitions.empty(); }
};

/// States and transitions present in the locked-under-some-key STG but
/// absent from the original.
FalseTransitionReport count_false_transitions(const Stg &original, const Stg &locked_under_key);

} // namespace lockbench
