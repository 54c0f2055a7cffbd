#pragma once

#include "lockbench/lock_package.hpp"
#include "lockbench/structure.hpp"

#include <cstdint>
#include <map>
#include <optional>

namespace lockbench {

enum class ConeTableMode { Full, Fsmim };

/// FSM input multiplexing: per reachable state, the minimal input set the
/// replaced cones depend on (verified by cofactor comparison).
struct FsmimSpec {
	std::vector<std::string> state_signals; // targeted q pins, MSB first
	std::map<uint32_t, std::vector<std::string>> per_state_inputs;
	int mux_width = 0;
	std::string address_layout;
};

/// Truth table of the fan-in cones feeding the targeted FFs. Address bit
/// order is support[0] = MSB; word bit j corresponds to targeted FF j.
struct ConeTable {
	ConeTableMode mode = ConeTableMode::Full;
	std::vector<std::string> support; // full: cone frontier; fsmim: state bits + mux lines
	std::vector<std::string> sinks;   // d-pin signals, targets order
	std::vector<std::vector<bool>> rows;
	std::optional<FsmimSpec> fsmim;

	uint64_t table_bits() const { return (uint64_t)rows.size() * sinks.size(); }
};

/// pre: full mode caps support at 20 signals; fsmim mode requires the
/// cone frontier to contain only targeted q pins and primary inputs, and
/// reachability enumeration stays under 2^20 (state, input) visits.
ConeTable extract_cone_table(const Netlist &n, const std::vector<std::string> &ffs, ConeTableMode mode);

struct MemoryLock {
	RomNode rom;
	std::vector<Gate> muxes;              // empty in full mode
	std::vector<std::vector<bool>> key;   // = rom contents, the key material
};

struct MemoryLockResult {
	LockPackage package;
	MemoryLock memory;
	ConeTable table;
};

/// SCRAMBLE-L: removes the targeted DFFs and the cone logic that only
/// they consumed, and re-drives the old q names from a one-cycle ROM
/// whose registered read replaces the FF stage (latency neutral). In
/// fsmim mode the low address bits come from current-state-driven input
/// multiplexers.
MemoryLockResult lock_memory(const Netlist &n, const std::vector<std::string> &ffs, ConeTableMode mode);

struct LutModel {
	Netlist netlist;
	std::vector<std::string> key_names;        // per data bit, address-ascending
	std::map<std::string, bool> contents_key;  // key = original contents
};

/// Attack-side model: replaces roms[rom_index] with one 2^X-to-1 MUX2
/// selector tree per data bit whose leaves are fresh key inputs, plus one
/// DFF per bit restoring the read latency. With key = contents this is
/// equivalent to the ROM.
LutModel memory_as_luts(const Netlist &n, size_t rom_index = 0, int max_addr_width = 16);

} // namespace lockbench
