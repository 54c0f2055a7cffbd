#pragma once

#include "lockbench/netlist.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lockbench {

/// Metadata describing how a lock was produced. `params` holds
/// method-specific parameters as flat key/value pairs (e.g. n/m/p for
/// SCRAMBLE-C, addr_width for SCRAMBLE-L).
struct LockMeta {
	std::string method; // "scramble-c" or "scramble-l"
	std::map<std::string, int64_t> params;
	std::string target_mode;
	std::vector<std::string> target_ffs;
	uint64_t seed = 0;
};

/// A locked netlist together with the designer key that restores the
/// original behavior. The defining contract: simulate(locked, correct_key)
/// equals simulate(original) on every input sequence.
struct LockPackage {
	Netlist locked;
	std::map<std::string, bool> correct_key;
	LockMeta meta;

	/// For SCRAMBLE-L: sidecar hex file holding the ROM contents (the
	/// real key material); empty for SCRAMBLE-C.
	std::string contents_file;
	std::string address_layout; // human-readable address bit order
};

/// Key file JSON: {method, seed, params, key: ordered name -> bit}, plus
/// contents_file/address_layout for memory locks.
void write_key_file(const LockPackage &pkg, const std::filesystem::path &path);

struct KeyFile {
	std::string method;
	uint64_t seed = 0;
	std::map<std::string, int64_t> params;
	std::map<std::string, bool> key;
	std::string contents_file;
	std::string address_layout;
};

KeyFile read_key_file(const std::filesystem::path &path);

} // namespace lockbench
