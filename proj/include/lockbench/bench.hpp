#pragma once

#include "lockbench/netlist.hpp"

#include <filesystem>
#include <string>

namespace lockbench {

struct BenchError : std::runtime_error {
	int line;
	BenchError(int line_, const std::string &msg)
	    : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_)
	{
	}
};

/// Parses ISCAS-89 bench text. Extensions over classic bench:
///   # KEYINPUT <name>            marks a previously declared INPUT as key
///   # SCAN <q> <si> <se>         marks a DFF as scan-stitched
///   y0,y1 = ROM(a0,a1) @file.hex one-cycle memory, contents in a sidecar
/// ROM sidecars are resolved relative to `dir` (hex, one word per line,
/// address-ascending, big-endian over the data signals).
Netlist parse_bench(const std::string &text, const std::string &name = "",
		    const std::filesystem::path &dir = ".");

Netlist read_bench_file(const std::filesystem::path &path);

struct BenchWriteOptions {
	bool extended = false; // allow ROM lines + sidecar
	std::filesystem::path dir = ".";
};

std::string write_bench(const Netlist &n, const BenchWriteOptions &opt = {});
void write_bench_file(const Netlist &n, const std::filesystem::path &path);

std::string rom_contents_to_hex(const RomNode &rom);
std::vector<std::vector<bool>> rom_contents_from_hex(const std::string &text, int addr_width,
						     int data_width);

/// Structural equality up to ordering of gate/DFF lists. Signal names and
/// connectivity must match exactly.
bool structurally_equal(const Netlist &a, const Netlist &b);

} // namespace lockbench
