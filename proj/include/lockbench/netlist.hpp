#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lockbench {

enum class GateKind { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Mux2 };

const char *gate_kind_name(GateKind k);
std::optional<GateKind> gate_kind_from_name(const std::string &name);

/// Combinational gate. MUX2 takes (select, a, b) and yields a when the
/// select is 0, b when it is 1.
struct Gate {
	GateKind kind = GateKind::Buf;
	std::vector<std::string> inputs;
	std::string output;
};

struct ScanPins {
	std::string si; // scan-in source signal
	std::string se; // scan-enable signal
};

/// D flip-flop. When scan pins are present the effective next state is
/// se ? si : d.
struct Dff {
	std::string d;
	std::string q;
	std::optional<ScanPins> scan;
};

/// One-cycle-read memory. contents[addr] is the stored word, one bool per
/// data bit, data[0] first.
struct RomNode {
	std::vector<std::string> address;
	std::vector<std::string> data;
	std::vector<std::vector<bool>> contents;
	std::string contents_file; // sidecar hex path, used by bench I/O
};

struct NetlistError : std::runtime_error {
	explicit NetlistError(const std::string &msg) : std::runtime_error(msg) {}
};

/// What drives a signal.
enum class DriverKind { PrimaryInput, KeyInput, GateOutput, DffOutput, RomData };

struct Driver {
	DriverKind kind;
	int index;    // index into the corresponding vector
	int bit = -1; // data bit for RomData
};

/// Gate-level netlist IR. Immutable by convention once validated; locking
/// passes build modified copies.
struct Netlist {
	std::string name;
	std::vector<std::string> inputs;     // primary inputs, file order
	std::vector<std::string> outputs;    // primary outputs, file order
	std::vector<std::string> key_inputs; // locking key inputs, file order
	std::vector<Gate> gates;
	std::vector<Dff> dffs;
	std::vector<RomNode> roms;

	/// Checks the structural invariants: unique drivers, all referenced
	/// signals defined, gate arities, acyclic combinational subgraph.
	/// Throws NetlistError on the first violation.
	void validate() const;

	/// Driver map over all defined signals. Throws on duplicate drivers.
	std::unordered_map<std::string, Driver> driver_map() const;

	bool has_signal(const std::string &name) const;
	bool is_scan_stitched() const;

	std::vector<std::string> dff_names() const;
};

/// Copy with every key input replaced by a constant driver (the key bits
/// become part of the logic). The result has no key inputs.
Netlist substitute_key(const Netlist &n, const std::map<std::string, bool> &key);

int gate_min_arity(GateKind k);
int gate_max_arity(GateKind k); // -1 = unbounded

/// Evaluates one gate on concrete input values.
bool eval_gate(GateKind kind, const std::vector<bool> &in);

} // namespace lockbench
