#include "lockbench/bench.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lockbench {

namespace {

std::string trim(const std::string &s)
{
	size_t a = s.find_first_not_of(" \t\r\n");
	if (a == std::string::npos)
		return "";
	size_t b = s.find_last_not_of(" \t\r\n");
	return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string &s, int line)
{
	std::vector<std::string> out;
	std::string cur;
	for (char c : s) {
		if (c == ',') {
			cur = trim(cur);
			if (cur.empty())
				throw BenchError(line, "empty name in list");
			out.push_back(cur);
			cur.clear();
		} else {
			cur.push_back(c);
		}
	}
	cur = trim(cur);
	if (cur.empty())
		throw BenchError(line, "empty name in list");
	out.push_back(cur);
	return out;
}

} // namespace

std::vector<std::vector<bool>> rom_contents_from_hex(const std::string &text, int addr_width,
						     int data_width)
{
	std::vector<std::vector<bool>> contents;
	std::istringstream in(text);
	std::string line;
	size_t rows = size_t(1) << addr_width;
	int hex_digits = (data_width + 3) / 4;
	while (std::getline(in, line)) {
		line = trim(line);
		if (line.empty() || line[0] == '#')
			continue;
		if ((int)line.size() != hex_digits)
			throw NetlistError("ROM hex word '" + line + "' has wrong width");
		uint64_t word = std::stoull(line, nullptr, 16);
		std::vector<bool> bits(data_width);
		// Word is big-endian over data signals: data[0] is the MSB.
		for (int b = 0; b < data_width; ++b)
			bits[b] = (word >> (data_width - 1 - b)) & 1;
		contents.push_back(bits);
	}
	if (contents.size() != rows)
		throw NetlistError("ROM hex has " + std::to_string(contents.size()) + " words, expected " +
				   std::to_string(rows));
	return contents;
}

std::string rom_contents_to_hex(const RomNode &rom)
{
	std::ostringstream out;
	int data_width = (int)rom.data.size();
	int hex_digits = (data_width + 3) / 4;
	for (const auto &word : rom.contents) {
		uint64_t w = 0;
		for (int b = 0; b < data_width; ++b)
			if (word[b])
				w |= uint64_t(1) << (data_width - 1 - b);
		char buf[32];
		std::snprintf(buf, sizeof buf, "%0*llx", hex_digits, (unsigned long long)w);
		out << buf << "\n";
	}
	return out.str();
}

Netlist parse_bench(const std::string &text, const std::string &name, const std::filesystem::path &dir)
{
	Netlist n;
	n.name = name;
	std::set<std::string> key_marks;
	std::map<std::string, ScanPins> scan_marks;
	std::map<std::string, int> def_line;                     // signal -> defining line
	std::vector<std::pair<std::string, int>> refs;           // (signal, referencing line)
	auto define = [&](const std::string &sig, int line) {
		auto [it, fresh] = def_line.emplace(sig, line);
		if (!fresh)
			throw BenchError(line, "duplicate driver for signal '" + sig + "' (first defined at line " +
						       std::to_string(it->second) + ")");
	};

	std::istringstream in(text);
	std::string raw;
	int lineno = 0;
	while (std::getline(in, raw)) {
		++lineno;
		std::string line = trim(raw);
		if (line.empty())
			continue;
		if (line[0] == '#') {
			std::istringstream cs(line.substr(1));
			std::string tag;
			cs >> tag;
			if (tag == "KEYINPUT") {
				std::string sig;
				while (cs >> sig)
					key_marks.insert(sig);
			} else if (tag == "SCAN") {
				std::string q, si, se;
				if (!(cs >> q >> si >> se))
					throw BenchError(lineno, "malformed SCAN tag");
				scan_marks[q] = ScanPins{si, se};
			}
			continue;
		}
		auto lp = line.find('(');
		auto eq = line.find('=');
		if (eq == std::string::npos) {
			// INPUT(x) or OUTPUT(y)
			auto rp = line.rfind(')');
			if (lp == std::string::npos || rp == std::string::npos || rp < lp)
				throw BenchError(lineno, "malformed line: " + line);
			std::string kw = trim(line.substr(0, lp));
			std::string arg = trim(line.substr(lp + 1, rp - lp - 1));
			if (arg.empty())
				throw BenchError(lineno, "empty signal name");
			std::transform(kw.begin(), kw.end(), kw.begin(), ::toupper);
			if (kw == "INPUT") {
				define(arg, lineno);
				n.inputs.push_back(arg);
			} else if (kw == "OUTPUT") {
				refs.emplace_back(arg, lineno);
				n.outputs.push_back(arg);
			} else
				throw BenchError(lineno, "unknown declaration '" + kw + "'");
			continue;
		}
		// lhs = KIND(args) [@file]
		std::string lhs = trim(line.substr(0, eq));
		std::string rhs = trim(line.substr(eq + 1));
		lp = rhs.find('(');
		auto rp = rhs.rfind(')');
		if (lp == std::string::npos || rp == std::string::npos || rp < lp)
			throw BenchError(lineno, "malformed assignment: " + line);
		std::string kind_s = trim(rhs.substr(0, lp));
		std::string args_s = trim(rhs.substr(lp + 1, rp - lp - 1));
		std::string tail = trim(rhs.substr(rp + 1));
		std::string kind_up = kind_s;
		std::transform(kind_up.begin(), kind_up.end(), kind_up.begin(), ::toupper);
		if (kind_up == "ROM") {
			if (tail.empty() || tail[0] != '@')
				throw BenchError(lineno, "ROM line needs @<hexfile>");
			RomNode rom;
			rom.data = split_commas(lhs, lineno);
			rom.address = split_commas(args_s, lineno);
			rom.contents_file = trim(tail.substr(1));
			std::ifstream hex(dir / rom.contents_file);
			if (!hex)
				throw BenchError(lineno, "cannot open ROM hex file '" + rom.contents_file + "'");
			std::stringstream buf;
			buf << hex.rdbuf();
			rom.contents = rom_contents_from_hex(buf.str(), (int)rom.address.size(),
							     (int)rom.data.size());
			for (const auto &s : rom.data)
				define(s, lineno);
			for (const auto &s : rom.address)
				refs.emplace_back(s, lineno);
			n.roms.push_back(std::move(rom));
			continue;
		}
		if (!tail.empty())
			throw BenchError(lineno, "trailing text: " + tail);
		if (kind_up == "DFF") {
			auto args = split_commas(args_s, lineno);
			if (args.size() != 1)
				throw BenchError(lineno, "DFF takes exactly one input");
			define(lhs, lineno);
			refs.emplace_back(args[0], lineno);
			n.dffs.push_back(Dff{args[0], lhs, std::nullopt});
			continue;
		}
		auto kind = gate_kind_from_name(kind_s);
		if (!kind)
			throw BenchError(lineno, "unknown gate kind '" + kind_s + "'");
		Gate g;
		g.kind = *kind;
		g.inputs = split_commas(args_s, lineno);
		g.output = lhs;
		define(lhs, lineno);
		for (const auto &i : g.inputs)
			refs.emplace_back(i, lineno);
		int lo = gate_min_arity(g.kind), hi = gate_max_arity(g.kind);
		if ((int)g.inputs.size() < lo || (hi >= 0 && (int)g.inputs.size() > hi))
			throw BenchError(lineno, std::string("bad arity for ") + gate_kind_name(g.kind));
		n.gates.push_back(std::move(g));
	}

	// Apply key marks: keys stay INPUT lines in the file but live in
	// key_inputs in the IR.
	std::vector<std::string> plain;
	for (const auto &i : n.inputs) {
		if (key_marks.count(i)) {
			n.key_inputs.push_back(i);
			key_marks.erase(i);
		} else {
			plain.push_back(i);
		}
	}
	if (!key_marks.empty())
		throw BenchError(0, "KEYINPUT tag for undeclared input '" + *key_marks.begin() + "'");
	n.inputs = std::move(plain);
	for (auto &f : n.dffs) {
		auto it = scan_marks.find(f.q);
		if (it != scan_marks.end()) {
			f.scan = it->second;
			scan_marks.erase(it);
		}
	}
	if (!scan_marks.empty())
		throw BenchError(0, "SCAN tag for unknown DFF '" + scan_marks.begin()->first + "'");

	for (const auto &[sig, line] : refs)
		if (!def_line.count(sig))
			throw BenchError(line, "undefined signal '" + sig + "'");

	try {
		n.validate();
	} catch (const NetlistError &e) {
		// Map combinational-cycle reports back to a source line.
		std::string msg = e.what();
		int line = 0;
		auto q1 = msg.find('\''), q2 = msg.rfind('\'');
		if (q1 != std::string::npos && q2 > q1) {
			auto it = def_line.find(msg.substr(q1 + 1, q2 - q1 - 1));
			if (it != def_line.end())
				line = it->second;
		}
		throw BenchError(line, msg);
	}
	return n;
}

Netlist read_bench_file(const std::filesystem::path &path)
{
	std::ifstream in(path);
	if (!in)
		throw NetlistError("cannot open '" + path.string() + "'");
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_bench(buf.str(), path.stem().string(), path.parent_path().empty() ? "." : path.parent_path());
}

std::string write_bench(const Netlist &n, const BenchWriteOptions &opt)
{
	if (!n.roms.empty() && !opt.extended)
		throw NetlistError("netlist has ROM nodes; bench output requires the extended format");
	std::ostringstream out;
	if (!n.name.empty())
		out << "# " << n.name << "\n";
	for (const auto &i : n.inputs)
		out << "INPUT(" << i << ")\n";
	for (const auto &k : n.key_inputs)
		out << "INPUT(" << k << ")\n";
	if (!n.key_inputs.empty()) {
		for (const auto &k : n.key_inputs)
			out << "# KEYINPUT " << k << "\n";
	}
	for (const auto &o : n.outputs)
		out << "OUTPUT(" << o << ")\n";
	for (const auto &f : n.dffs) {
		out << f.q << " = DFF(" << f.d << ")\n";
		if (f.scan)
			out << "# SCAN " << f.q << " " << f.scan->si << " " << f.scan->se << "\n";
	}
	for (size_t ri = 0; ri < n.roms.size(); ++ri) {
		const RomNode &r = n.roms[ri];
		std::string file = r.contents_file;
		if (file.empty())
			file = (n.name.empty() ? std::string("rom") : n.name) + "_rom" + std::to_string(ri) + ".hex";
		for (size_t b = 0; b < r.data.size(); ++b)
			out << r.data[b] << (b + 1 < r.data.size() ? "," : "");
		out << " = ROM(";
		for (size_t a = 0; a < r.address.size(); ++a)
			out << r.address[a] << (a + 1 < r.address.size() ? "," : "");
		out << ") @" << file << "\n";
		std::ofstream hex(opt.dir / file);
		hex << rom_contents_to_hex(r);
	}
	for (const auto &g : n.gates) {
		out << g.output << " = " << gate_kind_name(g.kind) << "(";
		for (size_t i = 0; i < g.inputs.size(); ++i)
			out << g.inputs[i] << (i + 1 < g.inputs.size() ? ", " : "");
		out << ")\n";
	}
	return out.str();
}

void write_bench_file(const Netlist &n, const std::filesystem::path &path)
{
	BenchWriteOptions opt;
	opt.extended = true;
	opt.dir = path.parent_path().empty() ? "." : path.parent_path();
	std::string text = write_bench(n, opt);
	std::ofstream out(path);
	if (!out)
		throw NetlistError("cannot write '" + path.string() + "'");
	out << text;
}

bool structurally_equal(const Netlist &a, const Netlist &b)
{
	if (a.inputs != b.inputs || a.outputs != b.outputs || a.key_inputs != b.key_inputs)
		return false;
	auto gate_key = [](const Gate &g) {
		std::string k = g.output + "=" + gate_kind_name(g.kind) + "(";
		for (const auto &i : g.inputs)
			k += i + ",";
		return k + ")";
	};
	std::multiset<std::string> ga, gb;
	for (const auto &g : a.gates)
		ga.insert(gate_key(g));
	for (const auto &g : b.gates)
		gb.insert(gate_key(g));
	if (ga != gb)
		return false;
	auto dff_key = [](const Dff &f) {
		std::string k = f.q + "=DFF(" + f.d + ")";
		if (f.scan)
			k += "[" + f.scan->si + "," + f.scan->se + "]";
		return k;
	};
	std::multiset<std::string> da, db;
	for (const auto &f : a.dffs)
		da.insert(dff_key(f));
	for (const auto &f : b.dffs)
		db.insert(dff_key(f));
	if (da != db)
		return false;
	auto rom_key = [](const RomNode &r) {
		std::string k;
		for (const auto &s : r.data)
			k += s + ",";
		k += "=ROM(";
		for (const auto &s : r.address)
			k += s + ",";
		k += ")";
		for (const auto &w : r.contents)
			for (bool bit : w)
				k += bit ? '1' : '0';
		return k;
	};
	std::multiset<std::string> ra, rb;
	for (const auto &r : a.roms)
		ra.insert(rom_key(r));
	for (const auto &r : b.roms)
		rb.insert(rom_key(r));
	return ra == rb;
}

} // namespace lockbench
