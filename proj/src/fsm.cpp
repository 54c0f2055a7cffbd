#include "lockbench/fsm.hpp"

#include "lockbench/sim.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace lockbench {

bool Stg::is_deterministic() const
{
	const StgTransition *prev = nullptr;
	for (const auto &t : transitions) {
		if (prev && prev->state == t.state && prev->input == t.input)
			return false; // set order groups (state, input) pairs
		prev = &t;
	}
	return true;
}

void Stg::validate() const
{
	if (!states.count(initial))
		throw NetlistError("STG initial state not in state set");
	for (const auto &t : transitions) {
		if (!states.count(t.state) || !states.count(t.next))
			throw NetlistError("STG transition references unknown state");
	}
	if (!is_deterministic())
		throw NetlistError("STG is nondeterministic");
}

bool stg_equal(const Stg &a, const Stg &b)
{
	return a.state_width == b.state_width && a.input_width == b.input_width &&
	       a.output_width == b.output_width && a.initial == b.initial && a.states == b.states &&
	       a.transitions == b.transitions;
}

StgDiff stg_diff(const Stg &a, const Stg &b)
{
	if (a.state_width != b.state_width)
		throw NetlistError("STG width mismatch");
	StgDiff d;
	for (uint32_t s : b.states)
		if (!a.states.count(s))
			d.extra_states.insert(s);
	std::set_difference(a.transitions.begin(), a.transitions.end(), b.transitions.begin(),
			    b.transitions.end(), std::inserter(d.missing_transitions, d.missing_transitions.end()));
	std::set_difference(b.transitions.begin(), b.transitions.end(), a.transitions.begin(),
			    a.transitions.end(), std::inserter(d.false_transitions, d.false_transitions.end()));
	return d;
}

std::string stg_to_dot(const Stg &stg)
{
	std::ostringstream out;
	out << "digraph stg {\n  rankdir=LR;\n";
	for (uint32_t s : stg.states) {
		out << "  s" << s << " [label=\"" << s << "\"";
		if (s == stg.initial)
			out << ", shape=doublecircle";
		out << "];\n";
	}
	// Merge parallel edges into one label listing the inputs.
	std::map<std::pair<uint32_t, uint32_t>, std::vector<uint32_t>> edges;
	for (const auto &t : stg.transitions)
		edges[{t.state, t.next}].push_back(t.input);
	for (const auto &[e, ins] : edges) {
		out << "  s" << e.first << " -> s" << e.second << " [label=\"";
		size_t show = std::min<size_t>(ins.size(), 4);
		for (size_t i = 0; i < show; ++i)
			out << ins[i] << (i + 1 < show ? "," : "");
		if (ins.size() > show)
			out << ",...";
		out << "\"];\n";
	}
	out << "}\n";
	return out.str();
}

void FsmSpec::validate() const
{
	if (state_names.empty())
		throw NetlistError("FSM has no states");
	if (inputs.size() > 16)
		throw NetlistError("FSM input count above the explicit-enumeration cap");
	std::set<uint32_t> codes;
	for (const auto &s : state_names) {
		auto it = encoding.find(s);
		if (it == encoding.end())
			throw NetlistError("state '" + s + "' has no encoding");
		if (state_width < 32 && it->second >= (uint32_t(1) << state_width))
			throw NetlistError("state code out of range for width");
		if (!codes.insert(it->second).second)
			throw NetlistError("encoding is not injective");
	}
	if (!encoding.count(initial))
		throw NetlistError("initial state '" + initial + "' unknown");
	size_t ni = inputs.size();
	for (const auto &t : transitions) {
		if (!encoding.count(t.from) || !encoding.count(t.to))
			throw NetlistError("transition references unknown state");
		if (t.input_cube.size() != ni)
			throw NetlistError("input cube width mismatch");
		if (t.output_bits.size() != outputs.size())
			throw NetlistError("output bits width mismatch");
		for (char c : t.input_cube)
			if (c != '0' && c != '1' && c != '-')
				throw NetlistError("bad cube character");
		for (char c : t.output_bits)
			if (c != '0' && c != '1')
				throw NetlistError("bad output bit");
	}
	// Completeness and determinism per (state, concrete input).
	for (const auto &s : state_names) {
		for (uint32_t pat = 0; pat < (uint32_t(1) << ni); ++pat) {
			int matches = 0;
			for (const auto &t : transitions) {
				if (t.from != s)
					continue;
				bool hit = true;
				for (size_t i = 0; i < ni && hit; ++i) {
					char c = t.input_cube[i];
					if (c != '-' && (c == '1') != (bool)((pat >> i) & 1))
						hit = false;
				}
				if (hit)
					++matches;
			}
			if (matches == 0)
				throw NetlistError("FSM incomplete: state '" + s + "' lacks a transition for input " +
						   std::to_string(pat));
			if (matches > 1)
				throw NetlistError("FSM nondeterministic at state '" + s + "' input " +
						   std::to_string(pat));
		}
	}
}

Stg FsmSpec::to_stg() const
{
	validate();
	Stg stg;
	stg.state_width = state_width;
	stg.input_width = (int)inputs.size();
	stg.output_width = (int)outputs.size();
	stg.input_names = inputs;
	stg.output_names = outputs;
	stg.initial = encoding.at(initial);
	std::deque<std::string> queue{initial};
	std::set<std::string> seen{initial};
	std::map<uint32_t, std::string> by_code;
	for (const auto &[n, c] : encoding)
		by_code[c] = n;
	while (!queue.empty()) {
		std::string s = queue.front();
		queue.pop_front();
		stg.states.insert(encoding.at(s));
		for (uint32_t pat = 0; pat < (uint32_t(1) << inputs.size()); ++pat) {
			for (const auto &t : transitions) {
				if (t.from != s)
					continue;
				bool hit = true;
				for (size_t i = 0; i < inputs.size() && hit; ++i) {
					char c = t.input_cube[i];
					if (c != '-' && (c == '1') != (bool)((pat >> i) & 1))
						hit = false;
				}
				if (!hit)
					continue;
				uint32_t outv = 0;
				for (size_t o = 0; o < outputs.size(); ++o)
					if (t.output_bits[o] == '1')
						outv |= uint32_t(1) << o;
				stg.transitions.insert({encoding.at(s), pat, encoding.at(t.to), outv});
				if (seen.insert(t.to).second)
					queue.push_back(t.to);
				break;
			}
		}
	}
	return stg;
}

FsmSpec parse_fsm_spec(const std::string &text)
{
	FsmSpec spec;
	std::istringstream in(text);
	std::string line;
	std::string enc_mode = "binary";
	std::vector<std::pair<std::string, std::string>> raw_states; // (name, code-or-empty)
	int lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		auto h = line.find('#');
		if (h != std::string::npos)
			line = line.substr(0, h);
		std::istringstream ls(line);
		std::string kw;
		if (!(ls >> kw))
			continue;
		if (kw == "inputs") {
			std::string s;
			while (ls >> s)
				spec.inputs.push_back(s);
		} else if (kw == "outputs") {
			std::string s;
			while (ls >> s)
				spec.outputs.push_back(s);
		} else if (kw == "encoding") {
			ls >> enc_mode;
		} else if (kw == "state") {
			std::string name, code;
			ls >> name;
			ls >> code;
			raw_states.emplace_back(name, code);
		} else if (kw == "initial") {
			ls >> spec.initial;
		} else if (kw == "trans") {
			FsmSpec::Transition t;
			if (!(ls >> t.from >> t.input_cube >> t.to >> t.output_bits))
				throw NetlistError("fsm spec line " + std::to_string(lineno) + ": malformed trans");
			if (spec.inputs.empty() && t.input_cube == ".")
				t.input_cube = "";
			if (spec.outputs.empty() && t.output_bits == ".")
				t.output_bits = "";
			spec.transitions.push_back(t);
		} else {
			throw NetlistError("fsm spec line " + std::to_string(lineno) + ": unknown keyword '" + kw +
					   "'");
		}
	}
	for (auto &[name, code] : raw_states)
		spec.state_names.push_back(name);
	size_t ns = spec.state_names.size();
	if (enc_mode == "binary") {
		spec.state_width = 1;
		while ((size_t(1) << spec.state_width) < ns)
			++spec.state_width;
		for (size_t i = 0; i < ns; ++i)
			spec.encoding[spec.state_names[i]] = (uint32_t)i;
	} else if (enc_mode == "onehot") {
		spec.state_width = (int)ns;
		for (size_t i = 0; i < ns; ++i)
			spec.encoding[spec.state_names[i]] = uint32_t(1) << i;
	} else if (enc_mode == "explicit") {
		int width = 0;
		for (auto &[name, code] : raw_states) {
			if (code.empty())
				throw NetlistError("explicit encoding requires a code for state '" + name + "'");
			width = std::max(width, (int)code.size());
			uint32_t v = 0;
			for (char c : code) {
				if (c != '0' && c != '1')
					throw NetlistError("bad state code '" + code + "'");
				v = (v << 1) | (c == '1');
			}
			spec.encoding[name] = v;
		}
		spec.state_width = width;
	} else {
		throw NetlistError("unknown encoding mode '" + enc_mode + "'");
	}
	spec.validate();
	return spec;
}

std::string write_fsm_spec(const FsmSpec &spec)
{
	std::ostringstream out;
	out << "inputs";
	for (const auto &s : spec.inputs)
		out << " " << s;
	out << "\noutputs";
	for (const auto &s : spec.outputs)
		out << " " << s;
	out << "\nencoding explicit\n";
	for (const auto &s : spec.state_names) {
		out << "state " << s << " ";
		uint32_t c = spec.encoding.at(s);
		for (int b = spec.state_width - 1; b >= 0; --b)
			out << ((c >> b) & 1);
		out << "\n";
	}
	out << "initial " << spec.initial << "\n";
	for (const auto &t : spec.transitions)
		out << "trans " << t.from << " " << (t.input_cube.empty() ? "." : t.input_cube) << " " << t.to
		    << " " << (t.output_bits.empty() ? "." : t.output_bits) << "\n";
	return out.str();
}

SynthesizedFsm synthesize_fsm(const FsmSpec &spec, const std::string &prefix)
{
	spec.validate();
	SynthesizedFsm out;
	Netlist &n = out.netlist;
	n.name = prefix;
	int w = spec.state_width;
	n.inputs = spec.inputs;
	n.outputs = spec.outputs;
	std::vector<std::string> q(w), d(w);
	for (int i = 0; i < w; ++i) {
		q[i] = prefix + "_q" + std::to_string(i); // q0 is the MSB
		d[i] = prefix + "_d" + std::to_string(i);
		out.state_ffs.push_back(q[i]);
	}
	int aux = 0;
	auto fresh = [&] { return prefix + "_t" + std::to_string(aux++); };
	std::map<std::string, std::string> negated; // signal -> NOT signal
	auto lit = [&](const std::string &sig, bool positive) {
		if (positive)
			return sig;
		auto it = negated.find(sig);
		if (it != negated.end())
			return it->second;
		std::string o = fresh();
		n.gates.push_back(Gate{GateKind::Not, {sig}, o});
		negated[sig] = o;
		return o;
	};
	// Constant zero for bits with no active terms.
	std::string const0 = prefix + "_zero";
	n.gates.push_back(Gate{GateKind::Xor, {q[0], q[0]}, const0});

	// One product term per transition, shared across all sinks.
	std::vector<std::string> term(spec.transitions.size());
	for (size_t t = 0; t < spec.transitions.size(); ++t) {
		const auto &tr = spec.transitions[t];
		uint32_t from = spec.encoding.at(tr.from);
		std::vector<std::string> lits;
		for (int b = 0; b < w; ++b)
			lits.push_back(lit(q[b], (from >> (w - 1 - b)) & 1));
		for (size_t i = 0; i < spec.inputs.size(); ++i)
			if (tr.input_cube[i] != '-')
				lits.push_back(lit(spec.inputs[i], tr.input_cube[i] == '1'));
		std::string o = fresh();
		if (lits.size() == 1)
			n.gates.push_back(Gate{GateKind::Buf, lits, o});
		else
			n.gates.push_back(Gate{GateKind::And, lits, o});
		term[t] = o;
	}
	auto sum = [&](const std::vector<std::string> &terms, const std::string &sink) {
		if (terms.empty())
			n.gates.push_back(Gate{GateKind::Buf, {const0}, sink});
		else if (terms.size() == 1)
			n.gates.push_back(Gate{GateKind::Buf, terms, sink});
		else
			n.gates.push_back(Gate{GateKind::Or, terms, sink});
	};
	for (int b = 0; b < w; ++b) {
		std::vector<std::string> terms;
		for (size_t t = 0; t < spec.transitions.size(); ++t)
			if ((spec.encoding.at(spec.transitions[t].to) >> (w - 1 - b)) & 1)
				terms.push_back(term[t]);
		sum(terms, d[b]);
		n.dffs.push_back(Dff{d[b], q[b], std::nullopt});
	}
	for (size_t o = 0; o < spec.outputs.size(); ++o) {
		std::vector<std::string> terms;
		for (size_t t = 0; t < spec.transitions.size(); ++t)
			if (spec.transitions[t].output_bits[o] == '1')
				terms.push_back(term[t]);
		sum(terms, spec.outputs[o]);
	}
	// The synthesized FSM assumes the initial state encodes to all-zero,
	// matching the all-zero reset convention; callers wanting another
	// initial code handle it at extraction time.
	n.validate();
	return out;
}

Stg extract_stg_explicit(const Netlist &n, const std::vector<std::string> &state_ffs, uint32_t initial)
{
	if (!n.key_inputs.empty())
		throw NetlistError("explicit STG extraction requires a keyless netlist");
	if (!n.roms.empty())
		throw NetlistError("explicit STG extraction does not support ROM nodes");
	if (n.inputs.size() > 16)
		throw NetlistError("too many inputs for explicit STG extraction");
	if (state_ffs.size() != n.dffs.size())
		throw NetlistError("netlist has non-state DFFs; explicit extraction is for pure FSMs");
	int w = (int)state_ffs.size();
	std::vector<int> ff_index(w);
	for (int i = 0; i < w; ++i) {
		int found = -1;
		for (int d = 0; d < (int)n.dffs.size(); ++d)
			if (n.dffs[d].q == state_ffs[i])
				found = d;
		if (found < 0)
			throw NetlistError("state FF '" + state_ffs[i] + "' not found");
		ff_index[i] = found;
	}
	Simulator sim(n);
	Stg stg;
	stg.state_width = w;
	stg.input_width = (int)n.inputs.size();
	stg.output_width = (int)n.outputs.size();
	stg.input_names = n.inputs;
	stg.output_names = n.outputs;
	stg.initial = initial;
	std::deque<uint32_t> queue{initial};
	stg.states.insert(initial);
	while (!queue.empty()) {
		uint32_t code = queue.front();
		queue.pop_front();
		for (uint32_t pat = 0; pat < (uint32_t(1) << n.inputs.size()); ++pat) {
			SimState st = SimState::all_zero(n);
			for (int i = 0; i < w; ++i)
				st.dff_values[ff_index[i]] = (code >> (w - 1 - i)) & 1;
			InputVector in(n.inputs.size());
			for (size_t i = 0; i < in.size(); ++i)
				in[i] = (pat >> i) & 1;
			auto outs = sim.step(st, in);
			uint32_t outv = 0;
			for (size_t o = 0; o < outs.size(); ++o)
				if (outs[o])
					outv |= uint32_t(1) << o;
			uint32_t next = 0;
			for (int i = 0; i < w; ++i)
				if (st.dff_values[ff_index[i]])
					next |= uint32_t(1) << (w - 1 - i);
			stg.transitions.insert({code, pat, next, outv});
			if (stg.states.insert(next).second)
				queue.push_back(next);
		}
	}
	stg.validate();
	return stg;
}

} // namespace lockbench
