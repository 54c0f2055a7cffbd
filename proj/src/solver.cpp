#include "lockbench/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lockbench {

namespace {

// Internal literal encoding: variable v (0-based) -> 2v (positive) or
// 2v+1 (negative).
inline int ilit(Lit l)
{
	int v = std::abs(l) - 1;
	return 2 * v + (l < 0 ? 1 : 0);
}

inline int ineg(int p) { return p ^ 1; }
inline int ivar(int p) { return p >> 1; }

constexpr int8_t kUndef = -1;

struct Clause {
	std::vector<int> lits;
	double activity = 0.0;
	bool learnt = false;
	bool deleted = false;
};

struct Watcher {
	int clause;
	int blocker;
};

uint64_t luby(uint64_t i)
{
	// Luby sequence: 1,1,2,1,1,2,4,...
	uint64_t k = 1;
	while ((uint64_t(1) << k) - 1 < i + 1)
		++k;
	while ((uint64_t(1) << k) - 1 != i + 1) {
		--k;
		i -= (uint64_t(1) << k) - 1;
	}
	return uint64_t(1) << (k - 1);
}

} // namespace

struct Solver::Impl {
	std::vector<Clause> clauses;
	std::vector<std::vector<Watcher>> watches; // indexed by internal lit
	std::vector<int8_t> assign;                // per var: kUndef / 0 / 1
	std::vector<int> level;
	std::vector<int> reason; // clause index or -1
	std::vector<int> trail;
	std::vector<int> trail_lim;
	size_t qhead = 0;

	std::vector<double> activity;
	double var_inc = 1.0;
	static constexpr double kVarDecay = 1.0 / 0.95;
	double cla_inc = 1.0;
	static constexpr double kClaDecay = 1.0 / 0.999;
	std::vector<int8_t> phase;
	std::vector<int> heap; // lazy max-heap of vars by activity
	std::vector<char> in_heap;

	std::vector<int8_t> model;
	bool root_unsat = false;
	uint64_t conflicts = 0;
	uint64_t learnt_count = 0;
	uint64_t clause_count = 0;
	double max_learnts = 1000;

	std::vector<char> seen;

	int nvars() const { return (int)assign.size(); }

	void grow_to(int n)
	{
		while (nvars() < n) {
			assign.push_back(kUndef);
			level.push_back(0);
			reason.push_back(-1);
			activity.push_back(0.0);
			phase.push_back(0);
			seen.push_back(0);
			watches.emplace_back();
			watches.emplace_back();
			heap_insert(nvars() - 1);
		}
	}

	// --- order heap (binary max-heap keyed by activity, lazy removal) ---
	void heap_insert(int v)
	{
		heap.push_back(v);
		size_t i = heap.size() - 1;
		while (i > 0) {
			size_t p = (i - 1) / 2;
			if (activity[heap[p]] >= activity[heap[i]])
				break;
			std::swap(heap[p], heap[i]);
			i = p;
		}
	}

	int heap_pop()
	{
		while (!heap.empty()) {
			int v = heap[0];
			heap[0] = heap.back();
			heap.pop_back();
			if (!heap.empty())
				sift_down(0);
			if (assign[v] == kUndef)
				return v;
		}
		return -1;
	}

	void sift_down(size_t i)
	{
		for (;;) {
			size_t l = 2 * i + 1, r = 2 * i + 2, best = i;
			if (l < heap.size() && activity[heap[l]] > activity[heap[best]])
				best = l;
			if (r < heap.size() && activity[heap[r]] > activity[heap[best]])
				best = r;
			if (best == i)
				return;
			std::swap(heap[i], heap[best]);
			i = best;
		}
	}

	void bump_var(int v)
	{
		activity[v] += var_inc;
		if (activity[v] > 1e100) {
			for (auto &a : activity)
				a *= 1e-100;
			var_inc *= 1e-100;
		}
		heap_insert(v); // lazy: duplicates tolerated
	}

	void bump_clause(Clause &c)
	{
		c.activity += cla_inc;
		if (c.activity > 1e20) {
			for (auto &cl : clauses)
				if (cl.learnt)
					cl.activity *= 1e-20;
			cla_inc *= 1e-20;
		}
	}

	// --- assignment ---
	int8_t value(int p) const
	{
		int8_t a = assign[ivar(p)];
		if (a == kUndef)
			return kUndef;
		return (p & 1) ? (int8_t)(1 - a) : a;
	}

	int decision_level() const { return (int)trail_lim.size(); }

	void enqueue(int p, int from)
	{
		int v = ivar(p);
		assign[v] = (p & 1) ? 0 : 1;
		level[v] = decision_level();
		reason[v] = from;
		trail.push_back(p);
	}

	void new_decision_level() { trail_lim.push_back((int)trail.size()); }

	void cancel_until(int lvl)
	{
		if (decision_level() <= lvl)
			return;
		for (int i = (int)trail.size() - 1; i >= trail_lim[lvl]; --i) {
			int v = ivar(trail[i]);
			phase[v] = assign[v];
			assign[v] = kUndef;
			reason[v] = -1;
			heap_insert(v);
		}
		trail.resize(trail_lim[lvl]);
		trail_lim.resize(lvl);
		if (qhead > trail.size())
			qhead = trail.size();
	}

	// --- propagation ---
	int propagate()
	{
		while (qhead < trail.size()) {
			int p = trail[qhead++];
			int fp = ineg(p); // clauses watching ~p must be checked
			auto &ws = watches[fp];
			size_t i = 0, j = 0;
			while (i < ws.size()) {
				Watcher w = ws[i];
				if (value(w.blocker) == 1) {
					ws[j++] = ws[i++];
					continue;
				}
				Clause &c = clauses[w.clause];
				if (c.deleted) {
					++i;
					continue;
				}
				if (c.lits[0] == fp)
					std::swap(c.lits[0], c.lits[1]);
				// now lits[1] == fp
				int first = c.lits[0];
				if (first != w.blocker && value(first) == 1) {
					ws[j++] = {w.clause, first};
					++i;
					continue;
				}
				bool moved = false;
				for (size_t k = 2; k < c.lits.size(); ++k) {
					if (value(c.lits[k]) != 0) {
						std::swap(c.lits[1], c.lits[k]);
						watches[c.lits[1]].push_back({w.clause, first});
						moved = true;
						break;
					}
				}
				if (moved) {
					++i;
					continue;
				}
				// unit or conflict
				ws[j++] = {w.clause, first};
				++i;
				if (value(first) == 0) {
					// conflict: copy the remaining watchers
					while (i < ws.size())
						ws[j++] = ws[i++];
					ws.resize(j);
					qhead = trail.size();
					return w.clause;
				}
				enqueue(first, w.clause);
			}
			ws.resize(j);
		}
		return -1;
	}

	// --- learning ---
	void analyze(int confl, std::vector<int> &out_learnt, int &out_btlevel)
	{
		out_learnt.clear();
		out_learnt.push_back(0); // placeholder for the asserting literal
		int path = 0;
		int p = -1;
		int index = (int)trail.size() - 1;
		do {
			Clause &c = clauses[confl];
			if (c.learnt)
				bump_clause(c);
			for (size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
				int q = c.lits[k];
				int v = ivar(q);
				if (!seen[v] && level[v] > 0) {
					seen[v] = 1;
					bump_var(v);
					if (level[v] >= decision_level())
						++path;
					else
						out_learnt.push_back(q);
				}
			}
			while (!seen[ivar(trail[index])])
				--index;
			p = trail[index];
			confl = reason[ivar(p)];
			seen[ivar(p)] = 0;
			--path;
			--index;
		} while (path > 0);
		out_learnt[0] = ineg(p);
		std::vector<int> to_clear(out_learnt);

		// Cheap minimization: drop literals implied by their reason
		// clause within the learnt clause itself.
		size_t keep = 1;
		for (size_t i = 1; i < out_learnt.size(); ++i) {
			int v = ivar(out_learnt[i]);
			int r = reason[v];
			bool redundant = false;
			if (r >= 0) {
				redundant = true;
				for (size_t k = 1; k < clauses[r].lits.size() && redundant; ++k)
					if (!seen[ivar(clauses[r].lits[k])] && level[ivar(clauses[r].lits[k])] > 0)
						redundant = false;
			}
			if (!redundant)
				out_learnt[keep++] = out_learnt[i];
		}
		out_learnt.resize(keep);

		if (out_learnt.size() == 1) {
			out_btlevel = 0;
		} else {
			size_t max_i = 1;
			for (size_t i = 2; i < out_learnt.size(); ++i)
				if (level[ivar(out_learnt[i])] > level[ivar(out_learnt[max_i])])
					max_i = i;
			std::swap(out_learnt[1], out_learnt[max_i]);
			out_btlevel = level[ivar(out_learnt[1])];
		}
		for (int q : to_clear)
			seen[ivar(q)] = 0;
	}

	int attach_clause(std::vector<int> lits, bool learnt)
	{
		clauses.push_back(Clause{std::move(lits), learnt ? cla_inc : 0.0, learnt, false});
		int idx = (int)clauses.size() - 1;
		Clause &c = clauses[idx];
		watches[c.lits[0]].push_back({idx, c.lits[1]});
		watches[c.lits[1]].push_back({idx, c.lits[0]});
		(learnt ? learnt_count : clause_count)++;
		return idx;
	}

	void reduce_db()
	{
		std::vector<int> learnts;
		for (int i = 0; i < (int)clauses.size(); ++i)
			if (clauses[i].learnt && !clauses[i].deleted)
				learnts.push_back(i);
		std::sort(learnts.begin(), learnts.end(), [&](int a, int b) {
			return clauses[a].activity < clauses[b].activity;
		});
		size_t target = learnts.size() / 2;
		size_t removed = 0;
		for (int idx : learnts) {
			if (removed >= target)
				break;
			Clause &c = clauses[idx];
			if (c.lits.size() <= 2)
				continue;
			// Keep clauses that are the reason of a current assignment.
			if (value(c.lits[0]) == 1 && reason[ivar(c.lits[0])] == idx)
				continue;
			c.deleted = true;
			++removed;
			--learnt_count;
		}
		// Watches are purged lazily during propagation rebuild.
		for (auto &ws : watches) {
			size_t j = 0;
			for (size_t i = 0; i < ws.size(); ++i)
				if (!clauses[ws[i].clause].deleted)
					ws[j++] = ws[i];
			ws.resize(j);
		}
	}

	bool add_root_clause(const std::vector<Lit> &clause)
	{
		if (root_unsat)
			return false;
		cancel_until(0);
		std::vector<int> lits;
		for (Lit l : clause) {
			if (l == 0)
				throw std::invalid_argument("zero literal in clause");
			grow_to(std::abs(l));
			lits.push_back(ilit(l));
		}
		std::sort(lits.begin(), lits.end());
		lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
		for (size_t i = 0; i + 1 < lits.size(); ++i)
			if (lits[i] == ineg(lits[i + 1]))
				return true; // tautology
		std::vector<int> keep;
		for (int p : lits) {
			int8_t v = value(p);
			if (v == 1)
				return true; // already satisfied at root
			if (v != 0)
				keep.push_back(p);
		}
		if (keep.empty()) {
			root_unsat = true;
			return false;
		}
		if (keep.size() == 1) {
			enqueue(keep[0], -1);
			if (propagate() != -1) {
				root_unsat = true;
				return false;
			}
			return true;
		}
		attach_clause(std::move(keep), false);
		return true;
	}

	SolveResult search(const std::vector<int> &assumptions,
			   std::optional<std::chrono::steady_clock::time_point> deadline)
	{
		if (root_unsat)
			return SolveResult::Unsat;
		if (deadline && std::chrono::steady_clock::now() >= *deadline)
			return SolveResult::Unknown;
		cancel_until(0);
		if (propagate() != -1) {
			root_unsat = true;
			return SolveResult::Unsat;
		}
		uint64_t restart = 0;
		uint64_t conflict_budget = 100 * luby(restart);
		uint64_t conflicts_here = 0;
		std::vector<int> learnt;
		max_learnts = std::max(max_learnts, (double)clause_count / 3.0);

		for (;;) {
			int confl = propagate();
			if (confl != -1) {
				++conflicts;
				++conflicts_here;
				if (decision_level() == 0) {
					root_unsat = true;
					return SolveResult::Unsat;
				}
				int bt;
				analyze(confl, learnt, bt);
				// Never undo assumption levels blindly: cancel_until
				// handles any level; assumptions get re-enqueued below.
				cancel_until(bt);
				if (learnt.size() == 1) {
					enqueue(learnt[0], -1);
				} else {
					int idx = attach_clause(learnt, true);
					enqueue(learnt[0], idx);
				}
				var_inc *= kVarDecay;
				cla_inc *= kClaDecay;
				if ((double)learnt_count >= max_learnts) {
					reduce_db();
					max_learnts *= 1.3;
				}
				if ((conflicts & 1023) == 0 && deadline &&
				    std::chrono::steady_clock::now() >= *deadline) {
					cancel_until(0);
					return SolveResult::Unknown;
				}
				if (conflicts_here >= conflict_budget) {
					// Luby restart.
					cancel_until(0);
					++restart;
					conflict_budget = 100 * luby(restart);
					conflicts_here = 0;
				}
				continue;
			}

			// Decision: assumptions first, then VSIDS.
			int next = -1;
			while (decision_level() < (int)assumptions.size()) {
				int p = assumptions[decision_level()];
				grow_to(ivar(p) + 1);
				int8_t v = value(p);
				if (v == 1) {
					new_decision_level();
				} else if (v == 0) {
					return SolveResult::Unsat;
				} else {
					next = p;
					break;
				}
			}
			if (next == -1) {
				int v = heap_pop();
				if (v == -1) {
					// Full assignment: model found.
					model = assign;
					cancel_until(0);
					return SolveResult::Sat;
				}
				next = 2 * v + (phase[v] == 1 ? 0 : 1);
			}
			new_decision_level();
			enqueue(next, -1);
		}
	}
};

Solver::Solver() : impl_(new Impl) {}
Solver::~Solver() { delete impl_; }

int Solver::new_var()
{
	impl_->grow_to(impl_->nvars() + 1);
	return impl_->nvars();
}

void Solver::ensure_vars(int max_var) { impl_->grow_to(max_var); }

int Solver::num_vars() const { return impl_->nvars(); }
uint64_t Solver::num_clauses() const { return impl_->clause_count; }
uint64_t Solver::num_conflicts() const { return impl_->conflicts; }

bool Solver::add_clause(const std::vector<Lit> &clause) { return impl_->add_root_clause(clause); }

SolveResult Solver::solve(const std::vector<Lit> &assumptions)
{
	return solve_until(assumptions, std::nullopt);
}

SolveResult Solver::solve_until(const std::vector<Lit> &assumptions,
				std::optional<std::chrono::steady_clock::time_point> deadline)
{
	std::vector<int> as;
	for (Lit l : assumptions) {
		if (l == 0)
			throw std::invalid_argument("zero literal in assumptions");
		impl_->grow_to(std::abs(l));
		as.push_back(ilit(l));
	}
	return impl_->search(as, deadline);
}

bool Solver::model_value(int var) const
{
	if (var <= 0 || var > (int)impl_->model.size())
		return false;
	return impl_->model[var - 1] == 1;
}

} // namespace lockbench
