#include "itslb/interp.hpp"

#include <algorithm>
#include <sstream>

namespace itslb {

std::string GroundTerm::to_string() const {
    std::ostringstream os;
    os << root;
    if (!args.empty()) {
        os << "(";
        for (size_t i = 0; i < args.size(); ++i) {
            if (i) os << ",";
            os << args[i];
        }
        os << ")";
    }
    return os.str();
}

namespace {

std::map<Var, Rat> bind_lhs(const Rule& r, const GroundTerm& t) {
    std::map<Var, Rat> v;
    for (size_t i = 0; i < r.lhs_vars.size() && i < t.args.size(); ++i)
        v[r.lhs_vars[i]] = Rat(t.args[i]);
    return v;
}

GroundTerm ground_rhs_term(const Term& t, const std::map<Var, Rat>& v) {
    GroundTerm g;
    g.root = t.root;
    for (const auto& a : t.args) {
        Rat val = eval(a, v);
        if (!is_integer(val))
            throw InterpError(InterpError::Kind::NonIntegerArgument,
                              "argument " + a.to_string() + " evaluates to " + rat_to_string(val));
        g.args.push_back(val.get_num());
    }
    return g;
}

}  // namespace

StepResult step(const Config& c, const Program& p, RuleId rule, size_t term_index,
                const std::map<Var, Int>& temp_valuation) {
    if (term_index >= c.size())
        throw InterpError(InterpError::Kind::NoMatch, "no term at that position");
    const Rule* r = p.find(rule);
    if (!r || r->lhs_root != c[term_index].root)
        throw InterpError(InterpError::Kind::NoMatch, "rule does not match the chosen term");
    std::map<Var, Rat> v = bind_lhs(*r, c[term_index]);
    for (const auto& [tv, val] : temp_valuation) v[tv] = Rat(val);
    if (!eval(r->guard, v))
        throw InterpError(InterpError::Kind::GuardViolated, "guard is false under the valuation");
    StepResult out;
    out.cost = eval(r->cost, v);
    for (size_t i = 0; i < c.size(); ++i)
        if (i != term_index) out.config.push_back(c[i]);
    for (const auto& t : r->rhs)
        if (t.root != kSinkSymbol) out.config.push_back(ground_rhs_term(t, v));
    return out;
}

namespace {

struct Search {
    const Program& p;
    const RunBudget& b;
    std::map<GroundTerm, Rat> memo;
    std::set<GroundTerm> on_stack;
    bool truncated = false;

    // maximal derivation cost starting from a single term
    Rat dh(const GroundTerm& t, int depth) {
        if (t.root == kSinkSymbol) return Rat(0);
        auto it = memo.find(t);
        if (it != memo.end()) return it->second;
        if (on_stack.count(t)) {
            truncated = true;
            return Rat(0);
        }
        if (depth <= 0) {
            truncated = true;
            return Rat(0);
        }
        on_stack.insert(t);
        Rat best(0);
        for (const auto& r : p.rules) {
            if (r.lhs_root != t.root) continue;
            std::map<Var, Rat> base = bind_lhs(r, t);
            std::vector<Var> temps(r.temp_vars().begin(), r.temp_vars().end());
            long span = b.tv_max - b.tv_min + 1;
            long combos = 1;
            for (size_t i = 0; i < temps.size(); ++i) {
                if (combos > b.branch_cap) break;
                combos *= span;
            }
            if (combos > b.branch_cap) {
                truncated = true;
                combos = b.branch_cap;
            }
            std::vector<long> idx(temps.size(), 0);
            for (long n = 0; n < combos; ++n) {
                std::map<Var, Rat> v = base;
                long rest = n;
                for (size_t i = 0; i < temps.size(); ++i) {
                    v[temps[i]] = Rat(b.tv_min + rest % span);
                    rest /= span;
                }
                if (!eval(r.guard, v)) continue;
                Rat total = eval(r.cost, v);
                for (const auto& rt : r.rhs) {
                    if (rt.root == kSinkSymbol) continue;
                    total += dh(ground_rhs_term(rt, v), depth - 1);
                }
                if (total > best) best = total;
            }
        }
        on_stack.erase(t);
        memo[t] = best;
        return best;
    }
};

}  // namespace

MaxCostResult max_cost(const Program& p, const Config& start, const RunBudget& b) {
    Search s{p, b};
    Rat total(0);
    for (const auto& t : start) total += s.dh(t, b.max_steps);
    return MaxCostResult{total, s.truncated};
}

MaxCostResult max_cost_from(const Program& p, const std::vector<Int>& args, const RunBudget& b) {
    GroundTerm t;
    t.root = p.start;
    t.args = args;
    t.args.resize(p.program_vars.size(), Int(0));
    return max_cost(p, {t}, b);
}

long run_simple_loop(const Rule& r, const std::map<Var, Rat>& valuation, long cap) {
    std::map<Var, Rat> v = valuation;
    Subst mu = update(r);
    long iters = 0;
    while (iters < cap && eval(r.guard, v)) {
        std::map<Var, Rat> next = v;
        for (const auto& x : r.lhs_vars) next[x] = eval(mu.lookup(x), v);
        v = std::move(next);
        ++iters;
    }
    return iters;
}

}  // namespace itslb
