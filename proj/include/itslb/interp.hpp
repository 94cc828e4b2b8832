#pragma once

#include "itslb/rule.hpp"

#include <map>

namespace itslb {

/// Budget for the bounded exhaustive worst-case search.
struct RunBudget {
    int max_steps = 64;       // depth bound along one derivation
    long tv_min = -8;         // temporary-variable enumeration window
    long tv_max = 8;
    long branch_cap = 200000; // per-rule valuation cap
};

struct GroundTerm {
    std::string root;
    std::vector<Int> args;

    bool operator<(const GroundTerm& o) const {
        if (root != o.root) return root < o.root;
        return args < o.args;
    }
    bool operator==(const GroundTerm& o) const { return root == o.root && args == o.args; }
    std::string to_string() const;
};

using Config = std::vector<GroundTerm>;

struct InterpError : std::runtime_error {
    enum class Kind { GuardViolated, NoMatch, NonIntegerArgument };
    Kind kind;
    InterpError(Kind k, const std::string& m) : std::runtime_error(m), kind(k) {}
};

struct StepResult {
    Config config;
    Rat cost;
};

/// One transition: fire `rule` on config[term_index] under the given
/// temporary-variable valuation. Throws NoMatch / GuardViolated.
StepResult step(const Config& c, const Program& p, RuleId rule, size_t term_index,
                const std::map<Var, Int>& temp_valuation);

struct MaxCostResult {
    Rat cost;
    bool truncated = false;  // some branch hit the budget; cost is still a lower bound
};

/// Exhaustive branch-and-bound over rule/term/temporary choices within the
/// budget; the result is a certified lower bound on the derivation height.
MaxCostResult max_cost(const Program& p, const Config& start, const RunBudget& b);

/// Convenience: start from start_symbol(args).
MaxCostResult max_cost_from(const Program& p, const std::vector<Int>& args, const RunBudget& b);

/// Runs a simple loop from the given full valuation (temporaries held fixed),
/// counting iterations while the guard holds; stops at `cap`.
long run_simple_loop(const Rule& r, const std::map<Var, Rat>& valuation, long cap);

}  // namespace itslb
