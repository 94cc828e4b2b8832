#pragma once

#include "itslb/constraint.hpp"

#include <map>
#include <string>
#include <vector>

namespace itslb {

inline const std::string kSinkSymbol = "sink";

struct FunSym {
    std::string name;
    int arity = 0;
    auto operator<=>(const FunSym&) const = default;
};

struct Term {
    std::string root;
    std::vector<Expr> args;

    bool operator==(const Term& o) const { return root == o.root && args == o.args; }
    bool operator<(const Term& o) const;
    void collect_vars(std::set<Var>& out) const;
    std::string to_string() const;
};

enum class RuleClass { SimpleLoop, SimpleRecursion, TailRecursive, Other };

using RuleId = int;

/// f(x⃗) -cost-> rhs [guard]; rhs is a multiset kept as a sorted vector.
/// lhs_vars is the canonical program-variable vector shared program-wide.
struct Rule {
    RuleId id = -1;
    std::string lhs_root;
    std::vector<Var> lhs_vars;
    Expr cost;
    std::vector<Term> rhs;  // sorted; degree 0 is materialized as {sink(0,...)}
    Guard guard;

    int degree() const { return static_cast<int>(rhs.size()); }
    std::set<Var> all_vars() const;
    /// Variables not among the lhs program variables.
    std::set<Var> temp_vars() const;
    void normalize_rhs();
    std::string to_string() const;
};

RuleClass classify(const Rule& r);
/// Update substitution of a simple loop (the unique rhs term's arguments).
Subst update(const Rule& r);
/// Per-term update substitutions {x⃗ / t⃗} (simple loops and recursions).
std::vector<Subst> updates(const Rule& r);
/// Syntactic sufficient check: every rhs argument maps integers to integers.
bool well_formed(const Rule& r);

struct Program {
    std::vector<Rule> rules;
    std::string start;
    std::vector<Var> program_vars;
    std::map<std::string, std::vector<std::string>> source_names;  // symbol -> original arg names
    RuleId next_id = 0;

    RuleId add_rule(Rule r);
    void remove_rule(RuleId id);
    const Rule* find(RuleId id) const;
    bool well_formed() const;

    std::vector<RuleId> incoming(const std::string& symbol) const;
    std::vector<RuleId> outgoing(const std::string& symbol) const;
    std::set<std::string> symbols() const;
    std::set<std::string> reachable_from_start() const;
    bool is_simplified() const;

    std::string to_string() const;
};

Term sink_term(int arity);

}  // namespace itslb
