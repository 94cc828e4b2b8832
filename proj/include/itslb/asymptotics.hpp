#pragma once

#include "itslb/pipeline.hpp"
#include "itslb/rule.hpp"
#include "itslb/smt.hpp"

#include <optional>

namespace itslb {

/// Tag of a limit-problem entry: grow to +inf / -inf, or be a positive /
/// negative constant. OpenPos is a pending choice between Pos and PosConst.
enum class LimitTag { Pos, Neg, PosConst, NegConst, OpenPos };

std::string tag_to_string(LimitTag t);

struct LimitEntry {
    Expr e;
    LimitTag tag;
    bool operator==(const LimitEntry& o) const { return tag == o.tag && e == o.e; }
};

struct LimitProblem {
    std::vector<LimitEntry> entries;

    void canonicalize();
    bool trivial() const;
    bool contradictory() const;
    /// A constant entry that cannot satisfy its tag, or similar dead ends.
    bool dead() const;
    bool polynomial() const;
    std::set<Var> vars() const;
    std::string to_string() const;
    bool operator==(const LimitProblem& o) const { return entries == o.entries; }
};

/// Family of integer substitutions parameterized by n.
struct FamilySubst {
    Var n{"n"};
    std::map<Var, Expr> map;  // every rule variable -> Expr over n

    Expr of(const Var& v) const;
    std::string to_string() const;
};

struct AsymClass {
    enum class Kind { Const, Poly, SubExp, Exp, Unbounded };
    Kind kind = Kind::Const;
    Rat poly_exponent;        // for Poly
    int root = 1;             // for SubExp: e^(n^(1/root))
    double base_hint = 0.0;   // for Exp with linear size: concrete base

    static AsymClass constant() { return {}; }
    static AsymClass poly(Rat q);
    static AsymClass subexp(int root);
    static AsymClass exponential(double hint = 0.0);
    static AsymClass unbounded();

    std::string to_string() const;
    friend bool operator<(const AsymClass& a, const AsymClass& b);
    friend bool operator==(const AsymClass& a, const AsymClass& b);
};

enum class LimOp { Add, Sub, Mul };

/// Admissible argument-tag pairs making the operation increasing / decreasing
/// / positive / negative in the limit. `target` must be a committed tag.
std::vector<std::pair<LimitTag, LimitTag>> limit_vectors(LimOp op, LimitTag target);

/// One entry per normalized guard conjunct with an open +/+! tag, plus
/// (cost, +).
LimitProblem initial_problem(const Rule& r);

/// x->n for x^+, x->-n for x^-, x->1 for x^+!, x->-1 for x^-!, 0 otherwise.
FamilySubst solve_trivial(const LimitProblem& L, const std::set<Var>& all_vars);

struct CalcStep {
    LimitProblem next;
    Subst theta;       // empty except for substitution steps
    std::string rule;  // "A".."E" plus a short description
};

struct LimitContext {
    Guard guard;                 // for bound propagation
    std::vector<Var> program_vars;
    const SmtSolver* smt = nullptr;
    int depth_cap = 12;
    int node_cap = 5000;
};

/// All single-step successors of L, in strategy priority order.
std::vector<CalcStep> step(const LimitProblem& L, const LimitContext& ctx);

/// Linear-template SMT encoding of a polynomial limit problem: per-entry
/// coefficient conditions; tries the unbounded variant first, then maximizes
/// the cost degree, then the plain encoding.
std::optional<FamilySubst> smt_solve(const LimitProblem& L, const Expr& cost,
                                     const LimitContext& ctx);
/// The raw encoding of one entry (exposed for tests): expands a*sigma_n with
/// templates m_x*n + k_x and collects the coefficient conditions.
Formula smt_encode_entry(const Expr& a, LimitTag tag, const Var& n,
                         const std::map<Var, std::pair<Var, Var>>& templates);

struct SearchResult {
    FamilySubst family;
    AsymClass cls;
    std::vector<std::string> derivation;
};

/// Depth-first search over the calculus with the SMT encoding attempted at
/// polynomial nodes; keeps looking while the found class is below the cost's
/// syntactic ceiling.
std::optional<SearchResult> search(const LimitProblem& L0, const Expr& cost, const Rule& rule,
                                   const LimitContext& ctx);

/// Leading behavior of cost under the family; Unbounded when every program
/// variable is constant while the cost is not.
AsymClass classify_family(const Expr& cost, const FamilySubst& fam,
                          const std::vector<Var>& program_vars);

/// Size expression sum_v |v sigma_n| (sign-normalized components).
Expr size_bound_expr(const FamilySubst& fam, const std::vector<Var>& program_vars);

/// Runtime-vs-size composition: Poly(k) over size n^d gives Poly(k/d), Exp
/// over size n^d gives Exp (d=1) or the e^(n^(1/d)) class, constant size with
/// non-constant inner gives Unbounded.
AsymClass compose_bound(const AsymClass& inner, const Expr& size_expr, const Var& n);

struct BoundResult {
    AsymClass cls;
    std::optional<RuleId> witness_rule;
    Expr concrete_cost;
    Guard guard;
    FamilySubst family;
    std::vector<std::string> derivation;
};

/// Maximal asymptotic class over all rules of a simplified program.
BoundResult best_bound(const Program& p, const LimitContext& ctx);

}  // namespace itslb
