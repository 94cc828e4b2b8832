#pragma once

#include "itslb/metering.hpp"
#include "itslb/rule.hpp"

#include <optional>

namespace itslb {

struct TransformError : std::runtime_error {
    enum class Kind {
        NotSimpleLoop, NotTemporary, IntegralityUnprovable, RootMismatch,
        NotPresent, NotStrictSubset
    };
    Kind kind;
    TransformError(Kind k, const std::string& m) : std::runtime_error(m), kind(k) {}
};

/// Records of the inputs of a loop acceleration, kept for replay and proofs.
struct AccelInfo {
    Subst mu;
    Subst mu_it;
    Expr cost;
    Expr cost_it;
    Var tv;
    Metering metering;
};

struct Provenance {
    enum class Kind {
        Original, Accelerated, AcceleratedRecursion, Instantiated, Chained, PartialDeleted
    };
    Kind kind = Kind::Original;
    std::vector<RuleId> parents;
    Subst subst;  // chaining connection or instantiation binding
    std::optional<AccelInfo> accel;
    std::string note;
};

struct TransformedRule {
    Rule rule;
    Provenance prov;
};

/// Drops guard conjuncts implied by the remaining ones (single pass).
Guard simplify_guard(const Guard& g, const SmtSolver& smt);

/// Accelerated rule lhs -{c_it}-> lhs*mu_it [guard ∧ psi ∧ 0 < tv < b+1].
/// For a fresh-temporary bound the upper conjunct is omitted.
TransformedRule accelerate_loop(const Rule& r, const Metering& m, const Subst& mu_it,
                                const Expr& cost_it, const Var& tv, const SmtSolver& smt);

/// Accelerated recursion lhs -{(d^b - 1)/(d-1)}-> sink [guard ∧ psi]; the
/// conjunct cost >= 1 is added first when the guard does not imply it.
TransformedRule accelerate_recursion(const Rule& r, const Metering& m, const SmtSolver& smt);

/// r with tv replaced by b everywhere; b must provably map to the integers.
TransformedRule instantiate(const Rule& r, const Var& tv, const Expr& b, const SmtSolver& smt);

/// Scans the guard for a minimal upper (preferred) or maximal lower bound on
/// some temporary variable.
std::optional<std::pair<Var, Expr>> instantiate_heuristic(const Rule& r, const SmtSolver& smt);

/// Chains r1 with r2 at rhs occurrence `at` of r1 (root must match r2's lhs).
TransformedRule chain(const Rule& r1, const Rule& r2, size_t at, const SmtSolver& smt);

/// r with rhs restricted to the given occurrence indices (strict subset;
/// empty keep materializes a sink).
TransformedRule partial_delete(const Rule& r, const std::vector<size_t>& keep);

/// Removes r from p. Throws NotPresent.
void delete_rule(Program& p, RuleId id);

}  // namespace itslb
