#pragma once

#include "itslb/rule.hpp"
#include "itslb/smt.hpp"

#include <optional>

namespace itslb {

/// A (conditional) metering function: `bound` counts iterations on states
/// satisfying `condition` (empty condition = unconditional).
struct Metering {
    enum class Tag { Plain, Conditional, Recursion };
    Guard condition;  // psi
    Expr bound;       // b
    Tag tag = Tag::Plain;
    bool fresh_tv = false;  // bound is a fresh temporary: the loop is unbounded

    std::string to_string() const;
};

/// Splits g into (phi, psi) where psi is the maximal set of conjuncts c with
/// guard => c(mu) valid (invariant under the update). Conjuncts whose check
/// comes back Unknown stay in phi.
std::pair<Guard, Guard> partition_guard(const Guard& g, const Subst& mu, const SmtSolver& smt);
/// Recursion variant: c must be invariant under every update.
std::pair<Guard, Guard> partition_guard_multi(const Guard& g, const std::vector<Subst>& mus,
                                              const SmtSolver& smt);

/// Farkas encoding of "premise => conclusion" for all integer values of
/// `universal`: the returned formula is over the conclusion's template
/// coefficients and fresh nonnegative multipliers; any model yields a valid
/// implication. Premise must be linear with rational coefficients; the
/// conclusion linear in `universal` with coefficients over the remaining vars.
/// Throws ExprError{NotPolynomial} on nonlinear input.
Formula farkas_encode(const Guard& premise, const Constraint& conclusion,
                      const std::set<Var>& universal, int& fresh_counter);

struct Linearized {
    Rule rule;
    Subst back;  // fresh var -> original nonlinear term
};

/// Replaces nonlinear guard terms by fresh variables when the term's variables
/// occur nowhere else in the guard or the updates; nullopt when some nonlinear
/// conjunct cannot be handled that way.
std::optional<Linearized> linearize(const Rule& r);

/// Linear-template metering synthesis for a simple loop.
std::optional<Metering> find_metering(const Rule& r, const SmtSolver& smt);
/// Metering synthesis for a simple recursion (per-term descent conditions).
std::optional<Metering> find_metering_rec(const Rule& r, const SmtSolver& smt);

}  // namespace itslb
