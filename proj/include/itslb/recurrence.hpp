#pragma once

#include "itslb/expr.hpp"

#include <optional>

namespace itslb {

/// Closed form of sum_{i=0}^{tv-1} p(i) for a polynomial p in i of degree <= 6
/// (Faulhaber); nullopt above degree 6.
std::optional<Expr> poly_sum(const Expr& p, const Var& i, const Var& tv);

/// Closed form of mu^tv, valid for all tv > 0. Solvable shapes per variable:
/// x' = x + p, x' = a*x + c (rational a > 0), x' = q (no self-occurrence),
/// solved in dependency order; p may mention already-solved variables and
/// produces polynomial or geometric closed forms. nullopt on mutual recursion,
/// negative multipliers or shapes outside this fragment.
std::optional<Subst> iterated_update(const Subst& mu, const Var& tv);

/// Exact closed form of sum_{i=0}^{tv-1} cost*mu^i; requires iterated_update's
/// result. The exact form trivially satisfies the <= side condition.
std::optional<Expr> iterated_cost(const Expr& cost, const Subst& mu, const Subst& mu_it,
                                  const Var& tv);

}  // namespace itslb
