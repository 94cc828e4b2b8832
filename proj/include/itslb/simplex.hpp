#pragma once

#include "itslb/expr.hpp"

#include <optional>
#include <vector>

namespace itslb {

enum class LinRel { Ge, Le, Eq };

/// sum_j terms[j].second * x_{terms[j].first}  rel  rhs
struct LinCon {
    std::vector<std::pair<int, Rat>> terms;
    LinRel rel = LinRel::Ge;
    Rat rhs;
};

enum class LpStatus { Infeasible, Optimal, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<Rat> point;  // valid for Optimal; a feasible point for Unbounded
    Rat value;
};

/// Exact two-phase simplex over the rationals with free variables
/// (internally split into nonnegative pairs). Bland's rule, so it terminates.
LpResult lp_maximize(int nvars, const std::vector<LinCon>& cons, const std::vector<Rat>& objective);

/// Branch & bound on top of lp_maximize. `integer[i]` marks integer variables.
/// Returns nullopt when infeasible or when the node/depth budget is exhausted
/// (`exhausted` is set in the latter case).
std::optional<LpResult> mip_maximize(int nvars, const std::vector<LinCon>& cons,
                                     const std::vector<Rat>& objective,
                                     const std::vector<bool>& integer, int node_cap,
                                     bool* exhausted);

Rat rat_floor(const Rat& q);
Rat rat_ceil(const Rat& q);

}  // namespace itslb
