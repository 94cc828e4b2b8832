#pragma once

#include "itslb/expr.hpp"

#include <vector>

namespace itslb {

enum class Rel { Gt, Ge };  // lhs > 0, lhs >= 0

/// A normalized inequation `lhs rel 0`.
struct Constraint {
    Expr lhs;
    Rel rel = Rel::Ge;

    bool operator==(const Constraint& o) const { return rel == o.rel && lhs == o.lhs; }
    bool operator<(const Constraint& o) const {
        if (rel != o.rel) return rel < o.rel;
        return lhs < o.lhs;
    }
    /// Ground truth value when lhs is constant.
    std::optional<bool> ground_value() const;
    std::string to_string() const;
};

Constraint constraint_gt(const Expr& lhs);   // lhs > 0
Constraint constraint_ge(const Expr& lhs);   // lhs >= 0

/// Raw comparison prior to normalization.
enum class CmpOp { Lt, Le, Gt, Ge, Eq };
struct RawCmp {
    Expr lhs;
    CmpOp op;
    Expr rhs;
};

/// Conjunction of normalized constraints. Empty list means true. Duplicates
/// and ground-true conjuncts are removed; order of first occurrence is kept.
class Guard {
public:
    Guard() = default;
    explicit Guard(std::vector<Constraint> cs);

    const std::vector<Constraint>& conjuncts() const { return cs_; }
    bool is_true() const { return cs_.empty(); }
    /// Some conjunct is ground false.
    bool is_ground_false() const;
    size_t size() const { return cs_.size(); }
    const Constraint& operator[](size_t i) const { return cs_[i]; }

    Guard conjoin(const Guard& o) const;
    Guard without(size_t index) const;

    void collect_vars(std::set<Var>& out) const;
    std::set<Var> vars() const;

    bool operator==(const Guard& o) const { return cs_ == o.cs_; }
    std::string to_string() const;

private:
    std::vector<Constraint> cs_;
};

/// `s < t` becomes t-s > 0, `s = t` becomes the two >= conjuncts.
Guard normalize_guard(const std::vector<RawCmp>& raw);

Guard apply(const Guard& g, const Subst& s);
bool eval(const Constraint& c, const std::map<Var, Rat>& v);
bool eval(const Guard& g, const std::map<Var, Rat>& v);

}  // namespace itslb
