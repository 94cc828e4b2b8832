#include "itslb/constraint.hpp"

#include <algorithm>
#include <sstream>

namespace itslb {

Constraint constraint_gt(const Expr& lhs) { return Constraint{lhs, Rel::Gt}; }
Constraint constraint_ge(const Expr& lhs) { return Constraint{lhs, Rel::Ge}; }

std::optional<bool> Constraint::ground_value() const {
    auto c = lhs.as_constant();
    if (!c) return std::nullopt;
    return rel == Rel::Gt ? *c > 0 : *c >= 0;
}

std::string Constraint::to_string() const {
    // display p - c rel 0 as p rel c when the constant term is negative
    Rat c0 = lhs.constant_term();
    const char* op = rel == Rel::Gt ? " > " : " >= ";
    if (c0 < 0) {
        Expr p = lhs - Expr::constant(c0);
        return p.to_string() + op + rat_to_string(-c0);
    }
    return lhs.to_string() + op + "0";
}

Guard::Guard(std::vector<Constraint> cs) {
    for (auto& c : cs) {
        auto gv = c.ground_value();
        if (gv && *gv) continue;  // drop ground-true conjuncts
        if (std::find(cs_.begin(), cs_.end(), c) == cs_.end()) cs_.push_back(std::move(c));
    }
}

bool Guard::is_ground_false() const {
    for (const auto& c : cs_) {
        auto gv = c.ground_value();
        if (gv && !*gv) return true;
    }
    return false;
}

Guard Guard::conjoin(const Guard& o) const {
    std::vector<Constraint> cs = cs_;
    cs.insert(cs.end(), o.cs_.begin(), o.cs_.end());
    return Guard(std::move(cs));
}

Guard Guard::without(size_t index) const {
    std::vector<Constraint> cs;
    for (size_t i = 0; i < cs_.size(); ++i)
        if (i != index) cs.push_back(cs_[i]);
    return Guard(std::move(cs));
}

void Guard::collect_vars(std::set<Var>& out) const {
    for (const auto& c : cs_) c.lhs.collect_vars(out);
}

std::set<Var> Guard::vars() const {
    std::set<Var> s;
    collect_vars(s);
    return s;
}

std::string Guard::to_string() const {
    if (cs_.empty()) return "TRUE";
    std::ostringstream os;
    for (size_t i = 0; i < cs_.size(); ++i) {
        if (i) os << " && ";
        os << cs_[i].to_string();
    }
    return os.str();
}

Guard normalize_guard(const std::vector<RawCmp>& raw) {
    std::vector<Constraint> cs;
    for (const auto& r : raw) {
        switch (r.op) {
            case CmpOp::Gt: cs.push_back(constraint_gt(r.lhs - r.rhs)); break;
            case CmpOp::Ge: cs.push_back(constraint_ge(r.lhs - r.rhs)); break;
            case CmpOp::Lt: cs.push_back(constraint_gt(r.rhs - r.lhs)); break;
            case CmpOp::Le: cs.push_back(constraint_ge(r.rhs - r.lhs)); break;
            case CmpOp::Eq:
                cs.push_back(constraint_ge(r.rhs - r.lhs));
                cs.push_back(constraint_ge(r.lhs - r.rhs));
                break;
        }
    }
    return Guard(std::move(cs));
}

Guard apply(const Guard& g, const Subst& s) {
    std::vector<Constraint> cs;
    cs.reserve(g.size());
    for (const auto& c : g.conjuncts()) cs.push_back(Constraint{apply(c.lhs, s), c.rel});
    return Guard(std::move(cs));
}

bool eval(const Constraint& c, const std::map<Var, Rat>& v) {
    Rat val = eval(c.lhs, v);
    return c.rel == Rel::Gt ? val > 0 : val >= 0;
}

bool eval(const Guard& g, const std::map<Var, Rat>& v) {
    for (const auto& c : g.conjuncts())
        if (!eval(c, v)) return false;
    return true;
}

}  // namespace itslb
