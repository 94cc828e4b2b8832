#include "itslb/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace itslb {

std::string tag_to_string(LimitTag t) {
    switch (t) {
        case LimitTag::Pos: return "+";
        case LimitTag::Neg: return "-";
        case LimitTag::PosConst: return "+!";
        case LimitTag::NegConst: return "-!";
        case LimitTag::OpenPos: return "+|+!";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// LimitProblem

void LimitProblem::canonicalize() {
    std::sort(entries.begin(), entries.end(), [](const LimitEntry& a, const LimitEntry& b) {
        int c = compare(a.e, b.e);
        if (c != 0) return c < 0;
        return a.tag < b.tag;
    });
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
}

static bool is_single_var(const Expr& e, Var* out = nullptr) {
    const auto& ms = e.monomials();
    if (ms.size() != 1) return false;
    const auto& m = ms[0];
    if (m.coeff != 1 || m.factors.size() != 1 || m.factors[0].power != 1 ||
        !m.factors[0].atom.is_var())
        return false;
    if (out) *out = m.factors[0].atom.var();
    return true;
}

bool LimitProblem::contradictory() const {
    for (size_t i = 0; i < entries.size(); ++i)
        for (size_t j = i + 1; j < entries.size(); ++j) {
            if (entries[i].e != entries[j].e) continue;
            LimitTag a = entries[i].tag, b = entries[j].tag;
            if (a == b) continue;
            bool a_posish = a == LimitTag::OpenPos || a == LimitTag::Pos || a == LimitTag::PosConst;
            bool b_posish = b == LimitTag::OpenPos || b == LimitTag::Pos || b == LimitTag::PosConst;
            if (a_posish != b_posish) return true;
            // two committed positive tags differ: + vs +!
            if (a != LimitTag::OpenPos && b != LimitTag::OpenPos) return true;
        }
    return false;
}

bool LimitProblem::trivial() const {
    if (contradictory()) return false;
    return std::all_of(entries.begin(), entries.end(),
                       [](const LimitEntry& en) { return is_single_var(en.e); });
}

bool LimitProblem::dead() const {
    for (const auto& en : entries) {
        auto c = en.e.as_constant();
        if (!c) continue;
        switch (en.tag) {
            case LimitTag::Pos:
            case LimitTag::Neg: return true;  // constants cannot grow
            case LimitTag::PosConst:
            case LimitTag::OpenPos:
                if (*c <= 0) return true;
                break;
            case LimitTag::NegConst:
                if (*c >= 0) return true;
                break;
        }
    }
    return false;
}

bool LimitProblem::polynomial() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const LimitEntry& en) { return en.e.is_polynomial(); });
}

std::set<Var> LimitProblem::vars() const {
    std::set<Var> s;
    for (const auto& en : entries) en.e.collect_vars(s);
    return s;
}

std::string LimitProblem::to_string() const {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < entries.size(); ++i) {
        if (i) os << ", ";
        os << "(" << entries[i].e.to_string() << ")^" << tag_to_string(entries[i].tag);
    }
    os << "}";
    return os.str();
}

Expr FamilySubst::of(const Var& v) const {
    auto it = map.find(v);
    return it == map.end() ? expr(0) : it->second;
}

std::string FamilySubst::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [v, e] : map) {
        if (!first) os << ", ";
        first = false;
        os << v.name << " = " << e.to_string();
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// AsymClass

AsymClass AsymClass::poly(Rat q) {
    AsymClass c;
    c.kind = Kind::Poly;
    c.poly_exponent = std::move(q);
    return c;
}
AsymClass AsymClass::subexp(int root) {
    AsymClass c;
    c.kind = Kind::SubExp;
    c.root = root;
    return c;
}
AsymClass AsymClass::exponential(double hint) {
    AsymClass c;
    c.kind = Kind::Exp;
    c.base_hint = hint;
    return c;
}
AsymClass AsymClass::unbounded() {
    AsymClass c;
    c.kind = Kind::Unbounded;
    return c;
}

std::string AsymClass::to_string() const {
    switch (kind) {
        case Kind::Const: return "Omega(1)";
        case Kind::Poly: {
            if (poly_exponent == 0) return "Omega(1)";
            if (poly_exponent == 1) return "Omega(n)";
            std::string e = rat_to_string(poly_exponent);
            if (is_integer(poly_exponent)) return "Omega(n^" + e + ")";
            return "Omega(n^(" + e + "))";
        }
        case Kind::SubExp: return "EXP";
        case Kind::Exp: return "EXP";
        case Kind::Unbounded: return "Omega(omega)";
    }
    return "?";
}

static int rank(const AsymClass& c) {
    switch (c.kind) {
        case AsymClass::Kind::Const: return 0;
        case AsymClass::Kind::Poly: return 1;
        case AsymClass::Kind::SubExp: return 2;
        case AsymClass::Kind::Exp: return 3;
        case AsymClass::Kind::Unbounded: return 4;
    }
    return 0;
}

bool operator<(const AsymClass& a, const AsymClass& b) {
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    if (a.kind == AsymClass::Kind::Poly) return a.poly_exponent < b.poly_exponent;
    if (a.kind == AsymClass::Kind::SubExp) return a.root > b.root;  // bigger root is smaller
    return false;
}

bool operator==(const AsymClass& a, const AsymClass& b) { return !(a < b) && !(b < a); }

// ---------------------------------------------------------------------------
// limit vectors

std::vector<std::pair<LimitTag, LimitTag>> limit_vectors(LimOp op, LimitTag target) {
    using T = LimitTag;
    auto P = T::Pos, N = T::Neg, PC = T::PosConst, NC = T::NegConst;
    switch (op) {
        case LimOp::Add:
            switch (target) {
                case T::Pos: return {{P, P}, {P, PC}, {P, NC}, {PC, P}, {NC, P}};
                case T::Neg: return {{N, N}, {N, PC}, {N, NC}, {PC, N}, {NC, N}};
                case T::PosConst: return {{PC, PC}};
                case T::NegConst: return {{NC, NC}};
                default: return {};
            }
        case LimOp::Sub:
            switch (target) {
                case T::Pos: return {{P, N}, {P, PC}, {P, NC}, {PC, N}, {NC, N}};
                case T::Neg: return {{N, P}, {N, PC}, {N, NC}, {PC, P}, {NC, P}};
                case T::PosConst: return {{PC, NC}};
                case T::NegConst: return {{NC, PC}};
                default: return {};
            }
        case LimOp::Mul:
            switch (target) {
                case T::Pos: return {{P, P}, {N, N}, {P, PC}, {PC, P}, {N, NC}, {NC, N}};
                case T::Neg: return {{P, N}, {N, P}, {P, NC}, {PC, N}, {N, PC}, {NC, P}};
                case T::PosConst: return {{PC, PC}, {NC, NC}};
                case T::NegConst: return {{PC, NC}, {NC, PC}};
                default: return {};
            }
    }
    return {};
}

// ---------------------------------------------------------------------------
// initial problem / trivial solutions

LimitProblem initial_problem(const Rule& r) {
    LimitProblem L;
    for (const auto& c : r.guard.conjuncts()) L.entries.push_back({c.lhs, LimitTag::OpenPos});
    L.entries.push_back({r.cost, LimitTag::Pos});
    L.canonicalize();
    return L;
}

FamilySubst solve_trivial(const LimitProblem& L, const std::set<Var>& all_vars) {
    FamilySubst f;
    f.n = fresh_var("n", all_vars);
    std::map<Var, LimitTag> chosen;
    for (const auto& en : L.entries) {
        Var v;
        if (!is_single_var(en.e, &v)) continue;
        auto it = chosen.find(v);
        if (it == chosen.end() || it->second == LimitTag::OpenPos) chosen[v] = en.tag;
    }
    for (const auto& v : all_vars) {
        auto it = chosen.find(v);
        LimitTag t = it == chosen.end() ? LimitTag::NegConst /*placeholder*/ : it->second;
        if (it == chosen.end()) {
            f.map[v] = expr(0);
            continue;
        }
        switch (t) {
            case LimitTag::Pos:
            case LimitTag::OpenPos: f.map[v] = expr(f.n); break;
            case LimitTag::Neg: f.map[v] = -expr(f.n); break;
            case LimitTag::PosConst: f.map[v] = expr(1); break;
            case LimitTag::NegConst: f.map[v] = expr(-1); break;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// calculus steps

namespace {

LimitProblem replace_entry(const LimitProblem& L, size_t idx, std::vector<LimitEntry> repl) {
    LimitProblem out;
    for (size_t i = 0; i < L.entries.size(); ++i)
        if (i != idx) out.entries.push_back(L.entries[i]);
    for (auto& e : repl) out.entries.push_back(std::move(e));
    out.canonicalize();
    return out;
}

LimitTag committed(LimitTag t) { return t == LimitTag::OpenPos ? LimitTag::Pos : t; }

// bound substitutions {v / e} implied by the guard, integer-valued and v-free
std::vector<std::pair<Var, Expr>> bound_candidates(const Guard& g, const Var& v) {
    std::vector<std::pair<Var, Expr>> out;
    for (const auto& c : g.conjuncts()) {
        auto a = c.lhs.linear_coeff(v);
        if (!a || *a == 0) continue;
        Expr rest = c.lhs - Expr::constant(*a) * expr(v);
        if (rest.contains(v) || !rest.is_polynomial()) continue;
        Rat inv = 1 / *a;
        inv.canonicalize();
        Expr base = Expr::constant(-inv) * rest;
        if (!maps_to_int(base)) continue;
        if (c.rel == Rel::Gt)
            out.push_back({v, *a > 0 ? base + expr(1) : base - expr(1)});
        else
            out.push_back({v, base});
    }
    return out;
}

void split_successors(const LimitProblem& L, size_t idx, std::vector<CalcStep>& out) {
    const LimitEntry& en = L.entries[idx];
    const auto& ms = en.e.monomials();
    std::vector<LimitTag> targets;
    if (en.tag == LimitTag::OpenPos)
        targets = {LimitTag::Pos, LimitTag::PosConst};
    else
        targets = {en.tag};

    for (LimitTag t : targets) {
        if (ms.size() >= 2) {
            // first monomial vs the rest, via the addition vectors
            Expr first;
            {
                const auto& m = ms[0];
                Expr tm = Expr::constant(m.coeff);
                for (const auto& f : m.factors) {
                    if (f.atom.is_var())
                        tm *= Expr::pow(expr(f.atom.var()), expr(f.power));
                    else
                        tm *= Expr::pow(Expr::constant(f.atom.exp().base), *f.atom.exp().exponent);
                }
                first = tm;
            }
            Expr rest = en.e - first;
            for (auto [t1, t2] : limit_vectors(LimOp::Add, t)) {
                out.push_back({replace_entry(L, idx, {{first, t1}, {rest, t2}}),
                               Subst{},
                               "A(+," + tag_to_string(t) + ")"});
            }
            continue;
        }
        if (ms.size() == 1) {
            const auto& m = ms[0];
            Expr part1, part2;
            if (m.coeff != 1) {
                part1 = Expr::constant(m.coeff);
                Monomial rest{Rat(1), m.factors};
                Expr r;
                for (const auto& f : rest.factors) {
                    Expr fe = f.atom.is_var()
                                  ? Expr::pow(expr(f.atom.var()), expr(f.power))
                                  : Expr::pow(Expr::constant(f.atom.exp().base),
                                              *f.atom.exp().exponent);
                    r = r.is_zero() ? fe : r * fe;
                }
                part2 = r;
            } else if (m.factors.size() == 1 && m.factors[0].power >= 2) {
                const auto& f = m.factors[0];
                part1 = Expr::pow(expr(f.atom.var()), expr(1));
                part2 = Expr::pow(expr(f.atom.var()), expr(f.power - 1));
            } else if (m.factors.size() >= 2) {
                const auto& f = m.factors[0];
                part1 = f.atom.is_var() ? Expr::pow(expr(f.atom.var()), expr(f.power))
                                        : Expr::pow(Expr::constant(f.atom.exp().base),
                                                    *f.atom.exp().exponent);
                Expr r;
                for (size_t i = 1; i < m.factors.size(); ++i) {
                    const auto& g = m.factors[i];
                    Expr fe = g.atom.is_var()
                                  ? Expr::pow(expr(g.atom.var()), expr(g.power))
                                  : Expr::pow(Expr::constant(g.atom.exp().base),
                                              *g.atom.exp().exponent);
                    r = r.is_zero() ? fe : r * fe;
                }
                part2 = r;
            } else {
                continue;  // plain variable or single exponential atom
            }
            for (auto [t1, t2] : limit_vectors(LimOp::Mul, t)) {
                out.push_back({replace_entry(L, idx, {{part1, t1}, {part2, t2}}),
                               Subst{},
                               "A(*," + tag_to_string(t) + ")"});
            }
        }
    }
}

}  // namespace

std::vector<CalcStep> step(const LimitProblem& L, const LimitContext& ctx) {
    std::vector<CalcStep> out;
    std::set<Var> lvars = L.vars();

    // (C) bound propagation from the guard
    for (const auto& v : lvars) {
        for (auto& [var, e] : bound_candidates(ctx.guard, v)) {
            if (e.contains(var)) continue;
            Subst theta;
            theta.set(var, e);
            LimitProblem next;
            for (const auto& en : L.entries) next.entries.push_back({apply(en.e, theta), en.tag});
            next.canonicalize();
            out.push_back({std::move(next), theta, "C {" + var.name + "/" + e.to_string() + "}"});
        }
    }

    // (B) discharge constant entries
    for (size_t i = 0; i < L.entries.size(); ++i) {
        auto c = L.entries[i].e.as_constant();
        if (!c) continue;
        LimitTag t = L.entries[i].tag;
        bool pos_ok = (t == LimitTag::PosConst || t == LimitTag::OpenPos) && *c > 0;
        bool neg_ok = t == LimitTag::NegConst && *c < 0;
        if (pos_ok || neg_ok) out.push_back({replace_entry(L, i, {}), Subst{}, "B"});
    }

    // (D) univariate polynomial entries: keep the dominant monomial
    for (size_t i = 0; i < L.entries.size(); ++i) {
        const auto& en = L.entries[i];
        if (!en.e.is_polynomial() || en.e.monomials().size() < 2) continue;
        auto vs = en.e.vars();
        if (vs.size() != 1) continue;
        if (en.tag == LimitTag::PosConst || en.tag == LimitTag::NegConst) continue;
        const Var& v = *vs.begin();
        int d = en.e.degree(v);
        auto coeffs = en.e.coefficients_in(v);
        Expr lead = coeffs[d] * Expr::pow(expr(v), expr(d));
        out.push_back({replace_entry(L, i, {{lead, committed(en.tag)}}), Subst{}, "D"});
    }

    // (E) exponential entries dominate their polynomial remainder
    for (size_t i = 0; i < L.entries.size(); ++i) {
        const auto& en = L.entries[i];
        if (en.e.is_polynomial()) continue;
        if (en.tag != LimitTag::Pos && en.tag != LimitTag::OpenPos) continue;
        for (const auto& m : en.e.monomials()) {
            const ExpAtom* atom = nullptr;
            for (const auto& f : m.factors)
                if (!f.atom.is_var()) atom = &f.atom.exp();
            if (!atom || m.coeff <= 0) continue;
            if (atom->base <= 1) continue;
            out.push_back({replace_entry(L, i, {{*atom->exponent, LimitTag::Pos}}), Subst{}, "E"});
            break;
        }
    }

    // (A) splits on univariate entries
    for (size_t i = 0; i < L.entries.size(); ++i)
        if (L.entries[i].e.vars().size() <= 1 && !is_single_var(L.entries[i].e) &&
            !L.entries[i].e.is_constant())
            split_successors(L, i, out);

    // (C) small constants for sign-bounded variables
    for (size_t i = 0; i < L.entries.size(); ++i) {
        Var v;
        if (!is_single_var(L.entries[i].e, &v)) continue;
        std::vector<long> cands;
        if (L.entries[i].tag == LimitTag::PosConst) cands = {1, 2};
        if (L.entries[i].tag == LimitTag::NegConst) cands = {-1, -2};
        for (long m : cands) {
            Subst theta;
            theta.set(v, expr(m));
            LimitProblem next;
            for (const auto& en : L.entries) next.entries.push_back({apply(en.e, theta), en.tag});
            next.canonicalize();
            out.push_back(
                {std::move(next), theta, "C {" + v.name + "/" + std::to_string(m) + "}"});
        }
    }

    // (A) splits on multivariate entries
    for (size_t i = 0; i < L.entries.size(); ++i)
        if (L.entries[i].e.vars().size() > 1) split_successors(L, i, out);

    return out;
}

// ---------------------------------------------------------------------------
// SMT encoding

Formula smt_encode_entry(const Expr& a, LimitTag tag, const Var& n,
                         const std::map<Var, std::pair<Var, Var>>& templates) {
    Subst sigma;
    for (const auto& [v, mk] : templates)
        sigma.set(v, expr(mk.first) * expr(n) + expr(mk.second));
    Expr an = apply(a, sigma);
    auto coeffs = an.coefficients_in(n);
    int d = static_cast<int>(coeffs.size()) - 1;
    auto all_zero_above = [&](int i) {
        std::vector<Formula> fs;
        for (int j = i + 1; j <= d; ++j) fs.push_back(Formula::equal_zero(coeffs[j]));
        return Formula::conj(std::move(fs));
    };
    switch (tag) {
        case LimitTag::Pos:
        case LimitTag::OpenPos: {
            std::vector<Formula> ds;
            for (int i = 1; i <= d; ++i)
                ds.push_back(Formula::conj(
                    {Formula::atom(constraint_gt(coeffs[i])), all_zero_above(i)}));
            return Formula::disj(std::move(ds));
        }
        case LimitTag::Neg: {
            std::vector<Formula> ds;
            for (int i = 1; i <= d; ++i)
                ds.push_back(Formula::conj(
                    {Formula::atom(constraint_gt(-coeffs[i])), all_zero_above(i)}));
            return Formula::disj(std::move(ds));
        }
        case LimitTag::PosConst:
            return Formula::conj({all_zero_above(0), Formula::atom(constraint_gt(coeffs[0]))});
        case LimitTag::NegConst:
            return Formula::conj({all_zero_above(0), Formula::atom(constraint_gt(-coeffs[0]))});
    }
    return Formula::falsity();
}

namespace {

std::optional<FamilySubst> smt_try(const LimitProblem& L, const Expr& cost,
                                   const LimitContext& ctx, bool infinity_round,
                                   int cost_coeff_index) {
    std::set<Var> vars = L.vars();
    for (const auto& v : cost.vars()) vars.insert(v);
    std::set<Var> used = vars;
    Var n = fresh_var("n", used);
    used.insert(n);
    std::map<Var, std::pair<Var, Var>> templates;
    for (const auto& v : vars) {
        Var m = fresh_var("m_" + v.name, used);
        used.insert(m);
        Var k = fresh_var("k_" + v.name, used);
        used.insert(k);
        templates[v] = {m, k};
    }
    std::set<Var> progset(ctx.program_vars.begin(), ctx.program_vars.end());

    std::vector<Formula> parts;
    for (const auto& en : L.entries) {
        LimitTag t = en.tag;
        if (t == LimitTag::OpenPos) {
            bool prog_only = true;
            for (const auto& v : en.e.vars())
                if (!progset.count(v)) prog_only = false;
            if (en.e.is_constant())
                t = LimitTag::PosConst;  // a constant can never satisfy +
            else
                t = (infinity_round && prog_only) ? LimitTag::PosConst : LimitTag::Pos;
        }
        parts.push_back(smt_encode_entry(en.e, t, n, templates));
    }
    if (infinity_round) {
        for (const auto& v : ctx.program_vars)
            if (templates.count(v)) parts.push_back(Formula::equal_zero(expr(templates[v].first)));
    }
    if (cost_coeff_index > 0 && cost.is_polynomial()) {
        Subst sigma;
        for (const auto& [v, mk] : templates)
            sigma.set(v, expr(mk.first) * expr(n) + expr(mk.second));
        auto coeffs = apply(cost, sigma).coefficients_in(n);
        if (cost_coeff_index >= static_cast<int>(coeffs.size())) return std::nullopt;
        parts.push_back(Formula::atom(constraint_gt(coeffs[cost_coeff_index])));
    }
    Formula f = Formula::conj(std::move(parts));
    auto r = ctx.smt->check_sat_int(f);
    if (!r.sat()) return std::nullopt;

    FamilySubst fam;
    fam.n = n;
    for (const auto& [v, mk] : templates) {
        Rat m = r.model.count(mk.first) ? r.model.at(mk.first) : Rat(0);
        Rat k = r.model.count(mk.second) ? r.model.at(mk.second) : Rat(0);
        fam.map[v] = Expr::constant(m) * expr(n) + Expr::constant(k);
    }
    // re-verify the coefficient conditions symbolically
    for (const auto& en : L.entries) {
        Subst s;
        for (const auto& [v, e] : fam.map) s.set(v, e);
        Expr an = apply(en.e, s);
        auto coeffs = an.coefficients_in(n);
        int lead = -1;
        for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
            if (!coeffs[i].is_zero()) {
                lead = i;
                break;
            }
        auto cval = [&](int i) { return *coeffs[i].as_constant(); };
        bool ok = true;
        switch (en.tag) {
            case LimitTag::Pos: ok = lead >= 1 && cval(lead) > 0; break;
            case LimitTag::Neg: ok = lead >= 1 && cval(lead) < 0; break;
            case LimitTag::PosConst: ok = lead == 0 && cval(0) > 0; break;
            case LimitTag::NegConst: ok = lead == 0 && cval(0) < 0; break;
            case LimitTag::OpenPos:
                ok = lead >= 0 && cval(lead) > 0;
                break;
        }
        if (!ok) return std::nullopt;
    }
    return fam;
}

}  // namespace

std::optional<FamilySubst> smt_solve(const LimitProblem& L, const Expr& cost,
                                     const LimitContext& ctx) {
    if (!L.polynomial() || !ctx.smt) return std::nullopt;
    if (auto f = smt_try(L, cost, ctx, /*infinity=*/true, 0)) return f;
    if (cost.is_polynomial()) {
        int d = cost.total_degree();
        for (int i = d; i >= 1; --i)
            if (auto f = smt_try(L, cost, ctx, false, i)) return f;
    }
    return smt_try(L, cost, ctx, false, 0);
}

// ---------------------------------------------------------------------------
// classification and composition

AsymClass classify_family(const Expr& cost, const FamilySubst& fam,
                          const std::vector<Var>& program_vars) {
    Subst s;
    for (const auto& [v, e] : fam.map) s.set(v, e);
    Expr costn = apply(cost, s);

    bool vars_const = true;
    for (const auto& v : program_vars)
        if (!fam.of(v).is_constant()) vars_const = false;
    if (vars_const && !costn.is_constant()) return AsymClass::unbounded();
    if (costn.is_constant()) return AsymClass::constant();

    if (costn.is_polynomial()) {
        int d = costn.degree(fam.n);
        auto coeffs = costn.coefficients_in(fam.n);
        auto lead = coeffs[d].as_constant();
        if (d >= 1 && lead && *lead > 0) return AsymClass::poly(Rat(d));
        return AsymClass::constant();
    }
    // exponential: pick the strongest positively-weighted atom
    double best = 0.0;
    for (const auto& m : costn.monomials()) {
        if (m.coeff <= 0) continue;
        for (const auto& f : m.factors) {
            if (f.atom.is_var()) continue;
            const auto& ea = f.atom.exp();
            if (!ea.exponent->is_polynomial() || !ea.exponent->contains(fam.n)) continue;
            auto coeffs = ea.exponent->coefficients_in(fam.n);
            int d = static_cast<int>(coeffs.size()) - 1;
            auto lead = coeffs[d].as_constant();
            if (d >= 1 && lead && *lead > 0) {
                double hint = std::pow(ea.base.get_d(), lead->get_d());
                best = std::max(best, hint);
            }
        }
    }
    if (best > 1.0) return AsymClass::exponential(best);
    return AsymClass::constant();
}

Expr size_bound_expr(const FamilySubst& fam, const std::vector<Var>& program_vars) {
    Expr size;
    for (const auto& v : program_vars) {
        Expr e = fam.of(v);
        auto c = e.as_constant();
        if (c) {
            size += Expr::constant(*c < 0 ? -*c : *c);
            continue;
        }
        int d = e.degree(fam.n);
        auto lead = e.coefficients_in(fam.n)[d].as_constant();
        size += (lead && *lead < 0) ? -e : e;
    }
    return size;
}

AsymClass compose_bound(const AsymClass& inner, const Expr& size_expr, const Var& n) {
    if (inner.kind == AsymClass::Kind::Const || inner.kind == AsymClass::Kind::Unbounded)
        return inner;
    if (!size_expr.is_polynomial())
        throw ExprError(ExprError::Kind::NotPolynomial, "size expression is not polynomial");
    int d = size_expr.degree(n);
    if (d == 0) return AsymClass::unbounded();
    switch (inner.kind) {
        case AsymClass::Kind::Poly: {
            Rat q = inner.poly_exponent / Rat(d);
            q.canonicalize();
            return AsymClass::poly(q);
        }
        case AsymClass::Kind::Exp:
            return d == 1 ? inner : AsymClass::subexp(d);
        case AsymClass::Kind::SubExp: return AsymClass::subexp(inner.root * d);
        default: return inner;
    }
}

// ---------------------------------------------------------------------------
// search

namespace {

bool family_satisfies_guard(const Guard& g, const FamilySubst& fam) {
    if (g.is_true()) return true;
    for (long n0 : {1L, 2L, 10L, 100L, 1000L, 10000L, 100000L, 1000000L}) {
        bool ok = true;
        for (long mult : {1L, 2L, 10L}) {
            std::map<Var, Rat> v;
            std::map<Var, Rat> nval{{fam.n, Rat(n0 * mult)}};
            for (const auto& [var, e] : fam.map) {
                try {
                    v[var] = eval(e, nval);
                } catch (const ExprError&) {
                    return false;
                }
            }
            try {
                if (!eval(g, v)) {
                    ok = false;
                    break;
                }
            } catch (const ExprError&) {
                return false;
            }
        }
        if (ok) return true;
    }
    return false;
}

AsymClass ceiling_of(const Expr& cost, const std::vector<Var>& program_vars) {
    std::set<Var> progset(program_vars.begin(), program_vars.end());
    for (const auto& v : cost.vars())
        if (!progset.count(v)) return AsymClass::unbounded();
    if (!cost.is_polynomial()) return AsymClass::exponential();
    return AsymClass::poly(Rat(cost.total_degree()));
}

}  // namespace

std::optional<SearchResult> search(const LimitProblem& L0, const Expr& cost, const Rule& rule,
                                   const LimitContext& ctx) {
    struct Node {
        LimitProblem L;
        Subst acc;
        std::vector<std::string> trace;
        int depth;
    };
    std::set<Var> rule_vars = rule.all_vars();
    AsymClass ceiling = ceiling_of(cost, ctx.program_vars);

    auto full_family = [&](const FamilySubst& partial, const Subst& acc) {
        FamilySubst fam;
        fam.n = partial.n;
        Subst tail;
        for (const auto& [v, e] : partial.map) tail.set(v, e);
        Subst whole = compose(acc, tail);
        for (const auto& v : rule_vars) {
            Expr image = apply(expr(v), whole);
            // any leftover variables are pinned to 0
            Subst zero;
            for (const auto& w : image.vars())
                if (w != fam.n) zero.set(w, expr(0));
            fam.map[v] = apply(image, zero);
        }
        return fam;
    };

    std::optional<SearchResult> best;
    auto consider = [&](const FamilySubst& partial, const Node& node, const std::string& how) {
        FamilySubst fam = full_family(partial, node.acc);
        if (!family_satisfies_guard(rule.guard, fam)) return false;
        AsymClass raw = classify_family(cost, fam, ctx.program_vars);
        AsymClass cls = raw;
        if (raw.kind != AsymClass::Kind::Const && raw.kind != AsymClass::Kind::Unbounded) {
            Expr size = size_bound_expr(fam, ctx.program_vars);
            cls = compose_bound(raw, size, fam.n);
        }
        if (!best || best->cls < cls) {
            SearchResult sr;
            sr.family = fam;
            sr.cls = cls;
            sr.derivation = node.trace;
            sr.derivation.push_back(how);
            best = std::move(sr);
        }
        return best && !(best->cls < ceiling);
    };

    std::vector<Node> stack;
    LimitProblem start = L0;
    start.canonicalize();
    stack.push_back({start, Subst{}, {}, 0});
    int nodes = 0;
    while (!stack.empty()) {
        if (++nodes > ctx.node_cap) break;
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.L.dead() || node.L.contradictory()) continue;

        if (node.L.trivial()) {
            FamilySubst partial = solve_trivial(node.L, node.L.vars());
            if (consider(partial, node, "trivial")) return best;
            continue;
        }
        if (node.L.polynomial()) {
            auto f = smt_solve(node.L, cost, ctx);
            if (f && consider(*f, node, "smt")) return best;
        }
        if (node.depth >= ctx.depth_cap) continue;
        auto succs = step(node.L, ctx);
        for (auto it = succs.rbegin(); it != succs.rend(); ++it) {
            Node next;
            next.L = it->next;
            next.acc = compose(node.acc, it->theta);
            next.trace = node.trace;
            next.trace.push_back(it->rule + " -> " + it->next.to_string());
            next.depth = node.depth + 1;
            stack.push_back(std::move(next));
        }
    }
    return best;
}

BoundResult best_bound(const Program& p, const LimitContext& ctx) {
    BoundResult out;
    out.cls = AsymClass::constant();
    out.concrete_cost = expr(0);
    bool found = false;
    for (const auto& r : p.rules) {
        LimitContext local = ctx;
        local.guard = r.guard;
        LimitProblem L0 = initial_problem(r);
        auto sr = search(L0, r.cost, r, local);
        if (!sr) continue;
        if (!found || out.cls < sr->cls) {
            found = true;
            out.cls = sr->cls;
            out.witness_rule = r.id;
            out.concrete_cost = r.cost;
            out.guard = r.guard;
            out.family = sr->family;
            out.derivation = sr->derivation;
        }
    }
    return out;
}

}  // namespace itslb
