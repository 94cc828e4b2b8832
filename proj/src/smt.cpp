#include "itslb/smt.hpp"

#include "itslb/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>

namespace itslb {

// ---------------------------------------------------------------------------
// Formula

Formula Formula::atom(Constraint c) {
    auto gv = c.ground_value();
    if (gv) return *gv ? truth() : falsity();
    Formula f(Kind::Atom);
    f.atom_ = std::move(c);
    return f;
}

Formula Formula::conj(std::vector<Formula> fs) {
    std::vector<Formula> kept;
    for (auto& f : fs) {
        if (f.kind_ == Kind::False) return falsity();
        if (f.kind_ == Kind::True) continue;
        if (f.kind_ == Kind::And)
            for (auto& c : f.children_) kept.push_back(std::move(c));
        else
            kept.push_back(std::move(f));
    }
    if (kept.empty()) return truth();
    if (kept.size() == 1) return kept[0];
    Formula f(Kind::And);
    f.children_ = std::move(kept);
    return f;
}

Formula Formula::disj(std::vector<Formula> fs) {
    std::vector<Formula> kept;
    for (auto& f : fs) {
        if (f.kind_ == Kind::True) return truth();
        if (f.kind_ == Kind::False) continue;
        if (f.kind_ == Kind::Or)
            for (auto& c : f.children_) kept.push_back(std::move(c));
        else
            kept.push_back(std::move(f));
    }
    if (kept.empty()) return falsity();
    if (kept.size() == 1) return kept[0];
    Formula f(Kind::Or);
    f.children_ = std::move(kept);
    return f;
}

Formula Formula::neg(Formula f) {
    switch (f.kind_) {
        case Kind::True: return falsity();
        case Kind::False: return truth();
        default: break;
    }
    Formula g(Kind::Not);
    g.children_.push_back(std::move(f));
    return g;
}

Formula Formula::of_guard(const Guard& g) {
    std::vector<Formula> fs;
    for (const auto& c : g.conjuncts()) fs.push_back(atom(c));
    return conj(std::move(fs));
}

Formula Formula::equal_zero(const Expr& e) {
    return conj({atom(constraint_ge(e)), atom(constraint_ge(-e))});
}

void Formula::collect_vars(std::set<Var>& out) const {
    if (kind_ == Kind::Atom) atom_.lhs.collect_vars(out);
    for (const auto& c : children_) c.collect_vars(out);
}

std::string Formula::to_string() const {
    switch (kind_) {
        case Kind::True: return "true";
        case Kind::False: return "false";
        case Kind::Atom: return atom_.to_string();
        case Kind::Not: return "!(" + children_[0].to_string() + ")";
        case Kind::And:
        case Kind::Or: {
            std::string sep = kind_ == Kind::And ? " && " : " || ";
            std::string s = "(";
            for (size_t i = 0; i < children_.size(); ++i) {
                if (i) s += sep;
                s += children_[i].to_string();
            }
            return s + ")";
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// built-in solver

namespace {

Constraint negate(const Constraint& c) {
    // !(p > 0) == -p >= 0, !(p >= 0) == -p > 0
    return Constraint{-c.lhs, c.rel == Rel::Gt ? Rel::Ge : Rel::Gt};
}

// negation normal form with atoms only under no Not
Formula to_nnf(const Formula& f, bool negated) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::True: return negated ? Formula::falsity() : Formula::truth();
        case K::False: return negated ? Formula::truth() : Formula::falsity();
        case K::Atom:
            return Formula::atom(negated ? negate(f.get_atom()) : f.get_atom());
        case K::Not: return to_nnf(f.children()[0], !negated);
        case K::And:
        case K::Or: {
            std::vector<Formula> cs;
            for (const auto& c : f.children()) cs.push_back(to_nnf(c, negated));
            bool conj = (f.kind() == K::And) != negated;
            return conj ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
        }
    }
    return Formula::falsity();
}

using Conjunct = std::vector<Constraint>;

bool dnf_of(const Formula& nnf, std::vector<Conjunct>& out, size_t cap) {
    using K = Formula::Kind;
    switch (nnf.kind()) {
        case K::True: out.push_back({}); return true;
        case K::False: return true;
        case K::Atom: out.push_back({nnf.get_atom()}); return true;
        case K::Or: {
            for (const auto& c : nnf.children()) {
                if (!dnf_of(c, out, cap)) return false;
                if (out.size() > cap) return false;
            }
            return true;
        }
        case K::And: {
            std::vector<Conjunct> acc = {{}};
            for (const auto& child : nnf.children()) {
                std::vector<Conjunct> sub;
                if (!dnf_of(child, sub, cap)) return false;
                std::vector<Conjunct> next;
                for (const auto& a : acc)
                    for (const auto& b : sub) {
                        Conjunct merged = a;
                        merged.insert(merged.end(), b.begin(), b.end());
                        next.push_back(std::move(merged));
                        if (next.size() > cap) return false;
                    }
                acc = std::move(next);
            }
            for (auto& c : acc) out.push_back(std::move(c));
            return out.size() <= cap;
        }
        case K::Not: return false;  // nnf has no Not
    }
    return false;
}

bool is_linear(const Expr& e) {
    for (const auto& m : e.monomials()) {
        if (m.factors.empty()) continue;
        if (m.factors.size() > 1) return false;
        if (!m.factors[0].atom.is_var() || m.factors[0].power != 1) return false;
    }
    return true;
}

// lhs is a single monomial c * v^(2k) with c < 0: `>= 0` forces v = 0,
// `> 0` is unsatisfiable.
struct SquareRewrite {
    bool contradiction = false;
    std::vector<Var> zeroed;
};

SquareRewrite square_rewrite_step(const Conjunct& cs) {
    SquareRewrite r;
    for (const auto& c : cs) {
        const auto& ms = c.lhs.monomials();
        if (ms.size() != 1) continue;
        const auto& m = ms[0];
        if (m.coeff >= 0 || m.factors.size() != 1) continue;
        const auto& f = m.factors[0];
        if (!f.atom.is_var() || f.power % 2 != 0) continue;
        if (c.rel == Rel::Gt) {
            r.contradiction = true;
            return r;
        }
        r.zeroed.push_back(f.atom.var());
    }
    return r;
}

struct LinearEncoding {
    std::vector<Var> vars;
    std::map<Var, int> index;
    std::vector<LinCon> cons;
    std::vector<bool> integer;
    bool has_strict = false;
    int tau = -1;  // shared slack for strict constraints over rationals
};

// Scale a constraint so every coefficient (and the constant) is integral;
// over all-integer variables tighten p > 0 to p >= 1.
void encode_constraint(const Constraint& c, const std::map<Var, VarType>& types,
                       LinearEncoding& enc) {
    Int lcm(1);
    for (const auto& m : c.lhs.monomials())
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), m.coeff.get_den().get_mpz_t());
    Expr scaled = c.lhs * Expr::constant(Rat(lcm));
    bool all_int = true;
    LinCon lc;
    Rat constant(0);
    for (const auto& m : scaled.monomials()) {
        if (m.factors.empty()) {
            constant = m.coeff;
            continue;
        }
        const Var& v = m.factors[0].atom.var();
        auto it = types.find(v);
        if (it != types.end() && it->second == VarType::Rational) all_int = false;
        if (!enc.index.count(v)) {
            enc.index[v] = static_cast<int>(enc.vars.size());
            enc.vars.push_back(v);
            enc.integer.push_back(true);
        }
        lc.terms.push_back({enc.index[v], m.coeff});
    }
    lc.rel = LinRel::Ge;
    lc.rhs = -constant;
    if (c.rel == Rel::Gt) {
        if (all_int) {
            lc.rhs = rat_floor(lc.rhs) + 1;
        } else {
            // strict over rationals: p >= tau with a shared tau maximized later;
            // the sentinel index -1 is replaced once tau's index is known
            enc.has_strict = true;
            lc.terms.push_back({-1, Rat(0)});
        }
    }
    enc.cons.push_back(std::move(lc));
}

SmtOutcome solve_linear(const Conjunct& cs, const std::map<Var, VarType>& types,
                        const std::set<Var>& all_vars, int node_cap) {
    LinearEncoding enc;
    for (const auto& c : cs) encode_constraint(c, types, enc);
    for (auto& [v, i] : enc.index) {
        auto it = types.find(v);
        enc.integer[i] = !(it != types.end() && it->second == VarType::Rational);
    }
    int n = static_cast<int>(enc.vars.size());
    // materialize the shared strict slack
    if (enc.has_strict) {
        enc.tau = n++;
        enc.integer.push_back(false);
        for (auto& lc : enc.cons) {
            if (!lc.terms.empty() && lc.terms.back().first == -1) {
                lc.terms.pop_back();
                lc.terms.push_back({enc.tau, Rat(-1)});
            }
        }
        enc.cons.push_back(LinCon{{{enc.tau, Rat(1)}}, LinRel::Le, Rat(1)});
        enc.cons.push_back(LinCon{{{enc.tau, Rat(1)}}, LinRel::Ge, Rat(0)});
    }
    std::vector<Rat> obj(n, Rat(0));
    if (enc.tau >= 0) obj[enc.tau] = Rat(1);
    bool exhausted = false;
    auto res = mip_maximize(n, enc.cons, obj, enc.integer, node_cap, &exhausted);
    SmtOutcome out;
    if (!res) {
        out.status = exhausted ? SmtOutcome::Status::Unknown : SmtOutcome::Status::Unsat;
        if (exhausted) out.reason = "branch-and-bound budget exhausted";
        return out;
    }
    if (enc.tau >= 0 && res->point[enc.tau] == 0) {
        // sup of the strict slack is 0: no interior point exists
        out.status = exhausted ? SmtOutcome::Status::Unknown : SmtOutcome::Status::Unsat;
        return out;
    }
    out.status = SmtOutcome::Status::Sat;
    for (const auto& v : all_vars) out.model[v] = Rat(0);
    for (int i = 0; i < static_cast<int>(enc.vars.size()); ++i) out.model[enc.vars[i]] = res->point[i];
    return out;
}

bool conjunct_holds(const Conjunct& cs, const std::map<Var, Rat>& val) {
    for (const auto& c : cs)
        if (!eval(c, val)) return false;
    return true;
}

// Linear relaxation for unsat proofs: each distinct nonlinear monomial becomes
// a fresh variable; all-even-power monomials additionally get w >= 0.
bool relaxation_unsat(const Conjunct& cs, int node_cap) {
    std::vector<std::vector<Factor>> monos;
    auto mono_index = [&](const std::vector<Factor>& fs) {
        for (size_t i = 0; i < monos.size(); ++i) {
            if (monos[i].size() != fs.size()) continue;
            bool eq = true;
            for (size_t j = 0; j < fs.size(); ++j)
                if (compare(monos[i][j].atom, fs[j].atom) != 0 ||
                    monos[i][j].power != fs[j].power) {
                    eq = false;
                    break;
                }
            if (eq) return static_cast<int>(i);
        }
        monos.push_back(fs);
        return static_cast<int>(monos.size()) - 1;
    };
    std::vector<LinCon> cons;
    for (const auto& c : cs) {
        LinCon lc;
        Rat constant(0);
        for (const auto& m : c.lhs.monomials()) {
            if (m.factors.empty()) {
                constant = m.coeff;
                continue;
            }
            lc.terms.push_back({mono_index(m.factors), m.coeff});
        }
        lc.rel = LinRel::Ge;
        lc.rhs = -constant;
        if (c.rel == Rel::Gt) {
            // weaken strict to non-strict: still a relaxation
        }
        cons.push_back(std::move(lc));
    }
    int n = static_cast<int>(monos.size());
    for (int i = 0; i < n; ++i) {
        bool all_even = true;
        for (const auto& f : monos[i])
            if (f.power % 2 != 0) all_even = false;
        if (all_even && !monos[i].empty())
            cons.push_back(LinCon{{{i, Rat(1)}}, LinRel::Ge, Rat(0)});
    }
    auto res = lp_maximize(n, cons, std::vector<Rat>(n, Rat(0)));
    (void)node_cap;
    return res.status == LpStatus::Infeasible;
}

SmtOutcome search_models(const Conjunct& cs, const std::map<Var, VarType>& types,
                         const std::set<Var>& all_vars, const std::set<Var>& cvars) {
    std::vector<Var> vs(cvars.begin(), cvars.end());
    size_t k = vs.size();
    int bound = k <= 2 ? 8 : k <= 4 ? 5 : k <= 6 ? 3 : 2;
    if (k > 8) return SmtOutcome{SmtOutcome::Status::Unknown, {}, "too many variables"};
    std::vector<Rat> values;
    values.push_back(Rat(0));
    for (int b = 1; b <= bound; ++b) {
        values.push_back(Rat(b));
        values.push_back(Rat(-b));
    }
    // rational-typed variables also try halves
    std::vector<size_t> idx(k, 0);
    std::vector<std::vector<Rat>> domain(k);
    for (size_t i = 0; i < k; ++i) {
        domain[i] = values;
        auto it = types.find(vs[i]);
        if (it != types.end() && it->second == VarType::Rational)
            for (int b = 1; b <= bound; ++b) domain[i].push_back(Rat(2 * b - 1, 2));
    }
    std::map<Var, Rat> val;
    while (true) {
        for (size_t i = 0; i < k; ++i) val[vs[i]] = domain[i][idx[i]];
        if (conjunct_holds(cs, val)) {
            SmtOutcome out;
            out.status = SmtOutcome::Status::Sat;
            for (const auto& v : all_vars) out.model[v] = Rat(0);
            for (auto& [v, q] : val) out.model[v] = q;
            return out;
        }
        size_t i = 0;
        for (; i < k; ++i) {
            if (idx[i] + 1 < domain[i].size()) {
                ++idx[i];
                break;
            }
            idx[i] = 0;
        }
        if (i == k) break;
    }
    return SmtOutcome{SmtOutcome::Status::Unknown, {}, "bounded model search exhausted"};
}

SmtOutcome solve_conjunct(Conjunct cs, const std::map<Var, VarType>& types,
                          const std::set<Var>& all_vars, int node_cap) {
    // ground simplification + even-power rewriting to fixpoint
    Subst zeros;
    while (true) {
        Conjunct kept;
        for (const auto& c : cs) {
            Constraint cc{apply(c.lhs, zeros), c.rel};
            auto gv = cc.ground_value();
            if (gv) {
                if (!*gv) return SmtOutcome{SmtOutcome::Status::Unsat, {}, ""};
                continue;
            }
            kept.push_back(std::move(cc));
        }
        cs = std::move(kept);
        auto rw = square_rewrite_step(cs);
        if (rw.contradiction) return SmtOutcome{SmtOutcome::Status::Unsat, {}, ""};
        if (rw.zeroed.empty()) break;
        for (const auto& v : rw.zeroed) zeros.set(v, expr(0));
    }
    if (cs.empty()) {
        SmtOutcome out;
        out.status = SmtOutcome::Status::Sat;
        for (const auto& v : all_vars) out.model[v] = Rat(0);
        for (const auto& [v, e] : zeros.bindings()) out.model[v] = Rat(0);
        return out;
    }

    bool linear = true;
    std::set<Var> cvars;
    bool has_exp = false;
    for (const auto& c : cs) {
        if (!is_linear(c.lhs)) linear = false;
        if (!c.lhs.is_polynomial()) has_exp = true;
        c.lhs.collect_vars(cvars);
    }
    SmtOutcome out;
    if (linear) {
        out = solve_linear(cs, types, all_vars, node_cap);
    } else if (has_exp) {
        out = search_models(cs, types, all_vars, cvars);
    } else {
        if (relaxation_unsat(cs, node_cap)) {
            out.status = SmtOutcome::Status::Unsat;
        } else {
            out = search_models(cs, types, all_vars, cvars);
        }
    }
    if (out.sat())
        for (const auto& [v, e] : zeros.bindings()) out.model[v] = Rat(0);
    return out;
}

}  // namespace

SmtOutcome SmtSolver::check_sat(const Formula& f, const std::map<Var, VarType>& types,
                                int timeout_ms) const {
    (void)timeout_ms;
    if (!opts_.solver_command.empty()) {
        std::set<Var> vars;
        f.collect_vars(vars);
        bool poly = true;
        // exponential subterms are never sent to the backend
        Formula nnf = to_nnf(f, false);
        std::vector<Conjunct> probe;
        if (dnf_of(nnf, probe, 4096)) {
            for (const auto& cj : probe)
                for (const auto& c : cj)
                    if (!c.lhs.is_polynomial()) poly = false;
        }
        if (poly) {
            auto r = run_smtlib_process(opts_.solver_command, f, types,
                                        timeout_ms > 0 ? timeout_ms : opts_.timeout_ms);
            if (!r.unknown()) return r;
        }
    }
    Formula nnf = to_nnf(f, false);
    std::vector<Conjunct> dnf;
    if (!dnf_of(nnf, dnf, 2048))
        return SmtOutcome{SmtOutcome::Status::Unknown, {}, "formula too large for DNF"};
    std::set<Var> all_vars;
    f.collect_vars(all_vars);
    bool any_unknown = false;
    for (auto& cj : dnf) {
        auto r = solve_conjunct(std::move(cj), types, all_vars, opts_.search_node_cap);
        if (r.sat()) return r;
        if (r.unknown()) any_unknown = true;
    }
    if (any_unknown)
        return SmtOutcome{SmtOutcome::Status::Unknown, {}, "some branch undecided"};
    return SmtOutcome{SmtOutcome::Status::Unsat, {}, ""};
}

Validity SmtSolver::is_valid(const Formula& f, const std::map<Var, VarType>& types,
                             int timeout_ms) const {
    auto r = check_sat(Formula::neg(f), types, timeout_ms);
    Validity v;
    if (r.unsat()) {
        v.status = Validity::Status::Valid;
    } else if (r.sat()) {
        v.status = Validity::Status::Invalid;
        v.counterexample = std::move(r.model);
    }
    return v;
}

SmtOutcome SmtSolver::check_sat_int(const Formula& f, int timeout_ms) const {
    return check_sat(f, {}, timeout_ms);
}

Validity SmtSolver::implies(const Guard& premise, const Constraint& conclusion) const {
    Formula f = Formula::disj({Formula::neg(Formula::of_guard(premise)),
                               Formula::atom(conclusion)});
    return is_valid(f, {});
}

bool SmtSolver::proves(const Guard& premise, const Constraint& conclusion) const {
    return implies(premise, conclusion).valid();
}

SmtOutcome SmtSolver::guard_sat(const Guard& g) const {
    return check_sat_int(Formula::of_guard(g));
}

}  // namespace itslb
