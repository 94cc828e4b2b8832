#include "itslb/metering.hpp"

#include "itslb/simplex.hpp"

#include <algorithm>
#include <sstream>

namespace itslb {

std::string Metering::to_string() const {
    std::ostringstream os;
    if (!condition.is_true()) os << "[" << condition.to_string() << "] . ";
    os << bound.to_string();
    return os.str();
}

namespace {

Constraint negate_constraint(const Constraint& c) {
    return Constraint{-c.lhs, c.rel == Rel::Gt ? Rel::Ge : Rel::Gt};
}

bool constraint_linear(const Constraint& c) {
    for (const auto& m : c.lhs.monomials()) {
        int deg = 0;
        for (const auto& f : m.factors) {
            if (!f.atom.is_var()) return false;
            deg += f.power;
        }
        if (deg > 1) return false;
    }
    return true;
}

}  // namespace

std::pair<Guard, Guard> partition_guard(const Guard& g, const Subst& mu, const SmtSolver& smt) {
    return partition_guard_multi(g, {mu}, smt);
}

std::pair<Guard, Guard> partition_guard_multi(const Guard& g, const std::vector<Subst>& mus,
                                              const SmtSolver& smt) {
    std::vector<Constraint> phi, psi;
    for (const auto& c : g.conjuncts()) {
        bool invariant = true;
        for (const auto& mu : mus) {
            Constraint image{apply(c.lhs, mu), c.rel};
            if (!smt.proves(g, image)) {
                invariant = false;
                break;
            }
        }
        (invariant ? psi : phi).push_back(c);
    }
    return {Guard(std::move(phi)), Guard(std::move(psi))};
}

// ---------------------------------------------------------------------------
// linearization

namespace {

// variables occurring in any monomial of total degree >= 2 or in exponentials
void collect_nonlinear_vars(const Expr& e, std::set<Var>& out) {
    for (const auto& m : e.monomials()) {
        int deg = 0;
        bool exp = false;
        for (const auto& f : m.factors) {
            if (!f.atom.is_var()) exp = true;
            deg += f.power;
        }
        if (deg < 2 && !exp) continue;
        for (const auto& f : m.factors) {
            if (f.atom.is_var())
                out.insert(f.atom.var());
            else
                f.atom.exp().exponent->collect_vars(out);
        }
    }
}

struct GuardLinearization {
    std::vector<Constraint> conjuncts;  // rewritten, all linear
    Subst back;                          // fresh -> original term
    std::set<Var> replaced_away;
    std::set<Var> fresh;
    std::vector<size_t> dropped;  // indices that could not be handled
};

// Tries to replace nonlinear monomials of conjunct `idx` by fresh variables.
// Occurrence side condition: the monomial's variables appear nowhere else in
// the guard or in the updates.
std::optional<Constraint> replace_nonlinear(const Guard& g, size_t idx,
                                            const std::vector<Subst>& updates,
                                            std::set<Var>& used, GuardLinearization& out) {
    const Constraint& c = g[idx];
    Expr rewritten;
    std::set<Var> elsewhere;
    for (size_t j = 0; j < g.size(); ++j)
        if (j != idx) g[j].lhs.collect_vars(elsewhere);
    for (const auto& mu : updates)
        for (const auto& [v, e] : mu.bindings()) e.collect_vars(elsewhere);

    for (const auto& m : c.lhs.monomials()) {
        int deg = 0;
        bool has_exp = false;
        for (const auto& f : m.factors) {
            if (!f.atom.is_var()) has_exp = true;
            deg += f.power;
        }
        if (deg < 2 && !has_exp) {
            Expr t = Expr::constant(m.coeff);
            for (const auto& f : m.factors)
                t *= Expr::pow(expr(f.atom.var()), expr(f.power));
            rewritten += t;
            continue;
        }
        // candidate term: the monomial without its coefficient
        Expr term = Expr::constant(Rat(1));
        std::set<Var> tvars;
        for (const auto& f : m.factors) {
            if (!f.atom.is_var()) return std::nullopt;
            term *= Expr::pow(expr(f.atom.var()), expr(f.power));
            tvars.insert(f.atom.var());
        }
        // the same variables must not occur in other monomials of this conjunct
        std::set<Var> local;
        for (const auto& m2 : c.lhs.monomials())
            if (compare(m2, m) != 0)
                for (const auto& f : m2.factors)
                    if (f.atom.is_var()) local.insert(f.atom.var());
        for (const auto& v : tvars)
            if (elsewhere.count(v) || local.count(v)) return std::nullopt;
        Var w = fresh_var("w", used);
        used.insert(w);
        out.fresh.insert(w);
        out.back.set(w, term);
        for (const auto& v : tvars) out.replaced_away.insert(v);
        rewritten += Expr::constant(m.coeff) * expr(w);
    }
    return Constraint{rewritten, c.rel};
}

GuardLinearization linearize_guard(const Guard& g, const std::vector<Subst>& updates,
                                   std::set<Var> used) {
    GuardLinearization out;
    for (size_t i = 0; i < g.size(); ++i) {
        if (constraint_linear(g[i])) {
            out.conjuncts.push_back(g[i]);
            continue;
        }
        auto rc = replace_nonlinear(g, i, updates, used, out);
        if (rc)
            out.conjuncts.push_back(*rc);
        else {
            out.conjuncts.push_back(g[i]);  // kept, flagged
            out.dropped.push_back(i);
        }
    }
    return out;
}

}  // namespace

std::optional<Linearized> linearize(const Rule& r) {
    std::vector<Subst> mus =
        classify(r) == RuleClass::SimpleLoop || classify(r) == RuleClass::SimpleRecursion
            ? updates(r)
            : std::vector<Subst>{};
    auto lin = linearize_guard(r.guard, mus, r.all_vars());
    if (!lin.dropped.empty()) return std::nullopt;
    Linearized out;
    out.rule = r;
    out.rule.guard = Guard(lin.conjuncts);
    out.back = lin.back;
    return out;
}

// ---------------------------------------------------------------------------
// synthesis

namespace {

struct LpFlatten {
    std::vector<Var> vars;
    std::map<Var, int> index;
    std::vector<LinCon> cons;
    std::vector<bool> integer;

    int idx(const Var& v, bool is_int = false) {
        auto it = index.find(v);
        if (it != index.end()) return it->second;
        int i = static_cast<int>(vars.size());
        index[v] = i;
        vars.push_back(v);
        integer.push_back(is_int);
        return i;
    }

    // linear constraint over solver variables; lhs rel 0
    void add(const Constraint& c) {
        LinCon lc;
        Rat constant(0);
        for (const auto& m : c.lhs.monomials()) {
            if (m.factors.empty()) {
                constant = m.coeff;
                continue;
            }
            lc.terms.push_back({idx(m.factors[0].atom.var()), m.coeff});
        }
        lc.rel = LinRel::Ge;
        lc.rhs = -constant;
        if (c.rel == Rel::Gt)
            throw std::logic_error("strict constraint in synthesis LP");
        cons.push_back(std::move(lc));
    }

    void add_formula(const Formula& f) {
        using K = Formula::Kind;
        switch (f.kind()) {
            case K::True: return;
            case K::Atom: add(f.get_atom()); return;
            case K::And:
                for (const auto& c : f.children()) add_formula(c);
                return;
            default: throw std::logic_error("non-conjunctive synthesis formula");
        }
    }

    void add_box(const Var& v, const Rat& lo, const Rat& hi) {
        int i = idx(v);
        cons.push_back(LinCon{{{i, Rat(1)}}, LinRel::Ge, lo});
        cons.push_back(LinCon{{{i, Rat(1)}}, LinRel::Le, hi});
    }
};

struct TemplateSetup {
    Var c0;
    std::map<Var, Var> coeff_of;  // template variable -> coefficient variable
    Expr bound;
};

TemplateSetup make_template(const std::set<Var>& template_vars, std::set<Var>& used) {
    TemplateSetup t;
    t.c0 = fresh_var("c0", used);
    used.insert(t.c0);
    t.bound = expr(t.c0);
    int n = 0;
    for (const auto& v : template_vars) {
        Var cv = fresh_var("c" + std::to_string(++n), used);
        used.insert(cv);
        t.coeff_of[v] = cv;
        t.bound += expr(cv) * expr(v);
    }
    return t;
}

struct SynthesisProblem {
    Guard phi, psi;                  // original partition
    std::vector<Constraint> phi_lin;  // linearized premises
    std::vector<Constraint> psi_lin;
    std::vector<Subst> mus;
    std::set<Var> universal;
    std::set<Var> template_vars;
    Subst back;
};

std::optional<SynthesisProblem> prepare(const Rule& r, const Guard& phi, const Guard& psi,
                                        const std::vector<Subst>& mus) {
    SynthesisProblem p;
    p.phi = phi;
    p.psi = psi;
    p.mus = mus;
    std::set<Var> used = r.all_vars();

    auto phi_lin = linearize_guard(phi, mus, used);
    for (const auto& v : phi_lin.fresh) used.insert(v);
    if (!phi_lin.dropped.empty()) return std::nullopt;  // negated premise would be lost
    auto psi_lin = linearize_guard(psi, mus, used);
    p.back = phi_lin.back;
    for (const auto& [w, t] : psi_lin.back.bindings()) p.back.set(w, t);

    p.phi_lin = phi_lin.conjuncts;
    for (size_t i = 0; i < psi_lin.conjuncts.size(); ++i) {
        bool dropped = std::find(psi_lin.dropped.begin(), psi_lin.dropped.end(), i) !=
                       psi_lin.dropped.end();
        if (!dropped) p.psi_lin.push_back(psi_lin.conjuncts[i]);
        // unhandled nonlinear invariants are omitted from the premises (sound)
    }

    p.universal = r.all_vars();
    for (const auto& v : phi_lin.replaced_away) p.universal.erase(v);
    for (const auto& v : psi_lin.replaced_away) p.universal.erase(v);
    for (const auto& v : phi_lin.fresh) p.universal.insert(v);
    for (const auto& v : psi_lin.fresh) p.universal.insert(v);

    p.template_vars = p.universal;
    for (const auto& mu : mus)
        for (const auto& [v, e] : mu.bindings()) {
            Constraint probe{e, Rel::Ge};
            if (!constraint_linear(probe)) p.template_vars.erase(v);
            std::set<Var> evars = e.vars();
            for (const auto& w : evars)
                if (!p.universal.count(w)) p.template_vars.erase(v);
        }
    return p;
}

std::optional<Expr> solve_template(const SynthesisProblem& p, const Rule& r,
                                   const SmtSolver& smt, bool with_rank) {
    std::set<Var> used = p.universal;
    for (const auto& [w, t] : p.back.bindings()) used.insert(w);
    TemplateSetup tmpl = make_template(p.template_vars, used);

    int fresh = 0;
    std::vector<Formula> system;
    Guard prem_full = Guard(p.phi_lin).conjoin(Guard(p.psi_lin));
    // descent: phi ∧ psi => b(mu) >= b - 1, per update
    for (const auto& mu : p.mus) {
        Expr concl = apply(tmpl.bound, mu) - tmpl.bound + expr(1);
        system.push_back(farkas_encode(prem_full, constraint_ge(concl), p.universal, fresh));
    }
    // exhaustion: (¬phi_i ∧ psi) => b <= 0, per phi conjunct
    for (const auto& c : p.phi_lin) {
        std::vector<Constraint> prem = p.psi_lin;
        prem.push_back(negate_constraint(c));
        system.push_back(
            farkas_encode(Guard(std::move(prem)), constraint_ge(-tmpl.bound), p.universal, fresh));
    }
    if (with_rank)
        system.push_back(
            farkas_encode(prem_full, constraint_ge(tmpl.bound - expr(1)), p.universal, fresh));

    LpFlatten lp;
    lp.idx(tmpl.c0, true);
    for (const auto& [v, cv] : tmpl.coeff_of) lp.idx(cv, false);
    try {
        for (const auto& f : system) lp.add_formula(f);
    } catch (const ExprError&) {
        return std::nullopt;
    }
    lp.add_box(tmpl.c0, Rat(-16), Rat(16));
    for (const auto& [v, cv] : tmpl.coeff_of) lp.add_box(cv, Rat(-4), Rat(4));

    // reference point: a model of the rule's guard
    std::map<Var, Rat> ref;
    auto gm = smt.guard_sat(r.guard);
    if (gm.sat()) ref = gm.model;

    int n = static_cast<int>(lp.vars.size());
    std::vector<Rat> obj1(n, Rat(0));
    obj1[lp.index.at(tmpl.c0)] = Rat(1);
    for (const auto& [v, cv] : tmpl.coeff_of) {
        auto it = ref.find(v);
        obj1[lp.index.at(cv)] = it != ref.end() ? it->second : Rat(0);
    }
    bool exhausted = false;
    auto r1 = mip_maximize(n, lp.cons, obj1, lp.integer, 4000, &exhausted);
    if (!r1 || r1->status != LpStatus::Optimal) return std::nullopt;

    // pin the first objective, then maximize the slope mass
    auto cons2 = lp.cons;
    LinCon pin;
    for (int i = 0; i < n; ++i)
        if (obj1[i] != 0) pin.terms.push_back({i, obj1[i]});
    pin.rel = LinRel::Eq;
    pin.rhs = r1->value;
    cons2.push_back(pin);
    std::vector<Rat> obj2(n, Rat(0));
    for (const auto& [v, cv] : tmpl.coeff_of) obj2[lp.index.at(cv)] = Rat(1);
    auto r2 = mip_maximize(n, cons2, obj2, lp.integer, 4000, &exhausted);
    const auto& point = (r2 && r2->status == LpStatus::Optimal) ? r2->point : r1->point;

    Expr b = Expr::constant(point[lp.index.at(tmpl.c0)]);
    for (const auto& [v, cv] : tmpl.coeff_of)
        b += Expr::constant(point[lp.index.at(cv)]) * expr(v);
    if (b.is_zero()) return std::nullopt;
    return apply(b, p.back);
}

std::optional<Metering> synthesize(const Rule& r, const Guard& phi, const Guard& psi,
                                   const std::vector<Subst>& mus, const SmtSolver& smt,
                                   Metering::Tag tag) {
    auto prob = prepare(r, phi, psi, mus);
    if (!prob) return std::nullopt;

    std::optional<Expr> b = solve_template(*prob, r, smt, /*with_rank=*/true);
    if (!b) {
        b = solve_template(*prob, r, smt, /*with_rank=*/false);
        if (!b) return std::nullopt;
        // non-triviality: the bound must be positive somewhere on the guard
        Formula pos = Formula::conj({Formula::of_guard(r.guard),
                                     Formula::atom(constraint_gt(*b))});
        if (!smt.check_sat_int(pos).sat()) return std::nullopt;
    }

    // soundness re-check on the original (non-linearized) conditions
    for (const auto& mu : mus) {
        Constraint descent = constraint_ge(apply(*b, mu) - *b + expr(1));
        Guard prem = phi.conjoin(psi);
        auto v = smt.implies(prem, descent);
        if (v.status == Validity::Status::Invalid) return std::nullopt;
    }
    for (const auto& c : phi.conjuncts()) {
        std::vector<Constraint> prem = psi.conjuncts();
        prem.push_back(negate_constraint(c));
        auto v = smt.implies(Guard(std::move(prem)), constraint_ge(-*b));
        if (v.status == Validity::Status::Invalid) return std::nullopt;
    }

    Metering m;
    m.condition = psi;
    m.bound = *b;
    m.tag = tag;
    return m;
}

}  // namespace

std::optional<Metering> find_metering(const Rule& r, const SmtSolver& smt) {
    if (classify(r) != RuleClass::SimpleLoop) return std::nullopt;
    Subst mu = update(r);
    auto [phi, psi] = partition_guard(r.guard, mu, smt);

    // whole guard invariant: the loop cannot terminate; a fresh temporary
    // bounds nothing, witnessing unboundedly many iterations
    if (phi.is_true() && !r.guard.is_true()) {
        if (smt.guard_sat(r.guard).sat()) {
            Metering m;
            m.condition = psi;
            m.bound = expr(fresh_var("tv", r.all_vars()));
            m.tag = Metering::Tag::Conditional;
            m.fresh_tv = true;
            return m;
        }
        return std::nullopt;
    }
    return synthesize(r, phi, psi, {mu}, smt,
                      psi.is_true() ? Metering::Tag::Plain : Metering::Tag::Conditional);
}

std::optional<Metering> find_metering_rec(const Rule& r, const SmtSolver& smt) {
    if (classify(r) != RuleClass::SimpleRecursion) return std::nullopt;
    std::vector<Subst> mus = updates(r);
    auto [phi, psi] = partition_guard_multi(r.guard, mus, smt);
    return synthesize(r, phi, psi, mus, smt, Metering::Tag::Recursion);
}

}  // namespace itslb
