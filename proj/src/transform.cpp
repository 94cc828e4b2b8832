#include "itslb/transform.hpp"

#include <algorithm>

namespace itslb {

Guard simplify_guard(const Guard& g, const SmtSolver& smt) {
    std::vector<Constraint> kept(g.conjuncts());
    for (size_t i = 0; i < kept.size();) {
        std::vector<Constraint> rest;
        for (size_t j = 0; j < kept.size(); ++j)
            if (j != i) rest.push_back(kept[j]);
        if (!rest.empty() && smt.proves(Guard(rest), kept[i]))
            kept.erase(kept.begin() + i);
        else
            ++i;
    }
    return Guard(std::move(kept));
}

TransformedRule accelerate_loop(const Rule& r, const Metering& m, const Subst& mu_it,
                                const Expr& cost_it, const Var& tv, const SmtSolver& smt) {
    if (classify(r) != RuleClass::SimpleLoop)
        throw TransformError(TransformError::Kind::NotSimpleLoop, "accelerate_loop");
    TransformedRule out;
    out.rule.lhs_root = r.lhs_root;
    out.rule.lhs_vars = r.lhs_vars;
    out.rule.cost = cost_it;
    Term t;
    t.root = r.lhs_root;
    for (const auto& v : r.lhs_vars) t.args.push_back(apply(expr(v), mu_it));
    out.rule.rhs.push_back(std::move(t));

    std::vector<Constraint> cs(r.guard.conjuncts());
    for (const auto& c : m.condition.conjuncts()) cs.push_back(c);
    cs.push_back(constraint_gt(expr(tv)));
    if (!m.fresh_tv) cs.push_back(constraint_gt(m.bound + expr(1) - expr(tv)));
    out.rule.guard = simplify_guard(Guard(std::move(cs)), smt);
    out.rule.normalize_rhs();

    out.prov.kind = Provenance::Kind::Accelerated;
    out.prov.parents = {r.id};
    out.prov.accel = AccelInfo{update(r), mu_it, r.cost, cost_it, tv, m};
    return out;
}

TransformedRule accelerate_recursion(const Rule& r, const Metering& m, const SmtSolver& smt) {
    if (classify(r) != RuleClass::SimpleRecursion)
        throw TransformError(TransformError::Kind::NotSimpleLoop, "accelerate_recursion");
    int d = r.degree();
    TransformedRule out;
    out.rule.lhs_root = r.lhs_root;
    out.rule.lhs_vars = r.lhs_vars;

    std::vector<Constraint> cs(r.guard.conjuncts());
    if (!smt.proves(r.guard, constraint_ge(r.cost - expr(1))))
        cs.push_back(constraint_ge(r.cost - expr(1)));
    for (const auto& c : m.condition.conjuncts()) cs.push_back(c);

    // (d^b - 1)/(d - 1)
    Rat inv = rat(1, d - 1);
    out.rule.cost =
        Expr::constant(inv) * (Expr::pow(expr(d), m.bound) - expr(1));
    out.rule.rhs.push_back(sink_term(static_cast<int>(r.lhs_vars.size())));
    out.rule.guard = simplify_guard(Guard(std::move(cs)), smt);

    out.prov.kind = Provenance::Kind::AcceleratedRecursion;
    out.prov.parents = {r.id};
    AccelInfo info;
    info.cost = r.cost;
    info.cost_it = out.rule.cost;
    info.metering = m;
    out.prov.accel = info;
    return out;
}

TransformedRule instantiate(const Rule& r, const Var& tv, const Expr& b, const SmtSolver& smt) {
    (void)smt;
    auto temps = r.temp_vars();
    if (!temps.count(tv))
        throw TransformError(TransformError::Kind::NotTemporary, tv.name + " is not temporary");
    if (!b.is_polynomial() || !maps_to_int(b))
        throw TransformError(TransformError::Kind::IntegralityUnprovable,
                             b.to_string() + " may not map to the integers");
    Subst s;
    s.set(tv, b);
    TransformedRule out;
    out.rule.lhs_root = r.lhs_root;
    out.rule.lhs_vars = r.lhs_vars;
    out.rule.cost = apply(r.cost, s);
    out.rule.guard = apply(r.guard, s);
    for (const auto& t : r.rhs) {
        Term nt;
        nt.root = t.root;
        for (const auto& a : t.args) nt.args.push_back(apply(a, s));
        out.rule.rhs.push_back(std::move(nt));
    }
    out.rule.normalize_rhs();
    out.prov.kind = Provenance::Kind::Instantiated;
    out.prov.parents = {r.id};
    out.prov.subst = s;
    return out;
}

std::optional<std::pair<Var, Expr>> instantiate_heuristic(const Rule& r, const SmtSolver& smt) {
    auto temps = r.temp_vars();
    if (temps.empty()) return std::nullopt;

    struct Candidate {
        Var tv;
        Expr bound;
        bool upper;
    };
    std::vector<Candidate> cands;
    for (const auto& tv : temps) {
        for (const auto& c : r.guard.conjuncts()) {
            auto a = c.lhs.linear_coeff(tv);
            if (!a || *a == 0) continue;
            Expr rest = c.lhs - Expr::constant(*a) * expr(tv);
            if (rest.contains(tv)) continue;
            // a*tv + rest rel 0: tv >= -rest/a (a>0) or tv <= -rest/a (a<0)
            Rat inv = 1 / *a;
            inv.canonicalize();
            Expr base = Expr::constant(-inv) * rest;
            if (!base.is_polynomial()) continue;
            bool upper = *a < 0;
            Expr bound = base;
            if (c.rel == Rel::Gt) {
                if (!maps_to_int(base)) continue;  // cannot tighten a fractional bound
                bound = upper ? base - expr(1) : base + expr(1);
            } else if (!maps_to_int(base)) {
                continue;
            }
            cands.push_back(Candidate{tv, bound, upper});
        }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.upper > b.upper; });
    for (const auto& cand : cands) {
        // minimal upper: guard => tv <= e but not tv <= e-1 (dually for lower)
        Expr diff = cand.upper ? cand.bound - expr(cand.tv) : expr(cand.tv) - cand.bound;
        if (!smt.proves(r.guard, constraint_ge(diff))) continue;
        if (smt.proves(r.guard, constraint_ge(diff - expr(1)))) continue;
        return std::make_pair(cand.tv, cand.bound);
    }
    return std::nullopt;
}

TransformedRule chain(const Rule& r1, const Rule& r2, size_t at, const SmtSolver& smt) {
    if (at >= r1.rhs.size() || r1.rhs[at].root != r2.lhs_root)
        throw TransformError(TransformError::Kind::RootMismatch, "chain occurrence mismatch");

    // rename r2's temporaries away from r1's variables
    std::set<Var> avoid = r1.all_vars();
    for (const auto& v : r2.all_vars()) avoid.insert(v);
    Subst rename;
    for (const auto& tv : r2.temp_vars()) {
        if (!r1.all_vars().count(tv)) continue;
        Var f = fresh_var(tv.name, avoid);
        avoid.insert(f);
        rename.set(tv, expr(f));
    }
    Expr cost2 = apply(r2.cost, rename);
    Guard guard2 = apply(r2.guard, rename);
    std::vector<Term> rhs2;
    for (const auto& t : r2.rhs) {
        Term nt;
        nt.root = t.root;
        for (const auto& a : t.args) nt.args.push_back(apply(a, rename));
        rhs2.push_back(std::move(nt));
    }

    // connection substitution {x⃗ / args(at)}
    Subst mu;
    for (size_t i = 0; i < r2.lhs_vars.size() && i < r1.rhs[at].args.size(); ++i)
        mu.set(r2.lhs_vars[i], r1.rhs[at].args[i]);

    TransformedRule out;
    out.rule.lhs_root = r1.lhs_root;
    out.rule.lhs_vars = r1.lhs_vars;
    out.rule.cost = r1.cost + apply(cost2, mu);
    std::vector<Constraint> cs(r1.guard.conjuncts());
    for (const auto& c : apply(guard2, mu).conjuncts()) cs.push_back(c);
    out.rule.guard = Guard(std::move(cs));
    if (!out.rule.guard.is_ground_false()) out.rule.guard = simplify_guard(out.rule.guard, smt);
    for (size_t i = 0; i < r1.rhs.size(); ++i)
        if (i != at) out.rule.rhs.push_back(r1.rhs[i]);
    for (const auto& t : rhs2) {
        Term nt;
        nt.root = t.root;
        for (const auto& a : t.args) nt.args.push_back(apply(a, mu));
        out.rule.rhs.push_back(std::move(nt));
    }
    // drop sink occurrences produced by degree->degree chaining
    if (out.rule.rhs.size() > 1) {
        out.rule.rhs.erase(std::remove_if(out.rule.rhs.begin(), out.rule.rhs.end(),
                                          [](const Term& t) { return t.root == kSinkSymbol; }),
                           out.rule.rhs.end());
    }
    out.rule.normalize_rhs();
    out.prov.kind = Provenance::Kind::Chained;
    out.prov.parents = {r1.id, r2.id};
    out.prov.subst = mu;
    return out;
}

TransformedRule partial_delete(const Rule& r, const std::vector<size_t>& keep) {
    if (keep.size() >= r.rhs.size())
        throw TransformError(TransformError::Kind::NotStrictSubset,
                             "partial deletion must drop at least one term");
    TransformedRule out;
    out.rule = r;
    out.rule.id = -1;
    out.rule.rhs.clear();
    for (size_t i : keep) {
        if (i >= r.rhs.size())
            throw TransformError(TransformError::Kind::NotStrictSubset, "bad occurrence index");
        out.rule.rhs.push_back(r.rhs[i]);
    }
    out.rule.normalize_rhs();
    out.prov.kind = Provenance::Kind::PartialDeleted;
    out.prov.parents = {r.id};
    return out;
}

void delete_rule(Program& p, RuleId id) {
    if (!p.find(id))
        throw TransformError(TransformError::Kind::NotPresent, "no rule with that id");
    p.remove_rule(id);
}

}  // namespace itslb
