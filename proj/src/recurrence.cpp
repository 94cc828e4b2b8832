#include "itslb/recurrence.hpp"

#include <algorithm>

namespace itslb {

namespace {

// Bernoulli numbers B_0..B_6 with B_1 = -1/2 (lower-sum convention)
const Rat kBernoulli[] = {rat(1), rat(-1, 2), rat(1, 6), rat(0), rat(-1, 30), rat(0), rat(1, 42)};

Rat binom(int n, int k) {
    Rat r(1);
    for (int j = 0; j < k; ++j) r *= Rat(n - j);
    for (int j = 1; j <= k; ++j) r /= Rat(j);
    r.canonicalize();
    return r;
}

// sum_{i=0}^{m-1} i^d as a polynomial in m
std::optional<Expr> power_sum(int d, const Var& m) {
    if (d > 6) return std::nullopt;
    Expr out;
    for (int j = 0; j <= d; ++j) {
        Rat coeff = binom(d + 1, j) * kBernoulli[j] / Rat(d + 1);
        coeff.canonicalize();
        if (coeff == 0) continue;
        out += Expr::constant(coeff) * Expr::pow(expr(m), expr(d + 1 - j));
    }
    return out;
}

// Splits one monomial into (k-power, geometric base, leftover expression).
struct MonoView {
    int kpow = 0;
    std::optional<Rat> geo_base;
    Expr rest = expr(1);
    bool ok = true;
};

MonoView view_monomial(const Monomial& mono, const Var& k) {
    MonoView v;
    v.rest = Expr::constant(mono.coeff);
    for (const auto& f : mono.factors) {
        if (f.atom.is_var()) {
            if (f.atom.var() == k) {
                v.kpow = f.power;
            } else {
                v.rest *= Expr::pow(expr(f.atom.var()), expr(f.power));
            }
            continue;
        }
        const auto& ea = f.atom.exp();
        if (!ea.exponent->contains(k)) {
            v.rest *= Expr::pow(Expr::constant(ea.base), *ea.exponent);
            continue;
        }
        // geometric factor: exponent must be exactly k
        if (*ea.exponent != expr(k) || v.geo_base) {
            v.ok = false;
            return v;
        }
        v.geo_base = ea.base;
    }
    if (v.kpow > 0 && v.geo_base) v.ok = false;  // i^d * r^i sums are out of scope
    return v;
}

}  // namespace

std::optional<Expr> poly_sum(const Expr& p, const Var& i, const Var& tv) {
    if (p.var_in_exponent(i)) return std::nullopt;
    Expr out;
    auto coeffs = p.coefficients_in(i);
    if (coeffs.size() > 7) return std::nullopt;
    for (size_t d = 0; d < coeffs.size(); ++d) {
        if (coeffs[d].is_zero()) continue;
        auto ps = power_sum(static_cast<int>(d), tv);
        if (!ps) return std::nullopt;
        out += coeffs[d] * *ps;
    }
    return out;
}

namespace {

// sum_{i=0}^{tv-1} e[k:=i], handling polynomial and plain geometric terms
std::optional<Expr> sum_closed(const Expr& e, const Var& k, const Var& tv) {
    Expr poly_part;
    Expr out;
    for (const auto& mono : e.monomials()) {
        MonoView v = view_monomial(mono, k);
        if (!v.ok) return std::nullopt;
        if (v.geo_base) {
            const Rat& r = *v.geo_base;
            if (r == 1) {
                poly_part += v.rest * Expr::pow(expr(k), expr(v.kpow));
                continue;
            }
            // sum r^i = (r^tv - 1)/(r - 1)
            Rat inv = 1 / Rat(r - 1);
            inv.canonicalize();
            out += v.rest * Expr::constant(inv) *
                   (Expr::pow(Expr::constant(r), expr(tv)) - expr(1));
        } else {
            poly_part += v.rest * Expr::pow(expr(k), expr(v.kpow));
        }
    }
    auto ps = poly_sum(poly_part, k, tv);
    if (!ps) return std::nullopt;
    return out + *ps;
}

}  // namespace

std::optional<Subst> iterated_update(const Subst& mu, const Var& tv) {
    std::set<Var> dom;
    for (const auto& [v, e] : mu.bindings()) dom.insert(v);

    struct Line {
        Var var;
        Rat self;   // coefficient of the variable itself
        Expr rest;  // remainder, free of the variable
        std::set<Var> deps;
    };
    std::vector<Line> lines;
    for (const auto& [v, e] : mu.bindings()) {
        if (e.var_in_exponent(v)) return std::nullopt;
        auto a = e.linear_coeff(v);
        if (!a) return std::nullopt;
        Line l{v, *a, e - Expr::constant(*a) * expr(v), {}};
        if (l.rest.contains(v)) return std::nullopt;
        for (const auto& d : l.rest.vars())
            if (dom.count(d)) l.deps.insert(d);
        lines.push_back(std::move(l));
    }

    Var k = fresh_var("it_k", [&] {
        std::set<Var> used = {tv};
        for (const auto& [v, e] : mu.bindings()) {
            used.insert(v);
            for (const auto& w : e.vars()) used.insert(w);
        }
        return used;
    }());

    std::map<Var, Expr> closed;         // closed form as a function of tv
    std::map<Var, bool> exact_at_zero;  // closed(0) == var
    while (closed.size() < lines.size()) {
        bool progress = false;
        for (auto& l : lines) {
            if (closed.count(l.var)) continue;
            bool ready = std::all_of(l.deps.begin(), l.deps.end(),
                                     [&](const Var& d) { return closed.count(d) != 0; });
            if (!ready) continue;
            progress = true;

            // q(k): rest with solved dependencies at iteration index k
            Subst at_k;
            bool deps_exact = true;
            for (const auto& d : l.deps) {
                Subst shift;
                shift.set(tv, expr(k));
                at_k.set(d, apply(closed.at(d), shift));
                if (!exact_at_zero.at(d)) deps_exact = false;
            }
            Expr q = apply(l.rest, at_k);

            if (l.self == 1) {
                if (!deps_exact) return std::nullopt;
                auto s = sum_closed(q, k, tv);
                if (!s) return std::nullopt;
                closed[l.var] = expr(l.var) + *s;
                exact_at_zero[l.var] = true;
            } else if (l.self == 0) {
                Subst back;
                back.set(k, expr(tv) - expr(1));
                closed[l.var] = apply(q, back);
                Subst zero;
                zero.set(tv, expr(0));
                exact_at_zero[l.var] = apply(closed[l.var], zero) == expr(l.var);
            } else if (l.self > 0) {
                if (q.contains(k)) return std::nullopt;
                if (!deps_exact) return std::nullopt;
                // x^(tv) = a^tv * x + q * (a^tv - 1)/(a - 1)
                Expr atv = Expr::pow(Expr::constant(l.self), expr(tv));
                Rat inv = 1 / Rat(l.self - 1);
                inv.canonicalize();
                closed[l.var] = atv * expr(l.var) + q * Expr::constant(inv) * (atv - expr(1));
                exact_at_zero[l.var] = true;
            } else {
                return std::nullopt;  // negative multiplier
            }
        }
        if (!progress) return std::nullopt;  // mutual recursion
    }

    Subst out;
    for (const auto& [v, e] : closed) out.set(v, e);
    return out;
}

std::optional<Expr> iterated_cost(const Expr& cost, const Subst& mu, const Subst& mu_it,
                                  const Var& tv) {
    std::set<Var> used = cost.vars();
    used.insert(tv);
    for (const auto& [v, e] : mu_it.bindings()) {
        used.insert(v);
        for (const auto& w : e.vars()) used.insert(w);
    }
    Var k = fresh_var("it_k", used);

    Subst at_k;
    Subst zero;
    zero.set(tv, expr(0));
    for (const auto& [v, e] : mu.bindings()) {
        if (!cost.contains(v)) continue;
        Expr cf = mu_it.has(v) ? mu_it.get(v) : expr(v);
        if (apply(cf, zero) != expr(v)) return std::nullopt;  // not exact at index 0
        Subst shift;
        shift.set(tv, expr(k));
        at_k.set(v, apply(cf, shift));
    }
    Expr summand = apply(cost, at_k);
    return sum_closed(summand, k, tv);
}

}  // namespace itslb
