#include "itslb/metering.hpp"

namespace itslb {

namespace {

// Scales to integer coefficients over the universal variables and tightens
// strict constraints: p > 0 becomes p' >= 1 for the scaled integer-valued p'.
Constraint tighten(const Constraint& c) {
    Int lcm(1);
    for (const auto& m : c.lhs.monomials())
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), m.coeff.get_den().get_mpz_t());
    Expr scaled = c.lhs * Expr::constant(Rat(lcm));
    if (c.rel == Rel::Gt) return constraint_ge(scaled - expr(1));
    return constraint_ge(scaled);
}

struct LinearView {
    std::map<Var, Rat> coeffs;  // over universal variables
    Rat constant;
};

LinearView linear_view(const Expr& e, const std::set<Var>& universal) {
    LinearView v;
    v.constant = Rat(0);
    for (const auto& m : e.monomials()) {
        const Var* uvar = nullptr;
        for (const auto& f : m.factors) {
            if (!f.atom.is_var())
                throw ExprError(ExprError::Kind::NotPolynomial, "exponential in linear context");
            if (universal.count(f.atom.var())) {
                if (uvar || f.power > 1)
                    throw ExprError(ExprError::Kind::NotPolynomial,
                                    "nonlinear in universal variables: " + e.to_string());
                uvar = &f.atom.var();
            } else {
                throw ExprError(ExprError::Kind::NotPolynomial,
                                "unexpected coefficient variable in premise");
            }
        }
        if (uvar)
            v.coeffs[*uvar] += m.coeff;
        else
            v.constant += m.coeff;
    }
    return v;
}

// Splits the conclusion into per-universal-variable coefficient expressions
// and a constant-part expression (both over the template coefficients).
struct ConclusionView {
    std::map<Var, Expr> coeffs;
    Expr constant;
};

ConclusionView conclusion_view(const Expr& e, const std::set<Var>& universal) {
    ConclusionView v;
    for (const auto& m : e.monomials()) {
        const Var* uvar = nullptr;
        Monomial rest{m.coeff, {}};
        for (const auto& f : m.factors) {
            if (!f.atom.is_var())
                throw ExprError(ExprError::Kind::NotPolynomial, "exponential in conclusion");
            if (universal.count(f.atom.var())) {
                if (uvar || f.power > 1)
                    throw ExprError(ExprError::Kind::NotPolynomial,
                                    "conclusion nonlinear in universal variables");
                uvar = &f.atom.var();
            } else {
                rest.factors.push_back(f);
            }
        }
        Expr part;
        {
            Expr t = Expr::constant(rest.coeff);
            for (const auto& f : rest.factors)
                t *= Expr::pow(expr(f.atom.var()), expr(f.power));
            part = t;
        }
        if (uvar)
            v.coeffs[*uvar] += part;
        else
            v.constant += part;
    }
    return v;
}

}  // namespace

Formula farkas_encode(const Guard& premise, const Constraint& conclusion,
                      const std::set<Var>& universal, int& fresh_counter) {
    std::vector<LinearView> rows;
    for (const auto& c : premise.conjuncts()) rows.push_back(linear_view(tighten(c).lhs, universal));
    ConclusionView concl = conclusion_view(conclusion.lhs, universal);

    std::vector<Var> lambdas;
    std::vector<Formula> parts;
    for (size_t i = 0; i < rows.size(); ++i) {
        Var l("lam" + std::to_string(fresh_counter++));
        lambdas.push_back(l);
        parts.push_back(Formula::atom(constraint_ge(expr(l))));
    }

    std::set<Var> vars = universal;
    for (const auto& r : rows)
        for (const auto& [v, c] : r.coeffs) vars.insert(v);
    for (const auto& [v, c] : concl.coeffs) vars.insert(v);

    for (const auto& v : vars) {
        Expr lhs = concl.coeffs.count(v) ? concl.coeffs.at(v) : Expr();
        for (size_t i = 0; i < rows.size(); ++i) {
            auto it = rows[i].coeffs.find(v);
            if (it != rows[i].coeffs.end()) lhs -= Expr::constant(it->second) * expr(lambdas[i]);
        }
        parts.push_back(Formula::equal_zero(lhs));
    }

    Expr slack = concl.constant;
    for (size_t i = 0; i < rows.size(); ++i)
        slack -= Expr::constant(rows[i].constant) * expr(lambdas[i]);
    parts.push_back(Formula::atom(
        conclusion.rel == Rel::Gt ? constraint_gt(slack) : constraint_ge(slack)));
    return Formula::conj(std::move(parts));
}

}  // namespace itslb
