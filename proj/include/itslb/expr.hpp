#pragma once

#include <gmpxx.h>

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace itslb {

using Rat = mpq_class;
using Int = mpz_class;

Rat rat(long num, long den = 1);
Rat rat_from_string(const std::string& s);
bool is_integer(const Rat& q);
std::string rat_to_string(const Rat& q);

struct ExprError : std::runtime_error {
    enum class Kind { NotPolynomial, NonIntegerExponent, NegativeExponent, BadPower, Parse };
    Kind kind;
    ExprError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

/// A program or temporary variable. Identity is the name.
struct Var {
    std::string name;

    Var() = default;
    explicit Var(std::string n) : name(std::move(n)) {}
    auto operator<=>(const Var&) const = default;
};

class Expr;

/// base^exponent with a rational base > 0, base != 1 and a non-constant exponent.
/// Integer constant offsets of the exponent are folded into the owning
/// monomial's coefficient, so 2^(x-1) is stored as 1/2 * 2^x.
struct ExpAtom {
    Rat base;
    std::shared_ptr<const Expr> exponent;
};

struct Atom {
    std::variant<Var, ExpAtom> node;

    bool is_var() const { return node.index() == 0; }
    const Var& var() const { return std::get<Var>(node); }
    const ExpAtom& exp() const { return std::get<ExpAtom>(node); }
};

int compare(const Atom& a, const Atom& b);

struct Factor {
    Atom atom;
    int power;  // >= 1; always 1 for ExpAtom factors
};

struct Monomial {
    Rat coeff;
    std::vector<Factor> factors;  // sorted by atom, no duplicates

    int total_degree() const;
};

int compare(const Monomial& a, const Monomial& b);  // ignores coeff

/// Exact symbolic arithmetic expression: a canonical sum of monomials over
/// variables and exponential atoms. Rational coefficients, graded-lex monomial
/// order, no zero coefficients. Immutable after construction.
class Expr {
public:
    Expr() = default;  // zero
    static Expr constant(const Rat& q);
    static Expr variable(const Var& v);

    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr operator-() const;
    Expr operator*(const Expr& o) const;
    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }

    /// base^exponent. Allowed: constant^integer (folded), polynomial^nonneg-integer
    /// (expanded), positive-constant^expr (exponential atom). Everything else
    /// throws ExprError{BadPower}.
    static Expr pow(const Expr& base, const Expr& exponent);

    bool is_zero() const { return monos_.empty(); }
    bool is_constant() const;
    /// Value when the expression is a rational constant.
    std::optional<Rat> as_constant() const;
    /// True when no exponential atom occurs anywhere (including exponents).
    bool is_polynomial() const;
    bool contains(const Var& v) const;
    /// True when v occurs inside some exponential atom's exponent.
    bool var_in_exponent(const Var& v) const;

    void collect_vars(std::set<Var>& out) const;
    std::set<Var> vars() const;

    /// Degree as a polynomial in v. Throws NotPolynomial when v occurs in an
    /// exponent or the expression is not polynomial in v.
    int degree(const Var& v) const;
    int total_degree() const;  // polynomial expressions only

    /// Coefficients c_0..c_d with *this = sum c_i v^i; c_i do not contain v.
    std::vector<Expr> coefficients_in(const Var& v) const;
    /// Constant term (monomial without factors).
    Rat constant_term() const;
    /// Coefficient of v when *this is linear in v; nullopt otherwise.
    std::optional<Rat> linear_coeff(const Var& v) const;

    const std::vector<Monomial>& monomials() const { return monos_; }

    friend int compare(const Expr& a, const Expr& b);
    bool operator==(const Expr& o) const { return compare(*this, o) == 0; }
    bool operator!=(const Expr& o) const { return compare(*this, o) != 0; }
    bool operator<(const Expr& o) const { return compare(*this, o) < 0; }

    std::string to_string() const;

private:
    std::vector<Monomial> monos_;

    static Expr from_monomials(std::vector<Monomial> ms);
    friend Expr mul_monomials(const Monomial& a, const Monomial& b);
    friend class ExprBuilder;
};

Expr expr(long n);
Expr expr(const Rat& q);
Expr expr(const Var& v);

/// Variable -> expression map with simultaneous application. Identity
/// bindings are dropped on construction.
class Subst {
public:
    Subst() = default;
    explicit Subst(std::map<Var, Expr> bindings);

    void set(const Var& v, const Expr& e);
    bool has(const Var& v) const { return map_.count(v) != 0; }
    const Expr& get(const Var& v) const;
    /// v itself when unbound, binding otherwise.
    Expr lookup(const Var& v) const;
    bool empty() const { return map_.empty(); }
    const std::map<Var, Expr>& bindings() const { return map_; }

    bool operator==(const Subst& o) const { return map_ == o.map_; }
    std::string to_string() const;

private:
    std::map<Var, Expr> map_;
};

/// Simultaneous substitution, re-canonicalized.
Expr apply(const Expr& e, const Subst& s);
/// compose(s1,s2): apply s1 first, then s2. apply(e, compose(s1,s2)) == apply(apply(e,s1), s2).
Subst compose(const Subst& s1, const Subst& s2);

/// Exact ground evaluation. Throws NonIntegerExponent / NegativeExponent.
Rat eval(const Expr& e, const std::map<Var, Rat>& valuation);

/// Lemma-based integer-image check for polynomials: evaluates e on the grid
/// {0..d_1+1} x ... x {0..d_k+1}; true iff every value is an integer, which
/// implies integrality on all of Z^k. Throws NotPolynomial.
bool maps_to_int(const Expr& e);

/// Fresh variable name: base, base1, base2, ... not colliding with `used`.
Var fresh_var(const std::string& base, const std::set<Var>& used);

}  // namespace itslb
