#include "itslb/expr.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace itslb {

Rat rat(long num, long den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

Rat rat_from_string(const std::string& s) {
    Rat q(s);
    q.canonicalize();
    return q;
}

bool is_integer(const Rat& q) { return q.get_den() == 1; }

std::string rat_to_string(const Rat& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

// ---------------------------------------------------------------------------
// ordering

int compare(const Expr& a, const Expr& b);

static int compare_rat(const Rat& a, const Rat& b) { return cmp(a, b); }

int compare(const Atom& a, const Atom& b) {
    // variables order before exponential atoms
    if (a.node.index() != b.node.index()) return a.node.index() < b.node.index() ? -1 : 1;
    if (a.is_var()) {
        if (a.var().name < b.var().name) return -1;
        if (a.var().name > b.var().name) return 1;
        return 0;
    }
    int c = compare_rat(a.exp().base, b.exp().base);
    if (c != 0) return c;
    return compare(*a.exp().exponent, *b.exp().exponent);
}

int Monomial::total_degree() const {
    int d = 0;
    for (const auto& f : factors) d += f.power;
    return d;
}

// graded lexicographic, coefficient ignored
int compare(const Monomial& a, const Monomial& b) {
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db ? -1 : 1;
    size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        int c = compare(a.factors[i].atom, b.factors[j].atom);
        if (c != 0) return c;
        if (a.factors[i].power != b.factors[j].power)
            return a.factors[i].power > b.factors[j].power ? -1 : 1;
        ++i, ++j;
    }
    if (i < a.factors.size()) return -1;
    if (j < b.factors.size()) return 1;
    return 0;
}

int compare(const Expr& a, const Expr& b) {
    const auto& ma = a.monomials();
    const auto& mb = b.monomials();
    size_t i = 0;
    for (; i < ma.size() && i < mb.size(); ++i) {
        int c = compare(ma[i], mb[i]);
        if (c != 0) return c;
        c = compare_rat(ma[i].coeff, mb[i].coeff);
        if (c != 0) return c;
    }
    if (i < ma.size()) return 1;
    if (i < mb.size()) return -1;
    return 0;
}

// ---------------------------------------------------------------------------
// construction

Expr Expr::from_monomials(std::vector<Monomial> ms) {
    std::sort(ms.begin(), ms.end(),
              [](const Monomial& x, const Monomial& y) { return compare(x, y) > 0; });
    std::vector<Monomial> out;
    for (auto& m : ms) {
        if (m.coeff == 0) continue;
        if (!out.empty() && compare(out.back(), m) == 0)
            out.back().coeff += m.coeff;
        else
            out.push_back(std::move(m));
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Monomial& m) { return m.coeff == 0; }),
              out.end());
    Expr e;
    e.monos_ = std::move(out);
    return e;
}

Expr Expr::constant(const Rat& q) {
    Expr e;
    if (q != 0) e.monos_.push_back(Monomial{q, {}});
    return e;
}

Expr Expr::variable(const Var& v) {
    Expr e;
    e.monos_.push_back(Monomial{Rat(1), {Factor{Atom{v}, 1}}});
    return e;
}

Expr expr(long n) { return Expr::constant(Rat(n)); }
Expr expr(const Rat& q) { return Expr::constant(q); }
Expr expr(const Var& v) { return Expr::variable(v); }

Expr Expr::operator+(const Expr& o) const {
    std::vector<Monomial> ms = monos_;
    ms.insert(ms.end(), o.monos_.begin(), o.monos_.end());
    return from_monomials(std::move(ms));
}

Expr Expr::operator-() const {
    std::vector<Monomial> ms = monos_;
    for (auto& m : ms) m.coeff = -m.coeff;
    Expr e;
    e.monos_ = std::move(ms);
    return e;
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

static Rat rat_pow_int(const Rat& base, long k) {
    if (k == 0) return Rat(1);
    Rat b = base;
    bool inv = k < 0;
    unsigned long n = inv ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
    Rat r(1);
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    if (inv) {
        if (r == 0) throw ExprError(ExprError::Kind::BadPower, "0^negative");
        r = 1 / r;
    }
    return r;
}

// Builds a single monomial product, merging equal atoms and same-base
// exponential atoms; exponential atoms keep power 1 by folding repeats into
// the exponent. Returns an Expr since b^e * b^f may fold to a constant.
Expr mul_monomials(const Monomial& a, const Monomial& b) {
    Rat coeff = a.coeff * b.coeff;
    std::vector<Factor> fs = a.factors;
    std::vector<Expr> deferred;  // exponential merges rebuilt via pow()
    for (const auto& f : b.factors) {
        auto it = std::find_if(fs.begin(), fs.end(), [&](const Factor& g) {
            return compare(g.atom, f.atom) == 0;
        });
        if (it == fs.end()) {
            fs.push_back(f);
            continue;
        }
        if (it->atom.is_var()) {
            it->power += f.power;
        } else {
            // b^e * b^e with equal exponents: fold into exponent sum
            Expr sum = *it->atom.exp().exponent + *f.atom.exp().exponent;
            Rat base = it->atom.exp().base;
            fs.erase(it);
            deferred.push_back(Expr::pow(Expr::constant(base), sum));
        }
    }
    // merge distinct-exponent atoms with the same base
    for (size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].atom.is_var()) continue;
        for (size_t j = i + 1; j < fs.size();) {
            if (!fs[j].atom.is_var() && fs[j].atom.exp().base == fs[i].atom.exp().base) {
                Expr sum = *fs[i].atom.exp().exponent + *fs[j].atom.exp().exponent;
                Rat base = fs[i].atom.exp().base;
                fs.erase(fs.begin() + j);
                fs.erase(fs.begin() + i);
                deferred.push_back(Expr::pow(Expr::constant(base), sum));
                i = static_cast<size_t>(-1);  // restart outer scan
                break;
            }
            ++j;
        }
        if (i == static_cast<size_t>(-1)) continue;
    }
    std::sort(fs.begin(), fs.end(),
              [](const Factor& x, const Factor& y) { return compare(x.atom, y.atom) < 0; });
    Expr result;
    result = Expr::from_monomials({Monomial{coeff, std::move(fs)}});
    for (const auto& d : deferred) result = result * d;
    return result;
}

Expr Expr::operator*(const Expr& o) const {
    Expr acc;
    for (const auto& ma : monos_)
        for (const auto& mb : o.monos_) acc += mul_monomials(ma, mb);
    return acc;
}

Expr Expr::pow(const Expr& base, const Expr& exponent) {
    auto ec = exponent.as_constant();
    if (ec) {
        if (!is_integer(*ec))
            throw ExprError(ExprError::Kind::BadPower, "non-integer constant exponent");
        if (!ec->get_num().fits_slong_p())
            throw ExprError(ExprError::Kind::BadPower, "exponent too large");
        long k = ec->get_num().get_si();
        auto bc = base.as_constant();
        if (bc) return constant(rat_pow_int(*bc, k));
        if (k < 0) throw ExprError(ExprError::Kind::BadPower, "negative exponent on non-constant base");
        Expr r = constant(Rat(1));
        for (long i = 0; i < k; ++i) r *= base;
        return r;
    }
    auto bc = base.as_constant();
    if (!bc || *bc <= 0)
        throw ExprError(ExprError::Kind::BadPower,
                        "symbolic exponent requires a positive constant base");
    if (*bc == 1) return constant(Rat(1));
    // fold the integer part of the exponent's constant term into a coefficient
    Rat c0 = exponent.constant_term();
    Rat coeff(1);
    Expr e = exponent;
    if (c0 != 0 && is_integer(c0) && c0.get_num().fits_slong_p()) {
        coeff = rat_pow_int(*bc, c0.get_num().get_si());
        e = exponent - constant(c0);
    }
    if (e.is_zero()) return constant(coeff);
    Atom atom{ExpAtom{*bc, std::make_shared<const Expr>(e)}};
    Expr r;
    r.monos_.push_back(Monomial{coeff, {Factor{atom, 1}}});
    return r;
}

// ---------------------------------------------------------------------------
// queries

bool Expr::is_constant() const {
    return monos_.empty() || (monos_.size() == 1 && monos_[0].factors.empty());
}

std::optional<Rat> Expr::as_constant() const {
    if (monos_.empty()) return Rat(0);
    if (monos_.size() == 1 && monos_[0].factors.empty()) return monos_[0].coeff;
    return std::nullopt;
}

bool Expr::is_polynomial() const {
    for (const auto& m : monos_)
        for (const auto& f : m.factors)
            if (!f.atom.is_var()) return false;
    return true;
}

bool Expr::contains(const Var& v) const {
    for (const auto& m : monos_)
        for (const auto& f : m.factors) {
            if (f.atom.is_var()) {
                if (f.atom.var() == v) return true;
            } else if (f.atom.exp().exponent->contains(v)) {
                return true;
            }
        }
    return false;
}

bool Expr::var_in_exponent(const Var& v) const {
    for (const auto& m : monos_)
        for (const auto& f : m.factors)
            if (!f.atom.is_var() && f.atom.exp().exponent->contains(v)) return true;
    return false;
}

void Expr::collect_vars(std::set<Var>& out) const {
    for (const auto& m : monos_)
        for (const auto& f : m.factors) {
            if (f.atom.is_var())
                out.insert(f.atom.var());
            else
                f.atom.exp().exponent->collect_vars(out);
        }
}

std::set<Var> Expr::vars() const {
    std::set<Var> s;
    collect_vars(s);
    return s;
}

int Expr::degree(const Var& v) const {
    if (var_in_exponent(v))
        throw ExprError(ExprError::Kind::NotPolynomial, "variable occurs in an exponent");
    int d = 0;
    for (const auto& m : monos_)
        for (const auto& f : m.factors)
            if (f.atom.is_var() && f.atom.var() == v) d = std::max(d, f.power);
    return d;
}

int Expr::total_degree() const {
    if (!is_polynomial())
        throw ExprError(ExprError::Kind::NotPolynomial, "not a polynomial");
    int d = 0;
    for (const auto& m : monos_) d = std::max(d, m.total_degree());
    return d;
}

std::vector<Expr> Expr::coefficients_in(const Var& v) const {
    if (var_in_exponent(v))
        throw ExprError(ExprError::Kind::NotPolynomial, "variable occurs in an exponent");
    std::vector<std::vector<Monomial>> buckets(1);
    for (const auto& m : monos_) {
        int p = 0;
        Monomial rest{m.coeff, {}};
        for (const auto& f : m.factors) {
            if (f.atom.is_var() && f.atom.var() == v)
                p = f.power;
            else
                rest.factors.push_back(f);
        }
        if (static_cast<size_t>(p) >= buckets.size()) buckets.resize(p + 1);
        buckets[p].push_back(std::move(rest));
    }
    std::vector<Expr> out;
    out.reserve(buckets.size());
    for (auto& b : buckets) out.push_back(Expr::from_monomials(std::move(b)));
    return out;
}

Rat Expr::constant_term() const {
    for (const auto& m : monos_)
        if (m.factors.empty()) return m.coeff;
    return Rat(0);
}

std::optional<Rat> Expr::linear_coeff(const Var& v) const {
    if (var_in_exponent(v)) return std::nullopt;
    Rat c(0);
    for (const auto& m : monos_)
        for (const auto& f : m.factors)
            if (f.atom.is_var() && f.atom.var() == v) {
                if (f.power > 1 || m.factors.size() > 1) return std::nullopt;
                c = m.coeff;
            }
    return c;
}

// ---------------------------------------------------------------------------
// substitution / evaluation

Subst::Subst(std::map<Var, Expr> bindings) {
    for (auto& [v, e] : bindings) set(v, e);
}

void Subst::set(const Var& v, const Expr& e) {
    if (e == Expr::variable(v))
        map_.erase(v);
    else
        map_[v] = e;
}

const Expr& Subst::get(const Var& v) const { return map_.at(v); }

Expr Subst::lookup(const Var& v) const {
    auto it = map_.find(v);
    return it == map_.end() ? Expr::variable(v) : it->second;
}

std::string Subst::to_string() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [v, e] : map_) {
        if (!first) os << ", ";
        first = false;
        os << v.name << "/" << e.to_string();
    }
    os << "}";
    return os.str();
}

Expr apply(const Expr& e, const Subst& s) {
    if (s.empty()) return e;
    Expr acc;
    for (const auto& m : e.monomials()) {
        Expr term = Expr::constant(m.coeff);
        for (const auto& f : m.factors) {
            if (f.atom.is_var()) {
                Expr repl = s.lookup(f.atom.var());
                term *= Expr::pow(repl, expr(f.power));
            } else {
                Expr ex = apply(*f.atom.exp().exponent, s);
                term *= Expr::pow(Expr::constant(f.atom.exp().base), ex);
            }
        }
        acc += term;
    }
    return acc;
}

Subst compose(const Subst& s1, const Subst& s2) {
    std::map<Var, Expr> out;
    for (const auto& [v, e] : s1.bindings()) out[v] = apply(e, s2);
    for (const auto& [v, e] : s2.bindings())
        if (!out.count(v) && !s1.has(v)) out[v] = e;
    return Subst(std::move(out));
}

Rat eval(const Expr& e, const std::map<Var, Rat>& valuation) {
    Rat acc(0);
    for (const auto& m : e.monomials()) {
        Rat term = m.coeff;
        for (const auto& f : m.factors) {
            if (f.atom.is_var()) {
                auto it = valuation.find(f.atom.var());
                if (it == valuation.end())
                    throw std::invalid_argument("unbound variable " + f.atom.var().name);
                term *= rat_pow_int(it->second, f.power);
            } else {
                Rat ev = eval(*f.atom.exp().exponent, valuation);
                if (!is_integer(ev))
                    throw ExprError(ExprError::Kind::NonIntegerExponent,
                                    "exponent evaluates to " + rat_to_string(ev));
                const Rat& base = f.atom.exp().base;
                if (ev < 0 && base != 1 && base != -1)
                    throw ExprError(ExprError::Kind::NegativeExponent,
                                    "negative exponent " + rat_to_string(ev));
                if (!ev.get_num().fits_slong_p())
                    throw ExprError(ExprError::Kind::BadPower, "exponent too large to evaluate");
                term *= rat_pow_int(base, ev.get_num().get_si());
            }
        }
        acc += term;
    }
    return acc;
}

bool maps_to_int(const Expr& e) {
    if (!e.is_polynomial())
        throw ExprError(ExprError::Kind::NotPolynomial, "maps_to_int needs a polynomial");
    std::set<Var> vset = e.vars();
    std::vector<Var> vs(vset.begin(), vset.end());
    std::vector<int> degs;
    long grid = 1;
    for (const auto& v : vs) {
        degs.push_back(e.degree(v));
        grid *= degs.back() + 2;
        if (grid > 2'000'000)
            throw ExprError(ExprError::Kind::NotPolynomial, "integrality grid too large");
    }
    std::vector<int> idx(vs.size(), 0);
    while (true) {
        std::map<Var, Rat> val;
        for (size_t i = 0; i < vs.size(); ++i) val[vs[i]] = Rat(idx[i]);
        if (!is_integer(eval(e, val))) return false;
        size_t i = 0;
        for (; i < vs.size(); ++i) {
            if (idx[i] < degs[i] + 1) {
                ++idx[i];
                break;
            }
            idx[i] = 0;
        }
        if (i == vs.size()) break;
        if (vs.empty()) break;
    }
    return true;
}

Var fresh_var(const std::string& base, const std::set<Var>& used) {
    if (!used.count(Var(base))) return Var(base);
    for (int i = 1;; ++i) {
        Var v(base + std::to_string(i));
        if (!used.count(v)) return v;
    }
}

// ---------------------------------------------------------------------------
// printing

static bool needs_parens_in_exponent(const Expr& e) {
    const auto& ms = e.monomials();
    if (ms.size() != 1) return true;
    const auto& m = ms[0];
    return !(m.coeff == 1 && m.factors.size() == 1 && m.factors[0].power == 1 &&
             m.factors[0].atom.is_var());
}

static std::string atom_to_string(const Atom& a, int power) {
    std::ostringstream os;
    if (a.is_var()) {
        os << a.var().name;
        if (power != 1) os << "^" << power;
        return os.str();
    }
    const auto& ea = a.exp();
    if (is_integer(ea.base))
        os << ea.base;
    else
        os << "(" << ea.base << ")";
    os << "^";
    std::string ex = ea.exponent->to_string();
    if (needs_parens_in_exponent(*ea.exponent))
        os << "(" << ex << ")";
    else
        os << ex;
    return os.str();
}

std::string Expr::to_string() const {
    if (monos_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& m : monos_) {
        Rat c = m.coeff;
        if (first) {
            if (c < 0) {
                os << "-";
                c = -c;
            }
        } else {
            os << (c < 0 ? " - " : " + ");
            if (c < 0) c = -c;
        }
        first = false;
        bool wrote_coeff = false;
        if (m.factors.empty() || c != 1) {
            os << c;
            wrote_coeff = true;
        }
        for (size_t i = 0; i < m.factors.size(); ++i) {
            if (wrote_coeff || i > 0) os << "*";
            os << atom_to_string(m.factors[i].atom, m.factors[i].power);
        }
    }
    return os.str();
}

}  // namespace itslb
