#include "itslb/rule.hpp"

#include <algorithm>
#include <sstream>

namespace itslb {

bool Term::operator<(const Term& o) const {
    if (root != o.root) return root < o.root;
    if (args.size() != o.args.size()) return args.size() < o.args.size();
    for (size_t i = 0; i < args.size(); ++i) {
        int c = compare(args[i], o.args[i]);
        if (c != 0) return c < 0;
    }
    return false;
}

void Term::collect_vars(std::set<Var>& out) const {
    for (const auto& a : args) a.collect_vars(out);
}

std::string Term::to_string() const {
    if (args.empty()) return root;
    std::ostringstream os;
    os << root << "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) os << ",";
        os << args[i].to_string();
    }
    os << ")";
    return os.str();
}

Term sink_term(int arity) {
    Term t;
    t.root = kSinkSymbol;
    t.args.assign(arity, expr(0));
    return t;
}

std::set<Var> Rule::all_vars() const {
    std::set<Var> s;
    for (const auto& v : lhs_vars) s.insert(v);
    cost.collect_vars(s);
    guard.collect_vars(s);
    for (const auto& t : rhs) t.collect_vars(s);
    return s;
}

std::set<Var> Rule::temp_vars() const {
    std::set<Var> s;
    cost.collect_vars(s);
    guard.collect_vars(s);
    for (const auto& t : rhs) t.collect_vars(s);
    for (const auto& v : lhs_vars) s.erase(v);
    return s;
}

void Rule::normalize_rhs() {
    if (rhs.empty()) rhs.push_back(sink_term(static_cast<int>(lhs_vars.size())));
    std::sort(rhs.begin(), rhs.end());
}

std::string Rule::to_string() const {
    std::ostringstream os;
    os << lhs_root << "(";
    for (size_t i = 0; i < lhs_vars.size(); ++i) {
        if (i) os << ",";
        os << lhs_vars[i].name;
    }
    os << ") -{" << cost.to_string() << "}-> ";
    bool only_sink = rhs.size() == 1 && rhs[0].root == kSinkSymbol;
    if (only_sink) {
        os << "NIL";
    } else {
        for (size_t i = 0; i < rhs.size(); ++i) {
            if (i) os << ", ";
            os << rhs[i].to_string();
        }
    }
    os << " :|: " << guard.to_string();
    return os.str();
}

RuleClass classify(const Rule& r) {
    if (r.degree() >= 2) {
        bool all_self = std::all_of(r.rhs.begin(), r.rhs.end(),
                                    [&](const Term& t) { return t.root == r.lhs_root; });
        return all_self ? RuleClass::SimpleRecursion : RuleClass::Other;
    }
    if (r.degree() == 1) {
        if (r.rhs[0].root == r.lhs_root) return RuleClass::SimpleLoop;
        return RuleClass::TailRecursive;
    }
    return RuleClass::Other;
}

Subst update(const Rule& r) {
    if (classify(r) != RuleClass::SimpleLoop)
        throw std::logic_error("update: not a simple loop");
    return updates(r)[0];
}

std::vector<Subst> updates(const Rule& r) {
    std::vector<Subst> out;
    for (const auto& t : r.rhs) {
        Subst s;
        for (size_t i = 0; i < r.lhs_vars.size() && i < t.args.size(); ++i)
            s.set(r.lhs_vars[i], t.args[i]);
        out.push_back(std::move(s));
    }
    return out;
}

bool well_formed(const Rule& r) {
    for (const auto& t : r.rhs)
        for (const auto& a : t.args) {
            if (a.is_polynomial()) {
                if (!maps_to_int(a)) return false;
                continue;
            }
            // exponential arguments: integer base and integer-mapping exponent
            bool ok = true;
            for (const auto& m : a.monomials()) {
                if (!is_integer(m.coeff)) ok = false;
                for (const auto& f : m.factors)
                    if (!f.atom.is_var()) {
                        if (!is_integer(f.atom.exp().base)) ok = false;
                        if (!f.atom.exp().exponent->is_polynomial() ||
                            !maps_to_int(*f.atom.exp().exponent))
                            ok = false;
                    }
            }
            if (!ok) return false;
        }
    return true;
}

RuleId Program::add_rule(Rule r) {
    r.id = next_id++;
    r.normalize_rhs();
    rules.push_back(std::move(r));
    return rules.back().id;
}

void Program::remove_rule(RuleId id) {
    rules.erase(std::remove_if(rules.begin(), rules.end(),
                               [&](const Rule& r) { return r.id == id; }),
                rules.end());
}

const Rule* Program::find(RuleId id) const {
    for (const auto& r : rules)
        if (r.id == id) return &r;
    return nullptr;
}

bool Program::well_formed() const {
    return std::all_of(rules.begin(), rules.end(),
                       [](const Rule& r) { return itslb::well_formed(r); });
}

std::vector<RuleId> Program::incoming(const std::string& symbol) const {
    std::vector<RuleId> out;
    for (const auto& r : rules)
        for (const auto& t : r.rhs)
            if (t.root == symbol) {
                out.push_back(r.id);
                break;
            }
    return out;
}

std::vector<RuleId> Program::outgoing(const std::string& symbol) const {
    std::vector<RuleId> out;
    for (const auto& r : rules)
        if (r.lhs_root == symbol) out.push_back(r.id);
    return out;
}

std::set<std::string> Program::symbols() const {
    std::set<std::string> s;
    s.insert(start);
    for (const auto& r : rules) {
        s.insert(r.lhs_root);
        for (const auto& t : r.rhs) s.insert(t.root);
    }
    return s;
}

std::set<std::string> Program::reachable_from_start() const {
    std::set<std::string> seen{start};
    std::vector<std::string> queue{start};
    while (!queue.empty()) {
        std::string f = queue.back();
        queue.pop_back();
        for (const auto& r : rules) {
            if (r.lhs_root != f) continue;
            for (const auto& t : r.rhs)
                if (seen.insert(t.root).second) queue.push_back(t.root);
        }
    }
    return seen;
}

bool Program::is_simplified() const {
    return std::all_of(rules.begin(), rules.end(),
                       [&](const Rule& r) { return r.lhs_root == start; });
}

std::string Program::to_string() const {
    std::ostringstream os;
    os << "START: " << start << "\n";
    for (const auto& r : rules) os << r.to_string() << "\n";
    return os.str();
}

}  // namespace itslb
