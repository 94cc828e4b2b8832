#include "itslb/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace itslb {

namespace {

enum class Tok {
    Ident, Number, LParen, RParen, Comma, Plus, Minus, Star, Caret, Slash,
    Arrow, CostOpen, RBrace, GuardSep, AndAnd, Lt, Le, Gt, Ge, Eq, Colon, End
};

struct Token {
    Tok kind;
    std::string text;
    int col;
};

struct Lexer {
    const std::string& s;
    int line;
    size_t i = 0;
    std::vector<Token> toks;

    explicit Lexer(const std::string& str, int line_no) : s(str), line(line_no) { run(); }

    [[noreturn]] void fail(const std::string& msg, size_t at) {
        throw SyntaxError(line, static_cast<int>(at) + 1, msg);
    }

    void run() {
        while (i < s.size()) {
            char c = s[i];
            if (isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            int col = static_cast<int>(i);
            if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t start = i;
                while (i < s.size() &&
                       (isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '\''))
                    ++i;
                toks.push_back({Tok::Ident, s.substr(start, i - start), col});
                continue;
            }
            if (isdigit(static_cast<unsigned char>(c))) {
                size_t start = i;
                while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) ++i;
                toks.push_back({Tok::Number, s.substr(start, i - start), col});
                continue;
            }
            auto two = [&](char a, char b) {
                return c == a && i + 1 < s.size() && s[i + 1] == b;
            };
            if (two('-', '>')) { toks.push_back({Tok::Arrow, "->", col}); i += 2; continue; }
            if (two('-', '{')) { toks.push_back({Tok::CostOpen, "-{", col}); i += 2; continue; }
            if (two('&', '&')) { toks.push_back({Tok::AndAnd, "&&", col}); i += 2; continue; }
            if (two('<', '=')) { toks.push_back({Tok::Le, "<=", col}); i += 2; continue; }
            if (two('>', '=')) { toks.push_back({Tok::Ge, ">=", col}); i += 2; continue; }
            if (c == ':' && i + 2 < s.size() && s[i + 1] == '|' && s[i + 2] == ':') {
                toks.push_back({Tok::GuardSep, ":|:", col});
                i += 3;
                continue;
            }
            switch (c) {
                case '(': toks.push_back({Tok::LParen, "(", col}); break;
                case ')': toks.push_back({Tok::RParen, ")", col}); break;
                case ',': toks.push_back({Tok::Comma, ",", col}); break;
                case '+': toks.push_back({Tok::Plus, "+", col}); break;
                case '-': toks.push_back({Tok::Minus, "-", col}); break;
                case '*': toks.push_back({Tok::Star, "*", col}); break;
                case '^': toks.push_back({Tok::Caret, "^", col}); break;
                case '/': toks.push_back({Tok::Slash, "/", col}); break;
                case '}': toks.push_back({Tok::RBrace, "}", col}); break;
                case '<': toks.push_back({Tok::Lt, "<", col}); break;
                case '>': toks.push_back({Tok::Gt, ">", col}); break;
                case '=': toks.push_back({Tok::Eq, "=", col}); break;
                case ':': toks.push_back({Tok::Colon, ":", col}); break;
                default: fail(std::string("unexpected character '") + c + "'", i);
            }
            ++i;
        }
        toks.push_back({Tok::End, "", static_cast<int>(s.size())});
    }
};

struct LineParser {
    std::vector<Token> toks;
    size_t pos = 0;
    int line;

    LineParser(const std::string& text, int line_no) : line(line_no) {
        Lexer lx(text, line_no);
        toks = std::move(lx.toks);
    }

    const Token& peek() const { return toks[pos]; }
    Token next() { return toks[pos++]; }
    bool at(Tok k) const { return peek().kind == k; }
    Token expect(Tok k, const std::string& what) {
        if (!at(k)) fail("expected " + what + ", found '" + peek().text + "'");
        return next();
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(line, peek().col + 1, msg);
    }

    // expr := term (('+'|'-') term)*
    // term := factor ('*' factor)*
    // factor := '-' factor | primary ('^' primary)?
    // primary := number ('/' number)? | ident | '(' expr ')'
    Expr parse_expr() {
        Expr e = parse_term();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            bool plus = next().kind == Tok::Plus;
            Expr t = parse_term();
            e = plus ? e + t : e - t;
        }
        return e;
    }

    Expr parse_term() {
        Expr e = parse_factor();
        while (at(Tok::Star)) {
            next();
            e *= parse_factor();
        }
        return e;
    }

    Expr parse_factor() {
        if (at(Tok::Minus)) {
            next();
            return -parse_factor();
        }
        Expr base = parse_primary();
        if (at(Tok::Caret)) {
            next();
            Expr ex = at(Tok::Minus) ? (next(), -parse_primary()) : parse_primary();
            try {
                return Expr::pow(base, ex);
            } catch (const ExprError& e) {
                fail(e.what());
            }
        }
        return base;
    }

    Expr parse_primary() {
        if (at(Tok::Number)) {
            Rat num(rat_from_string(next().text));
            if (at(Tok::Slash)) {
                next();
                Token den = expect(Tok::Number, "denominator");
                Rat d = rat_from_string(den.text);
                if (d == 0) fail("zero denominator");
                num /= d;
                num.canonicalize();
            }
            return Expr::constant(num);
        }
        if (at(Tok::Ident)) return Expr::variable(Var(next().text));
        if (at(Tok::LParen)) {
            next();
            Expr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        fail("expected expression");
    }

    CmpOp parse_relop() {
        switch (peek().kind) {
            case Tok::Lt: next(); return CmpOp::Lt;
            case Tok::Le: next(); return CmpOp::Le;
            case Tok::Gt: next(); return CmpOp::Gt;
            case Tok::Ge: next(); return CmpOp::Ge;
            case Tok::Eq: next(); return CmpOp::Eq;
            default: fail("expected comparison operator");
        }
    }
};

struct RawRule {
    std::string root;
    std::vector<std::string> args;
    Expr cost;
    bool nil = false;
    std::vector<Term> rhs;
    Guard guard;
    int line;
};

std::string strip_comment(const std::string& line) {
    auto h = line.find('#');
    return h == std::string::npos ? line : line.substr(0, h);
}

}  // namespace

Expr parse_expr(const std::string& text) {
    LineParser p(text, 1);
    Expr e = p.parse_expr();
    if (!p.at(Tok::End)) p.fail("trailing input after expression");
    return e;
}

Program parse_program(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    std::string start;
    std::vector<RawRule> raw;

    while (std::getline(is, line)) {
        ++line_no;
        std::string body = strip_comment(line);
        if (std::all_of(body.begin(), body.end(),
                        [](char c) { return isspace(static_cast<unsigned char>(c)); }))
            continue;
        LineParser p(body, line_no);
        Token head = p.expect(Tok::Ident, "identifier");
        if (head.text == "START" && p.at(Tok::Colon)) {
            p.next();
            start = p.expect(Tok::Ident, "start symbol").text;
            continue;
        }
        RawRule r;
        r.line = line_no;
        r.root = head.text;
        if (p.at(Tok::LParen)) {
            p.next();
            while (!p.at(Tok::RParen)) {
                r.args.push_back(p.expect(Tok::Ident, "variable").text);
                if (p.at(Tok::Comma)) p.next();
            }
            p.next();
        }
        if (p.at(Tok::CostOpen)) {
            p.next();
            r.cost = p.parse_expr();
            p.expect(Tok::RBrace, "'}'");
            p.expect(Tok::Arrow, "'->'");
        } else {
            p.expect(Tok::Arrow, "'->' or '-{cost}->'");
            r.cost = expr(1);
        }
        if (p.at(Tok::Ident) && p.peek().text == "NIL") {
            p.next();
            r.nil = true;
        } else {
            while (true) {
                Term t;
                t.root = p.expect(Tok::Ident, "function symbol").text;
                if (p.at(Tok::LParen)) {
                    p.next();
                    while (!p.at(Tok::RParen)) {
                        t.args.push_back(p.parse_expr());
                        if (p.at(Tok::Comma)) p.next();
                    }
                    p.next();
                }
                r.rhs.push_back(std::move(t));
                if (p.at(Tok::Comma)) {
                    p.next();
                    continue;
                }
                break;
            }
        }
        if (p.at(Tok::GuardSep)) {
            p.next();
            if (p.at(Tok::Ident) && p.peek().text == "TRUE") {
                p.next();
            } else {
                std::vector<RawCmp> cmps;
                while (true) {
                    RawCmp c;
                    c.lhs = p.parse_expr();
                    c.op = p.parse_relop();
                    c.rhs = p.parse_expr();
                    cmps.push_back(std::move(c));
                    if (p.at(Tok::AndAnd)) {
                        p.next();
                        continue;
                    }
                    break;
                }
                r.guard = normalize_guard(cmps);
            }
        }
        if (!p.at(Tok::End)) p.fail("trailing input after rule");
        raw.push_back(std::move(r));
    }

    if (raw.empty()) throw SemanticError("no rules in input");

    // collect arities; symbols must be used consistently
    std::map<std::string, int> arity;
    auto note_arity = [&](const std::string& sym, int a) {
        auto it = arity.find(sym);
        if (it == arity.end())
            arity[sym] = a;
        else if (it->second != a)
            throw SemanticError("symbol '" + sym + "' used with arities " +
                                std::to_string(it->second) + " and " + std::to_string(a));
    };
    for (const auto& r : raw) {
        note_arity(r.root, static_cast<int>(r.args.size()));
        for (const auto& t : r.rhs) note_arity(t.root, static_cast<int>(t.args.size()));
    }
    if (start.empty()) start = raw[0].root;
    if (!arity.count(start)) throw SemanticError("start symbol '" + start + "' has no rule");
    int max_arity = 0;
    for (const auto& [s, a] : arity) max_arity = std::max(max_arity, a);

    // canonical program variables: first rule's names, extended for padding
    Program prog;
    prog.start = start;
    std::set<Var> used;
    for (const auto& n : raw[0].args) {
        prog.program_vars.push_back(Var(n));
        used.insert(Var(n));
    }
    while (static_cast<int>(prog.program_vars.size()) < max_arity) {
        Var v = fresh_var("pv" + std::to_string(prog.program_vars.size()), used);
        prog.program_vars.push_back(v);
        used.insert(v);
    }
    for (const auto& r : raw) {
        auto& names = prog.source_names[r.root];
        if (names.empty()) names = r.args;
    }

    std::set<Var> canonical(prog.program_vars.begin(), prog.program_vars.end());
    for (const auto& r : raw) {
        Rule rule;
        rule.lhs_root = r.root;
        rule.lhs_vars = prog.program_vars;

        // rename this rule's lhs variables to the canonical vector and keep
        // temporaries clear of canonical names
        Subst rename;
        std::set<Var> lhs_set;
        for (size_t i = 0; i < r.args.size(); ++i) {
            lhs_set.insert(Var(r.args[i]));
            if (Var(r.args[i]) != prog.program_vars[i])
                rename.set(Var(r.args[i]), expr(prog.program_vars[i]));
        }
        std::set<Var> rule_vars;
        r.cost.collect_vars(rule_vars);
        r.guard.collect_vars(rule_vars);
        for (const auto& t : r.rhs) t.collect_vars(rule_vars);
        std::set<Var> taken = canonical;
        for (const auto& v : rule_vars) taken.insert(v);
        for (const auto& v : rule_vars) {
            if (lhs_set.count(v)) continue;
            bool clashes = canonical.count(v) &&
                           std::find(r.args.begin(), r.args.end(), v.name) == r.args.end();
            // a temporary that reuses a canonical name not bound by this lhs
            if (clashes) {
                Var fresh = fresh_var(v.name, taken);
                taken.insert(fresh);
                rename.set(v, expr(fresh));
            }
        }

        rule.cost = apply(r.cost, rename);
        rule.guard = apply(r.guard, rename);
        for (const auto& t : r.rhs) {
            Term nt;
            nt.root = t.root;
            for (const auto& a : t.args) nt.args.push_back(apply(a, rename));
            while (static_cast<int>(nt.args.size()) < max_arity) nt.args.push_back(expr(0));
            rule.rhs.push_back(std::move(nt));
        }
        if (r.nil || rule.rhs.empty()) {
            rule.rhs.clear();
            rule.rhs.push_back(sink_term(max_arity));
        }
        prog.add_rule(std::move(rule));
    }

    // wrap the start symbol when it occurs on a right-hand side
    if (!prog.incoming(prog.start).empty()) {
        std::set<std::string> syms = prog.symbols();
        std::string wrapper = prog.start + "_0";
        for (int i = 1; syms.count(wrapper); ++i)
            wrapper = prog.start + "_" + std::to_string(i);
        Rule w;
        w.lhs_root = wrapper;
        w.lhs_vars = prog.program_vars;
        w.cost = expr(0);
        Term t;
        t.root = prog.start;
        for (const auto& v : prog.program_vars) t.args.push_back(expr(v));
        w.rhs.push_back(std::move(t));
        prog.add_rule(std::move(w));
        prog.start = wrapper;
    }

    for (const auto& r : prog.rules)
        if (!itslb::well_formed(r))
            throw SemanticError("rule is not well formed (a right-hand-side argument may "
                                "evaluate to a non-integer): " +
                                r.to_string());
    return prog;
}

std::string print_program(const Program& p) { return p.to_string(); }

}  // namespace itslb
