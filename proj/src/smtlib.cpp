#include "itslb/smt.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <sstream>

namespace itslb {

namespace {

std::string smt2_rat(const Rat& q) {
    std::ostringstream os;
    if (q < 0) {
        os << "(- " << smt2_rat(-q) << ")";
        return os.str();
    }
    if (is_integer(q))
        os << q.get_num();
    else
        os << "(/ " << q.get_num() << " " << q.get_den() << ")";
    return os.str();
}

std::string smt2_expr(const Expr& e) {
    if (e.is_zero()) return "0";
    std::ostringstream os;
    const auto& ms = e.monomials();
    if (ms.size() > 1) os << "(+ ";
    for (size_t i = 0; i < ms.size(); ++i) {
        const auto& m = ms[i];
        std::vector<std::string> parts;
        if (m.coeff != 1 || m.factors.empty()) parts.push_back(smt2_rat(m.coeff));
        for (const auto& f : m.factors)
            for (int p = 0; p < f.power; ++p) parts.push_back(f.atom.var().name);
        if (i) os << " ";
        if (parts.size() == 1) {
            os << parts[0];
        } else {
            os << "(*";
            for (const auto& p : parts) os << " " << p;
            os << ")";
        }
    }
    if (ms.size() > 1) os << ")";
    return os.str();
}

std::string smt2_formula(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
        case K::True: return "true";
        case K::False: return "false";
        case K::Atom: {
            const auto& c = f.get_atom();
            return std::string("(") + (c.rel == Rel::Gt ? "> " : ">= ") + smt2_expr(c.lhs) +
                   " 0)";
        }
        case K::Not: return "(not " + smt2_formula(f.children()[0]) + ")";
        case K::And:
        case K::Or: {
            std::string s = f.kind() == K::And ? "(and" : "(or";
            for (const auto& c : f.children()) s += " " + smt2_formula(c);
            return s + ")";
        }
    }
    return "false";
}

// minimal s-expression reader for (get-model) output
struct Sexp {
    std::string atom;
    std::vector<Sexp> list;
    bool is_atom = false;
};

Sexp parse_sexp(const std::string& s, size_t& i) {
    while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) ++i;
    Sexp e;
    if (i >= s.size()) return e;
    if (s[i] == '(') {
        ++i;
        while (i < s.size()) {
            while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == ')') {
                ++i;
                break;
            }
            e.list.push_back(parse_sexp(s, i));
        }
        return e;
    }
    e.is_atom = true;
    size_t start = i;
    while (i < s.size() && !isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
           s[i] != ')')
        ++i;
    e.atom = s.substr(start, i - start);
    return e;
}

std::optional<Rat> sexp_value(const Sexp& e) {
    if (e.is_atom) {
        try {
            if (e.atom.find('.') != std::string::npos) {
                // decimal like 2.0
                std::string t = e.atom;
                size_t dot = t.find('.');
                std::string frac = t.substr(dot + 1);
                t.erase(dot, 1);
                Rat q(t);
                for (size_t k = 0; k < frac.size(); ++k) q /= 10;
                q.canonicalize();
                return q;
            }
            return rat_from_string(e.atom);
        } catch (...) {
            return std::nullopt;
        }
    }
    if (e.list.empty()) return std::nullopt;
    if (e.list[0].is_atom && e.list[0].atom == "-" && e.list.size() == 2) {
        auto v = sexp_value(e.list[1]);
        if (v) return -*v;
        return std::nullopt;
    }
    if (e.list[0].is_atom && e.list[0].atom == "/" && e.list.size() == 3) {
        auto a = sexp_value(e.list[1]);
        auto b = sexp_value(e.list[2]);
        if (a && b && *b != 0) {
            Rat q = *a / *b;
            q.canonicalize();
            return q;
        }
    }
    return std::nullopt;
}

std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> out;
    std::istringstream is(cmd);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

std::string to_smtlib2(const Formula& f, const std::map<Var, VarType>& types) {
    std::set<Var> vars;
    f.collect_vars(vars);
    std::ostringstream os;
    os << "(set-logic ALL)\n";
    for (const auto& v : vars) {
        auto it = types.find(v);
        bool rational = it != types.end() && it->second == VarType::Rational;
        os << "(declare-const " << v.name << " " << (rational ? "Real" : "Int") << ")\n";
    }
    os << "(assert " << smt2_formula(f) << ")\n";
    os << "(check-sat)\n(get-model)\n";
    return os.str();
}

SmtOutcome run_smtlib_process(const std::string& command, const Formula& f,
                              const std::map<Var, VarType>& types, int timeout_ms) {
    SmtOutcome out;
    out.status = SmtOutcome::Status::Unknown;
    auto argv_strings = split_command(command);
    if (argv_strings.empty()) {
        out.reason = "empty solver command";
        return out;
    }
    std::string request = to_smtlib2(f, types);

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
        out.reason = "pipe failed";
        return out;
    }
    pid_t pid = fork();
    if (pid < 0) {
        out.reason = "fork failed";
        return out;
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> argv;
        for (auto& s : argv_strings) argv.push_back(s.data());
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    ssize_t ignored = write(in_pipe[1], request.data(), request.size());
    (void)ignored;
    close(in_pipe[1]);

    std::string response;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    char buf[4096];
    bool timed_out = false;
    while (true) {
        auto now = std::chrono::steady_clock::now();
        int remain = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        if (remain <= 0) {
            timed_out = true;
            break;
        }
        struct pollfd pfd{out_pipe[0], POLLIN, 0};
        int pr = poll(&pfd, 1, remain);
        if (pr <= 0) {
            timed_out = true;
            break;
        }
        ssize_t n = read(out_pipe[0], buf, sizeof(buf));
        if (n <= 0) break;
        response.append(buf, static_cast<size_t>(n));
    }
    close(out_pipe[0]);
    if (timed_out) kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    if (timed_out) {
        out.reason = "solver timeout";
        return out;
    }

    std::istringstream rs(response);
    std::string verdict;
    std::getline(rs, verdict);
    while (!verdict.empty() && (verdict.back() == '\r' || verdict.back() == ' '))
        verdict.pop_back();
    if (verdict == "unsat") {
        out.status = SmtOutcome::Status::Unsat;
        return out;
    }
    if (verdict != "sat") {
        out.reason = "solver answered: " + verdict;
        return out;
    }
    std::string rest((std::istreambuf_iterator<char>(rs)), std::istreambuf_iterator<char>());
    size_t i = 0;
    Sexp model = parse_sexp(rest, i);
    std::set<Var> vars;
    f.collect_vars(vars);
    for (const auto& v : vars) out.model[v] = Rat(0);
    for (const auto& entry : model.list) {
        // (define-fun name () Sort value)
        if (entry.is_atom || entry.list.size() < 5) continue;
        if (!entry.list[0].is_atom || entry.list[0].atom != "define-fun") continue;
        auto val = sexp_value(entry.list[4]);
        if (val) out.model[Var(entry.list[1].atom)] = *val;
    }
    out.status = SmtOutcome::Status::Sat;
    return out;
}

}  // namespace itslb
