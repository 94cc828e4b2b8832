#pragma once

#include "itslb/constraint.hpp"

#include <map>
#include <string>
#include <vector>

namespace itslb {

/// Quantifier-free boolean combination of constraints.
class Formula {
public:
    enum class Kind { True, False, Atom, And, Or, Not };

    static Formula truth() { return Formula(Kind::True); }
    static Formula falsity() { return Formula(Kind::False); }
    static Formula atom(Constraint c);
    static Formula conj(std::vector<Formula> fs);
    static Formula disj(std::vector<Formula> fs);
    static Formula neg(Formula f);
    static Formula of_guard(const Guard& g);
    /// lhs = 0 as two atoms.
    static Formula equal_zero(const Expr& e);

    Kind kind() const { return kind_; }
    const Constraint& get_atom() const { return atom_; }
    const std::vector<Formula>& children() const { return children_; }

    void collect_vars(std::set<Var>& out) const;
    std::string to_string() const;

private:
    explicit Formula(Kind k) : kind_(k) {}
    Kind kind_;
    Constraint atom_;
    std::vector<Formula> children_;
};

enum class VarType { Integer, Rational };

struct SmtOutcome {
    enum class Status { Sat, Unsat, Unknown } status = Status::Unknown;
    std::map<Var, Rat> model;  // full assignment when Sat
    std::string reason;        // for Unknown

    bool sat() const { return status == Status::Sat; }
    bool unsat() const { return status == Status::Unsat; }
    bool unknown() const { return status == Status::Unknown; }
};

struct Validity {
    enum class Status { Valid, Invalid, Unknown } status = Status::Unknown;
    std::map<Var, Rat> counterexample;  // for Invalid

    bool valid() const { return status == Status::Valid; }
};

struct SmtOptions {
    std::string solver_command;  // external SMT-LIB2 solver; empty = builtin only
    int timeout_ms = 500;
    int search_node_cap = 20000;
};

/// Satisfiability and validity services over QF rational/integer arithmetic.
/// Uses the external SMT-LIB2 process when configured, otherwise the built-in
/// decision layer (exact simplex + branch&bound, even-power rewriting, bounded
/// integer model search). Unknown is propagated, never treated as Unsat.
class SmtSolver {
public:
    explicit SmtSolver(SmtOptions opts = {}) : opts_(std::move(opts)) {}

    SmtOutcome check_sat(const Formula& f, const std::map<Var, VarType>& types,
                         int timeout_ms = 0) const;
    Validity is_valid(const Formula& f, const std::map<Var, VarType>& types,
                      int timeout_ms = 0) const;

    /// All variables typed Integer.
    SmtOutcome check_sat_int(const Formula& f, int timeout_ms = 0) const;
    /// premise => conclusion over the integers.
    Validity implies(const Guard& premise, const Constraint& conclusion) const;
    bool proves(const Guard& premise, const Constraint& conclusion) const;
    SmtOutcome guard_sat(const Guard& g) const;

    const SmtOptions& options() const { return opts_; }

private:
    SmtOptions opts_;
};

/// Serializes a formula to SMT-LIB2 and runs it through an external solver
/// process (stdin/stdout). Exposed for tests.
SmtOutcome run_smtlib_process(const std::string& command, const Formula& f,
                              const std::map<Var, VarType>& types, int timeout_ms);
std::string to_smtlib2(const Formula& f, const std::map<Var, VarType>& types);

}  // namespace itslb
