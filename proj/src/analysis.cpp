#include "itslb/analysis.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace itslb {

std::string AnalysisResult::asymptotic() const { return bound.cls.to_string(); }

std::string AnalysisResult::asymptotic_note() const {
    if (bound.cls.kind == AsymClass::Kind::Exp && bound.cls.base_hint > 1.0) {
        double floored = std::floor(bound.cls.base_hint * 100.0) / 100.0;
        std::ostringstream os;
        os << ">= Omega(" << floored << "^n)";
        return os.str();
    }
    if (bound.cls.kind == AsymClass::Kind::SubExp) {
        std::ostringstream os;
        os << ">= Omega(e^(n^(1/" << bound.cls.root << ")))";
        return os.str();
    }
    return "";
}

std::string AnalysisResult::concrete_bound() const {
    if (!bound.witness_rule) return "0";
    return bound.concrete_cost.to_string() + " [" + bound.guard.to_string() + "]";
}

std::string AnalysisResult::witness() const { return bound.family.to_string(); }

AnalysisResult analyze(const Program& p, const AnalysisOptions& opts) {
    SmtOptions sopts;
    sopts.solver_command = opts.smt_solver;
    sopts.timeout_ms = opts.smt_timeout_ms;
    SmtSolver smt(sopts);

    PipelineConfig pcfg;
    pcfg.rule_cap = opts.max_rules;
    pcfg.smt_timeout_ms = opts.smt_timeout_ms;
    if (opts.timeout_ms > 0)
        pcfg.deadline =
            std::chrono::steady_clock::now() + std::chrono::milliseconds(opts.timeout_ms);

    AnalysisResult out;
    out.pipeline = simplify(p, pcfg, smt);
    out.simplified = out.pipeline.program;
    out.timed_out = out.pipeline.timed_out;

    LimitContext ctx;
    ctx.program_vars = p.program_vars;
    ctx.smt = &smt;
    ctx.depth_cap = opts.depth_cap;
    ctx.node_cap = opts.node_cap;
    out.bound = best_bound(out.simplified, ctx);
    return out;
}

AnalysisResult analyze_text(const std::string& its_text, const AnalysisOptions& opts) {
    return analyze(parse_program(its_text), opts);
}

std::string result_text(const AnalysisResult& r) {
    std::ostringstream os;
    os << "Asymptotic lower bound: " << r.asymptotic();
    std::string note = r.asymptotic_note();
    if (!note.empty()) os << "  (" << note << ")";
    os << "\n";
    os << "Concrete bound: " << r.concrete_bound() << "\n";
    if (r.bound.witness_rule) os << "Witness: " << r.witness() << "\n";
    if (r.timed_out) os << "Note: analysis hit the time budget; the result is partial.\n";
    return os.str();
}

std::string result_json(const AnalysisResult& r) {
    nlohmann::json j;
    j["asymptotic"] = r.asymptotic();
    std::string note = r.asymptotic_note();
    if (!note.empty()) j["asymptotic_note"] = note;
    j["concrete_bound"] = r.bound.witness_rule ? r.bound.concrete_cost.to_string() : "0";
    j["guard"] = r.bound.guard.to_string();
    nlohmann::json witness = nlohmann::json::object();
    for (const auto& [v, e] : r.bound.family.map) witness[v.name] = e.to_string();
    j["witness"] = witness;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : proof_steps(r.pipeline, r.bound)) {
        nlohmann::json js;
        js["kind"] = s.kind;
        js["inputs"] = s.inputs;
        if (s.output >= 0) js["output"] = s.output;
        js["justification"] = s.justification;
        steps.push_back(std::move(js));
    }
    j["proof_steps"] = steps;
    j["timed_out"] = r.timed_out;
    return j.dump(2);
}

std::vector<ValidationPoint> validate_bound(const Program& original, const AnalysisResult& r,
                                            int samples, const RunBudget& budget) {
    std::vector<ValidationPoint> out;
    if (!r.bound.witness_rule) return out;
    const Guard& g = r.bound.guard;
    std::set<Var> vars = g.vars();
    r.bound.concrete_cost.collect_vars(vars);
    for (const auto& v : original.program_vars) vars.insert(v);
    std::vector<Var> vs(vars.begin(), vars.end());

    std::mt19937 rng(12345);
    std::uniform_int_distribution<long> pick(-5, 6);
    int found = 0;
    for (int attempt = 0; attempt < 400 && found < samples; ++attempt) {
        std::map<Var, Rat> val;
        for (const auto& v : vs) val[v] = Rat(pick(rng));
        try {
            if (!eval(g, val)) continue;
        } catch (const ExprError&) {
            continue;
        }
        ValidationPoint p;
        p.valuation = val;
        try {
            p.claimed = eval(r.bound.concrete_cost, val);
        } catch (const ExprError&) {
            continue;
        }
        std::vector<Int> args;
        for (const auto& v : original.program_vars) args.push_back(val[v].get_num());
        auto mc = max_cost_from(original, args, budget);
        p.observed = mc.cost;
        p.truncated = mc.truncated;
        p.ok = p.observed >= p.claimed || p.truncated;
        out.push_back(std::move(p));
        ++found;
    }
    return out;
}

}  // namespace itslb
