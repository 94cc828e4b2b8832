#include "itslb/analysis.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace itslb;

namespace {

py::dict result_to_dict(const AnalysisResult& r) {
    py::dict d;
    d["asymptotic"] = r.asymptotic();
    d["asymptotic_note"] = r.asymptotic_note();
    d["concrete_bound"] = r.bound.witness_rule ? r.bound.concrete_cost.to_string() : "0";
    d["guard"] = r.bound.guard.to_string();
    py::dict witness;
    for (const auto& [v, e] : r.bound.family.map) witness[py::str(v.name)] = e.to_string();
    d["witness"] = witness;
    d["simplified"] = r.simplified.to_string();
    d["timed_out"] = r.timed_out;
    py::list steps;
    for (const auto& s : proof_steps(r.pipeline, r.bound)) {
        py::dict js;
        js["kind"] = s.kind;
        js["justification"] = s.justification;
        steps.append(js);
    }
    d["proof_steps"] = steps;
    return d;
}

AnalysisOptions options_from_kwargs(int timeout_ms, int depth_cap, const std::string& smt_solver) {
    AnalysisOptions o;
    o.timeout_ms = timeout_ms;
    o.depth_cap = depth_cap;
    o.smt_solver = smt_solver;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Worst-case lower bounds for integer transition systems";

    m.def(
        "analyze",
        [](const std::string& text, int timeout_ms, int depth_cap, const std::string& smt_solver) {
            return result_to_dict(
                analyze_text(text, options_from_kwargs(timeout_ms, depth_cap, smt_solver)));
        },
        py::arg("text"), py::arg("timeout_ms") = 60000, py::arg("depth_cap") = 12,
        py::arg("smt_solver") = std::string(),
        "Analyze an ITS given in the textual input format; returns a dict with "
        "the asymptotic class, concrete bound, witness family and proof steps.");

    m.def(
        "simplify",
        [](const std::string& text) {
            Program p = parse_program(text);
            SmtSolver smt;
            PipelineConfig cfg;
            return simplify(p, cfg, smt).program.to_string();
        },
        py::arg("text"), "Run program simplification only; returns the simplified ITS.");

    m.def(
        "parse_roundtrip",
        [](const std::string& text) { return parse_program(text).to_string(); },
        py::arg("text"), "Parse and print back the normalized program.");

    m.def(
        "max_cost",
        [](const std::string& text, const std::vector<long>& args, int max_steps) {
            Program p = parse_program(text);
            RunBudget b;
            b.max_steps = max_steps;
            std::vector<Int> a;
            for (long x : args) a.push_back(Int(x));
            auto r = max_cost_from(p, a, b);
            return py::make_tuple(rat_to_string(r.cost), r.truncated);
        },
        py::arg("text"), py::arg("args"), py::arg("max_steps") = 200,
        "Exhaustive worst-case oracle from start(args); returns (cost, truncated).");

    m.attr("__version__") = "0.1.0";
}
