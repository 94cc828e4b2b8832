#pragma once

#include "itslb/asymptotics.hpp"
#include "itslb/interp.hpp"
#include "itslb/parser.hpp"
#include "itslb/pipeline.hpp"
#include "itslb/report.hpp"

namespace itslb {

struct AnalysisOptions {
    int timeout_ms = 60000;
    int smt_timeout_ms = 500;
    std::string smt_solver;  // external SMT-LIB2 command; empty = builtin
    int max_rules = 1000;
    int depth_cap = 12;
    int node_cap = 5000;
};

struct AnalysisResult {
    Program simplified;
    PipelineResult pipeline;
    BoundResult bound;
    bool timed_out = false;

    std::string asymptotic() const;       // "Omega(n^4)", "EXP", ...
    std::string asymptotic_note() const;  // ">= Omega(1.41^n)" for EXP, "" otherwise
    std::string concrete_bound() const;   // "cost [guard]"
    std::string witness() const;
};

AnalysisResult analyze(const Program& p, const AnalysisOptions& opts = {});
AnalysisResult analyze_text(const std::string& its_text, const AnalysisOptions& opts = {});

std::string result_text(const AnalysisResult& r);
std::string result_json(const AnalysisResult& r);

struct ValidationPoint {
    std::map<Var, Rat> valuation;
    Rat claimed;
    Rat observed;
    bool ok = false;
    bool truncated = false;
};

/// Cross-checks the claimed concrete bound against the exhaustive oracle on
/// the original program at sampled guard models.
std::vector<ValidationPoint> validate_bound(const Program& original, const AnalysisResult& r,
                                            int samples, const RunBudget& budget);

}  // namespace itslb
