#pragma once

#include "itslb/transform.hpp"

#include <chrono>
#include <map>

namespace itslb {

struct PipelineConfig {
    int rule_cap = 1000;
    int smt_timeout_ms = 500;
    int accel_backtrack = 4;
    bool keep_proof = true;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    bool prune_report_guards = true;
};

struct PipelineEvent {
    std::string action;            // "accelerate", "chain", ...
    RuleId result = -1;            // -1 for pure deletions
    std::vector<RuleId> parents;
    std::string detail;
};

struct PipelineResult {
    Program program;                       // simplified
    std::map<RuleId, Provenance> provenance;
    std::map<RuleId, Rule> rule_snapshots;  // every rule ever present, by id
    std::vector<PipelineEvent> log;
    bool timed_out = false;
    bool rule_cap_hit = false;
};

/// Iterative program simplification: unsatisfiable/unreachable deletion, sink
/// cleanup, loop & recursion acceleration with instantiation and partial
/// deletion fallbacks, accelerated-rule chaining, loop-free symbol elimination.
/// Terminates on every input; all output rules are rooted at the start symbol.
PipelineResult simplify(const Program& input, const PipelineConfig& cfg, const SmtSolver& smt);

}  // namespace itslb
