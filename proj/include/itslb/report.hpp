#pragma once

#include "itslb/asymptotics.hpp"
#include "itslb/pipeline.hpp"

#include <string>

namespace itslb {

struct ProofStep {
    std::string kind;
    std::vector<RuleId> inputs;
    RuleId output = -1;
    std::string justification;
};

std::vector<ProofStep> proof_steps(const PipelineResult& pipe, const BoundResult& bound);

/// Human-readable proof: which processors fired, metering functions and
/// closed forms for accelerations, and the limit derivation.
std::string render_proof_text(const PipelineResult& pipe, const BoundResult& bound);
std::string render_proof_json(const PipelineResult& pipe, const BoundResult& bound);

}  // namespace itslb
