#include "itslb/report.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace itslb {

namespace {

std::string describe_event(const PipelineEvent& ev, const PipelineResult& pipe) {
    std::ostringstream os;
    os << ev.action;
    if (!ev.parents.empty()) {
        os << " [";
        for (size_t i = 0; i < ev.parents.size(); ++i) {
            if (i) os << ", ";
            os << "#" << ev.parents[i];
        }
        os << "]";
    }
    if (ev.result >= 0) os << " -> #" << ev.result;
    if (!ev.detail.empty()) os << " (" << ev.detail << ")";
    if (ev.result >= 0 && pipe.provenance.count(ev.result)) {
        const auto& prov = pipe.provenance.at(ev.result);
        if (prov.accel && ev.action == "accelerate") {
            os << "\n    iterated update: " << prov.accel->mu_it.to_string()
               << "\n    iterated cost: " << prov.accel->cost_it.to_string();
        }
    }
    return os.str();
}

}  // namespace

std::vector<ProofStep> proof_steps(const PipelineResult& pipe, const BoundResult& bound) {
    std::vector<ProofStep> out;
    for (const auto& ev : pipe.log) {
        if (ev.action == "delete") continue;
        ProofStep s;
        s.kind = ev.action;
        s.inputs = ev.parents;
        s.output = ev.result;
        s.justification = ev.detail;
        if (ev.result >= 0 && pipe.provenance.count(ev.result)) {
            const auto& prov = pipe.provenance.at(ev.result);
            if (prov.accel && ev.action == "accelerate")
                s.justification += "; iterated update " + prov.accel->mu_it.to_string() +
                                   ", iterated cost " + prov.accel->cost_it.to_string();
        }
        out.push_back(std::move(s));
    }
    for (const auto& d : bound.derivation)
        out.push_back(ProofStep{"limit", {}, -1, d});
    return out;
}

std::string render_proof_text(const PipelineResult& pipe, const BoundResult& bound) {
    std::ostringstream os;
    bool any = false;
    os << "Simplification:\n";
    for (const auto& ev : pipe.log) {
        if (ev.action == "delete") continue;
        any = true;
        os << "  " << describe_event(ev, pipe) << "\n";
    }
    if (!any) os << "  no transformation applied\n";
    os << "Rules of the simplified program:\n";
    for (const auto& r : pipe.program.rules) os << "  #" << r.id << ": " << r.to_string() << "\n";
    if (bound.witness_rule) {
        os << "Limit analysis of rule #" << *bound.witness_rule << ":\n";
        for (const auto& d : bound.derivation) os << "  " << d << "\n";
        os << "  family: " << bound.family.to_string() << "\n";
    }
    return os.str();
}

std::string render_proof_json(const PipelineResult& pipe, const BoundResult& bound) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : proof_steps(pipe, bound)) {
        nlohmann::json j;
        j["kind"] = s.kind;
        j["inputs"] = s.inputs;
        if (s.output >= 0) j["output"] = s.output;
        j["justification"] = s.justification;
        steps.push_back(std::move(j));
    }
    return steps.dump(2);
}

}  // namespace itslb
