#include "itslb/pipeline.hpp"

#include "itslb/recurrence.hpp"

#include <algorithm>
#include <functional>

namespace itslb {

namespace {

struct Pipeline {
    Program prog;
    const PipelineConfig& cfg;
    const SmtSolver& smt;
    PipelineResult res;

    Pipeline(const Program& p, const PipelineConfig& c, const SmtSolver& s)
        : prog(p), cfg(c), smt(s) {}

    bool expired() const {
        return cfg.deadline && std::chrono::steady_clock::now() > *cfg.deadline;
    }

    void log(const std::string& action, RuleId result, std::vector<RuleId> parents,
             const std::string& detail = "") {
        res.log.push_back(PipelineEvent{action, result, std::move(parents), detail});
    }

    RuleId add(TransformedRule tr, const std::string& action, const std::string& detail = "") {
        RuleId id = prog.add_rule(tr.rule);
        res.provenance[id] = std::move(tr.prov);
        res.rule_snapshots[id] = *prog.find(id);
        log(action, id, res.provenance[id].parents, detail);
        return id;
    }

    void remove(RuleId id, const std::string& why) {
        if (!prog.find(id)) return;
        prog.remove_rule(id);
        log("delete", -1, {id}, why);
    }

    bool accelerated_like(RuleId id) const {
        auto it = res.provenance.find(id);
        if (it == res.provenance.end()) return false;
        switch (it->second.kind) {
            case Provenance::Kind::Accelerated:
            case Provenance::Kind::AcceleratedRecursion: return true;
            case Provenance::Kind::Instantiated:
                return !it->second.parents.empty() && accelerated_like(it->second.parents[0]);
            default: return false;
        }
    }

    bool guard_viable(const Rule& r) {
        if (r.guard.is_ground_false()) return false;
        auto sat = smt.check_sat_int(Formula::of_guard(r.guard), cfg.smt_timeout_ms);
        return !sat.unsat();  // Unknown keeps the rule
    }

    // ---- step 1 -------------------------------------------------------------
    void delete_unsat_unreachable() {
        auto reach = prog.reachable_from_start();
        std::vector<RuleId> doomed;
        for (const auto& r : prog.rules) {
            if (!reach.count(r.lhs_root) || !guard_viable(r)) doomed.push_back(r.id);
        }
        for (RuleId id : doomed) remove(id, "unsatisfiable guard or unreachable symbol");
    }

    // ---- step 2: occurrences of symbols without outgoing rules --------------
    bool symbol_dead(const std::string& sym) const {
        return sym != kSinkSymbol && prog.outgoing(sym).empty();
    }

    void cleanup_dead_occurrences() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& r : prog.rules) {
                if (r.degree() >= 2) {
                    size_t dead = r.rhs.size();
                    for (size_t i = 0; i < r.rhs.size(); ++i)
                        if (symbol_dead(r.rhs[i].root)) {
                            dead = i;
                            break;
                        }
                    if (dead == r.rhs.size()) continue;
                    std::vector<size_t> keep;
                    for (size_t j = 0; j < r.rhs.size(); ++j)
                        if (j != dead) keep.push_back(j);
                    std::string sym = r.rhs[dead].root;
                    RuleId old = r.id;
                    add(partial_delete(r, keep), "partial-delete", "dropped dead symbol " + sym);
                    remove(old, "replaced by partial deletion");
                    changed = true;
                    break;
                }
                // a degree-1 continuation into a symbol without rules acts as a
                // sink; rewriting it keeps the elimination loop progressing
                if (r.lhs_root != prog.start && r.rhs.size() == 1 &&
                    symbol_dead(r.rhs[0].root)) {
                    Rule nr = r;
                    nr.rhs = {sink_term(static_cast<int>(r.lhs_vars.size()))};
                    RuleId old = r.id;
                    TransformedRule tr{nr, Provenance{}};
                    tr.prov.kind = Provenance::Kind::PartialDeleted;
                    tr.prov.parents = {old};
                    add(std::move(tr), "partial-delete", "dead continuation replaced by sink");
                    remove(old, "replaced by sink continuation");
                    changed = true;
                    break;
                }
            }
        }
    }

    // ---- step 3: acceleration ------------------------------------------------
    std::optional<RuleId> pick_accel_candidate() const {
        for (const auto& r : prog.rules)
            if (classify(r) == RuleClass::SimpleLoop && !accelerated_like(r.id)) return r.id;
        for (const auto& r : prog.rules)
            if (classify(r) == RuleClass::SimpleRecursion && !accelerated_like(r.id)) return r.id;
        return std::nullopt;
    }

    std::optional<RuleId> try_accelerate_loop(Rule r) {
        auto m = find_metering(r, smt);
        if (!m) return std::nullopt;
        Subst mu = update(r);
        std::set<Var> used = r.all_vars();
        for (const auto& v : m->bound.vars()) used.insert(v);
        Var tv = fresh_var("tv", used);
        auto mu_it = iterated_update(mu, tv);
        if (!mu_it) return std::nullopt;
        auto c_it = iterated_cost(r.cost, mu, *mu_it, tv);
        if (!c_it) return std::nullopt;
        RuleId acc = add(accelerate_loop(r, *m, *mu_it, *c_it, tv, smt), "accelerate",
                         "metering " + m->to_string());
        if (!m->fresh_tv && m->bound.is_polynomial() && maps_to_int(m->bound)) {
            Rule accelerated = *prog.find(acc);
            RuleId inst = add(instantiate(accelerated, tv, m->bound, smt), "instantiate",
                              tv.name + " := " + m->bound.to_string());
            remove(acc, "replaced by instantiation");
            return inst;
        }
        return acc;
    }

    std::optional<RuleId> try_accelerate_recursion(Rule r) {
        auto m = find_metering_rec(r, smt);
        if (!m) return std::nullopt;
        return add(accelerate_recursion(r, *m, smt), "accelerate-recursion",
                   "metering " + m->to_string());
    }

    void partial_deletion_fallback(const Rule& r) {
        auto try_subsets = [&](size_t size) {
            bool any = false;
            std::vector<size_t> sel;
            std::function<void(size_t, size_t)> rec = [&](size_t start, size_t left) {
                if (left == 0) {
                    TransformedRule pd = partial_delete(r, sel);
                    RuleId pid = prog.add_rule(pd.rule);
                    res.provenance[pid] = pd.prov;
                    res.rule_snapshots[pid] = *prog.find(pid);
                    Rule cand = *prog.find(pid);
                    std::optional<RuleId> acc;
                    if (classify(cand) == RuleClass::SimpleLoop)
                        acc = try_accelerate_loop(cand);
                    else if (classify(cand) == RuleClass::SimpleRecursion)
                        acc = try_accelerate_recursion(cand);
                    if (acc) {
                        any = true;
                        log("partial-delete", pid, {r.id}, "enabled acceleration");
                    }
                    remove(pid, "partial-deletion intermediate");
                    return;
                }
                for (size_t i = start; i + left <= r.rhs.size(); ++i) {
                    sel.push_back(i);
                    rec(i + 1, left - 1);
                    sel.pop_back();
                }
            };
            rec(0, size);
            return any;
        };
        if (r.degree() > 2 && try_subsets(2)) return;
        try_subsets(1);
    }

    void acceleration_phase() {
        int guardrail = 0;
        while (auto cand = pick_accel_candidate()) {
            if (expired() || ++guardrail > 400) {
                res.timed_out = res.timed_out || expired();
                return;
            }
            Rule r = *prog.find(*cand);
            bool is_loop = classify(r) == RuleClass::SimpleLoop;
            bool done = is_loop ? try_accelerate_loop(r).has_value()
                                : try_accelerate_recursion(r).has_value();
            if (!done) {
                if (!r.temp_vars().empty()) {
                    auto h = instantiate_heuristic(r, smt);
                    if (h)
                        add(instantiate(r, h->first, h->second, smt), "instantiate",
                            h->first.name + " := " + h->second.to_string());
                } else if (r.degree() > 1) {
                    partial_deletion_fallback(r);
                }
            }
            remove(r.id, "processed by the acceleration phase");
        }
    }

    // ---- steps 4-5: fold accelerated rules into their predecessors ----------
    void chain_accelerated() {
        std::set<RuleId> feeders;
        int guardrail = 0;
        while (!expired() && ++guardrail < 400) {
            std::optional<RuleId> accel;
            for (const auto& r : prog.rules)
                if (accelerated_like(r.id)) {
                    accel = r.id;
                    break;
                }
            if (!accel) break;
            Rule a = *prog.find(*accel);
            std::vector<RuleId> snapshot;
            for (const auto& r : prog.rules)
                if (r.id != a.id && r.lhs_root != a.lhs_root) snapshot.push_back(r.id);
            for (RuleId rid : snapshot) {
                Rule r = *prog.find(rid);
                size_t at = r.rhs.size();
                for (size_t i = 0; i < r.rhs.size(); ++i)
                    if (r.rhs[i].root == a.lhs_root) {
                        at = i;
                        break;
                    }
                if (at == r.rhs.size()) continue;
                TransformedRule c = chain(r, a, at, smt);
                if (guard_viable(c.rule)) {
                    add(std::move(c), "chain");
                    feeders.insert(rid);
                }
            }
            remove(a.id, "accelerated rule folded into predecessors");
        }
        for (RuleId id : feeders) remove(id, "chained into accelerated successors");
    }

    // ---- step 6: eliminate loop-free symbols --------------------------------
    std::optional<std::string> pick_eliminable() const {
        std::vector<std::pair<int, std::string>> cands;
        for (const auto& f : prog.symbols()) {
            if (f == prog.start || f == kSinkSymbol) continue;
            auto in = prog.incoming(f);
            auto out = prog.outgoing(f);
            if (in.empty() || out.empty()) continue;
            bool has_loop = false;
            for (RuleId id : out) {
                auto cls = classify(*prog.find(id));
                if (cls == RuleClass::SimpleLoop || cls == RuleClass::SimpleRecursion)
                    has_loop = true;
            }
            if (!has_loop) cands.push_back({static_cast<int>(in.size()), f});
        }
        if (cands.empty()) return std::nullopt;
        std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
            if ((a.first == 1) != (b.first == 1)) return a.first == 1;
            return a.second < b.second;
        });
        return cands[0].second;
    }

    void eliminate_symbols() {
        int symbols_guard = 0;
        while (!expired() && ++symbols_guard < 200) {
            auto f = pick_eliminable();
            if (!f) break;
            auto outgoing = prog.outgoing(*f);
            std::set<RuleId> processed;
            int chain_guard = 0;
            bool progress = true;
            while (progress && ++chain_guard < 64) {
                progress = false;
                RuleId feeder = -1;
                size_t at = 0;
                for (const auto& r : prog.rules) {
                    if (r.lhs_root == *f || processed.count(r.id)) continue;
                    for (size_t i = 0; i < r.rhs.size(); ++i)
                        if (r.rhs[i].root == *f) {
                            feeder = r.id;
                            at = i;
                            break;
                        }
                    if (feeder >= 0) break;
                }
                if (feeder < 0) break;
                processed.insert(feeder);
                Rule r = *prog.find(feeder);
                bool any = false;
                for (RuleId oid : outgoing) {
                    Rule o = *prog.find(oid);
                    TransformedRule c = chain(r, o, at, smt);
                    if (guard_viable(c.rule)) {
                        add(std::move(c), "chain");
                        any = true;
                    } else {
                        log("chain-skip", -1, {r.id, oid}, "unsatisfiable connection");
                    }
                }
                if (any) remove(r.id, "chained through eliminated symbol");
                progress = true;
            }
            for (RuleId oid : outgoing) remove(oid, "outgoing rule of eliminated symbol");
        }
    }

    void enforce_rule_cap() {
        if (static_cast<int>(prog.rules.size()) <= cfg.rule_cap) return;
        res.rule_cap_hit = true;
        std::vector<RuleId> order;
        for (const auto& r : prog.rules) order.push_back(r.id);
        auto priority = [&](RuleId id) {
            const Rule* r = prog.find(id);
            int derived = res.provenance.count(id) &&
                                  res.provenance.at(id).kind != Provenance::Kind::Original
                              ? 1
                              : 0;
            int deg = 100;
            if (r->cost.is_polynomial()) deg = r->cost.total_degree();
            return std::make_tuple(derived, deg, -id);
        };
        std::sort(order.begin(), order.end(),
                  [&](RuleId a, RuleId b) { return priority(a) < priority(b); });
        while (static_cast<int>(prog.rules.size()) > cfg.rule_cap && !order.empty()) {
            remove(order.front(), "rule cap pruning");
            order.erase(order.begin());
        }
    }

    // presentation-level final pruning: drop a conjunct when the rest implies
    // it for nonnegative program variables (matches the reported guards)
    void prune_report_guards() {
        std::vector<Constraint> nonneg;
        for (const auto& v : prog.program_vars) nonneg.push_back(constraint_ge(expr(v)));
        for (auto& r : prog.rules) {
            std::vector<Constraint> kept(r.guard.conjuncts());
            for (size_t i = 0; i < kept.size();) {
                std::vector<Constraint> prem;
                for (size_t j = 0; j < kept.size(); ++j)
                    if (j != i) prem.push_back(kept[j]);
                prem.insert(prem.end(), nonneg.begin(), nonneg.end());
                if (smt.proves(Guard(prem), kept[i]))
                    kept.erase(kept.begin() + i);
                else
                    ++i;
            }
            Guard pruned(kept);
            if (!(pruned == r.guard)) {
                r.guard = pruned;
                res.rule_snapshots[r.id] = r;
                log("prune-guard", r.id, {r.id}, pruned.to_string());
            }
        }
    }

    void run() {
        for (const auto& r : prog.rules) {
            res.provenance[r.id] = Provenance{};
            res.rule_snapshots[r.id] = r;
        }
        prog.next_id = 0;
        for (const auto& r : prog.rules) prog.next_id = std::max(prog.next_id, r.id + 1);
        int outer = 0;
        auto unfinished = [&] {
            return std::any_of(prog.rules.begin(), prog.rules.end(),
                               [&](const Rule& r) { return r.lhs_root != prog.start; });
        };
        while (unfinished()) {
            if (expired() || ++outer > 500) {
                res.timed_out = true;
                break;
            }
            delete_unsat_unreachable();
            cleanup_dead_occurrences();
            acceleration_phase();
            chain_accelerated();
            cleanup_dead_occurrences();
            eliminate_symbols();
            enforce_rule_cap();
        }
        delete_unsat_unreachable();
        if (cfg.prune_report_guards) prune_report_guards();
        res.program = prog;
    }
};

}  // namespace

PipelineResult simplify(const Program& input, const PipelineConfig& cfg, const SmtSolver& smt) {
    Pipeline p(input, cfg, smt);
    p.run();
    return p.res;
}

}  // namespace itslb
