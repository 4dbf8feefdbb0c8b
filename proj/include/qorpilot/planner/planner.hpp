// S1 planning: retrieve diverse evidence from the repo and literature
// corpora (MMR re-ranking), synthesize a structured high-level plan, and
// validate it against the graph and cards before anything executes.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qorpilot/doc/docmaker.hpp"
#include "qorpilot/retrieval/index.hpp"

namespace qorpilot::planner {

QORPILOT_DEFINE_ERROR(HallucinatedTarget);

enum class Metric { RoutedWirelength, EffectiveClockPeriod, WNS, TNS, Power };

std::string_view metric_name(Metric m);
std::optional<Metric> metric_from(std::string_view name);  // long name or alias
// QoR report field the metric reads, e.g. "routed_wirelength_um"
std::string_view metric_qor_field(Metric m);
bool metric_lower_is_better(Metric m);

struct Objective {
    Metric metric = Metric::RoutedWirelength;
    bool lower_is_better = true;
    std::set<std::string> scope;  // allowed target modules, non-empty
    std::string context;
};

Objective make_objective(Metric metric, std::set<std::string> scope, std::string context = {});

struct EvidenceDoc {
    retrieval::DocId doc_id;
    retrieval::Source source = retrieval::Source::Literature;
    std::optional<graph::NodeId> subject;
    std::string text;
    double relevance = 0;  // min-max normalized within its corpus
};

struct Hypothesis {
    std::string statement;
    std::vector<retrieval::DocId> evidence;  // at least one
};

struct PlanKnob {
    std::string name;
    std::string proposed;
    std::string range;  // "<lo>..<hi>", "{a,b,c}" or ""
};

enum class InterventionKind { TuneKnob, ModifyCostModel, AddMode, RestructurePass };

std::string_view intervention_kind_name(InterventionKind k);
std::optional<InterventionKind> intervention_kind_from(std::string_view name);

struct Intervention {
    InterventionKind kind = InterventionKind::TuneKnob;
    std::string target_api;
    std::optional<PlanKnob> knob;  // present iff kind == TuneKnob
    std::string description;
};

struct HighLevelPlan {
    Objective objective;
    std::vector<Hypothesis> hypotheses;
    std::vector<Intervention> interventions;
    std::vector<std::string> telemetry;
    std::vector<std::pair<std::string, std::string>> suggested_locations;  // api, rationale
};

// --- operations -----------------------------------------------------------------

// Merges scope-tagged repo hits with literature hits, then applies maximal
// marginal relevance: iteratively pick argmax of
//   lambda * relevance - (1 - lambda) * max-similarity-to-picked
// with ties broken by ascending doc id. When both corpora had matches the
// result keeps at least one doc from each.
std::vector<EvidenceDoc> retrieve_context(const Objective& objective,
                                          const retrieval::Index& repo_index,
                                          const retrieval::Index& lit_index, size_t k,
                                          double lambda);

// Every target_api must appear verbatim in the evidence text; a synthesizer
// inventing one raises HallucinatedTarget.
HighLevelPlan synthesize_plan(const Objective& objective,
                              const std::vector<EvidenceDoc>& evidence,
                              doc::Synthesizer& synthesizer);

enum class AssertionKind { ApiExists, ParamInRange, InvariantRespected };

std::string_view assertion_kind_name(AssertionKind k);

struct PlanAssertion {
    AssertionKind kind;
    std::string subject;  // target_api (plus knob name for ranges)
    bool passed = false;
    std::string message;
};

struct ValidateOptions {
    std::vector<std::string> protected_terms = {"legal", "DRC", "sign-off"};
};

std::vector<PlanAssertion> validate_plan(const HighLevelPlan& plan,
                                         const graph::CodeGraph& graph,
                                         const doc::CardStore& cards,
                                         const ValidateOptions& options = {});

inline bool plan_valid(const std::vector<PlanAssertion>& assertions) {
    for (const auto& a : assertions)
        if (!a.passed) return false;
    return true;
}

// Resolution shared with the localizer: exact qualified-name matches, else
// last-component matches; ascending node id.
std::vector<const graph::GraphNode*> resolve_api(const graph::CodeGraph& graph,
                                                 const std::string& target_api);

// canonical plan.json
std::string plan_to_json(const HighLevelPlan& plan);
HighLevelPlan plan_from_json(std::string_view bytes);  // throws JsonParseError
Hash128 plan_hash(const HighLevelPlan& plan);

}  // namespace qorpilot::planner
