#include <algorithm>

#include "qorpilot/planner/planner.hpp"

namespace qorpilot::planner {

namespace {

const std::vector<std::string> kPlanSections = {"hypotheses", "interventions", "telemetry",
                                                "suggested_locations"};

// numeric "lo..hi" or enumerated "{a,b,c}"; empty range accepts anything
bool value_in_range(const std::string& value, const std::string& range, bool* parsed) {
    *parsed = true;
    if (range.empty()) return true;
    if (range.front() == '{' && range.back() == '}') {
        std::string body = range.substr(1, range.size() - 2);
        std::string current;
        for (char c : body + ",") {
            if (c == ',') {
                if (current == value) return true;
                current.clear();
            } else if (c != ' ') {
                current += c;
            }
        }
        return false;
    }
    size_t dots = range.find("..");
    if (dots == std::string::npos) {
        *parsed = false;
        return true;
    }
    try {
        double lo = std::stod(range.substr(0, dots));
        double hi = std::stod(range.substr(dots + 2));
        double v = std::stod(value);
        return v >= lo && v <= hi;
    } catch (const std::exception&) {
        *parsed = false;
        return true;
    }
}

}  // namespace

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::RoutedWirelength: return "RoutedWirelength";
        case Metric::EffectiveClockPeriod: return "EffectiveClockPeriod";
        case Metric::WNS: return "WNS";
        case Metric::TNS: return "TNS";
        case Metric::Power: return "Power";
    }
    return "RoutedWirelength";
}

std::optional<Metric> metric_from(std::string_view name) {
    if (name == "RoutedWirelength" || name == "rwl") return Metric::RoutedWirelength;
    if (name == "EffectiveClockPeriod" || name == "ecp") return Metric::EffectiveClockPeriod;
    if (name == "WNS" || name == "wns") return Metric::WNS;
    if (name == "TNS" || name == "tns") return Metric::TNS;
    if (name == "Power" || name == "power") return Metric::Power;
    return std::nullopt;
}

std::string_view metric_qor_field(Metric m) {
    switch (m) {
        case Metric::RoutedWirelength: return "routed_wirelength_um";
        case Metric::EffectiveClockPeriod: return "ecp_ns";
        case Metric::WNS: return "wns_ns";
        case Metric::TNS: return "tns_ns";
        case Metric::Power: return "power_w";
    }
    return "routed_wirelength_um";
}

bool metric_lower_is_better(Metric m) {
    // slack metrics improve upward (less negative); the rest downward
    return m != Metric::WNS && m != Metric::TNS;
}

Objective make_objective(Metric metric, std::set<std::string> scope, std::string context) {
    Objective o;
    o.metric = metric;
    o.lower_is_better = metric_lower_is_better(metric);
    o.scope = std::move(scope);
    o.context = std::move(context);
    return o;
}

std::string_view intervention_kind_name(InterventionKind k) {
    switch (k) {
        case InterventionKind::TuneKnob: return "TuneKnob";
        case InterventionKind::ModifyCostModel: return "ModifyCostModel";
        case InterventionKind::AddMode: return "AddMode";
        case InterventionKind::RestructurePass: return "RestructurePass";
    }
    return "TuneKnob";
}

std::optional<InterventionKind> intervention_kind_from(std::string_view name) {
    if (name == "TuneKnob") return InterventionKind::TuneKnob;
    if (name == "ModifyCostModel") return InterventionKind::ModifyCostModel;
    if (name == "AddMode") return InterventionKind::AddMode;
    if (name == "RestructurePass") return InterventionKind::RestructurePass;
    return std::nullopt;
}

std::string_view assertion_kind_name(AssertionKind k) {
    switch (k) {
        case AssertionKind::ApiExists: return "ApiExists";
        case AssertionKind::ParamInRange: return "ParamInRange";
        case AssertionKind::InvariantRespected: return "InvariantRespected";
    }
    return "ApiExists";
}

HighLevelPlan synthesize_plan(const Objective& objective,
                              const std::vector<EvidenceDoc>& evidence,
                              doc::Synthesizer& synthesizer) {
    if (objective.scope.empty()) throw Error("objective scope must be non-empty");
    if (evidence.empty()) throw Error("evidence must be non-empty");

    std::string scope_csv;
    for (const auto& tag : objective.scope) {
        if (!scope_csv.empty()) scope_csv += ",";
        scope_csv += tag;
    }

    doc::SynthesizerRequest request;
    request.task = "plan";
    request.sections = kPlanSections;
    std::string text;
    text += "objective: " + std::string(metric_name(objective.metric)) + "\n";
    text += std::string("direction: ") + (objective.lower_is_better ? "lower" : "higher") + "\n";
    text += "scope: " + scope_csv + "\n";
    text += "qor_field: " + std::string(metric_qor_field(objective.metric)) + "\n";
    if (!objective.context.empty()) text += "context: " + objective.context + "\n";
    std::string corpus_text;  // for the anti-hallucination guard
    for (const auto& doc : evidence) {
        text += "begin_doc: " + doc.doc_id.to_hex() + " source=" +
                std::string(retrieval::source_name(doc.source)) + "\n";
        text += doc.text;
        if (!doc.text.empty() && doc.text.back() != '\n') text += "\n";
        text += "end_doc\n";
        corpus_text += doc.text;
        corpus_text += "\n";
    }
    request.evidence = std::move(text);

    doc::SynthesizerResponse response = synthesizer.synthesize(request);
    const Json& sections = response.sections;
    if (!sections.is_object()) throw doc::SchemaViolation("sections is not an object");
    for (const auto& wanted : kPlanSections)
        if (!sections.contains(wanted))
            throw doc::SchemaViolation("missing section: " + wanted);
    for (const auto& [key, value] : sections.items())
        if (std::find(kPlanSections.begin(), kPlanSections.end(), key) == kPlanSections.end())
            throw doc::SchemaViolation("unknown section: " + key);

    HighLevelPlan plan;
    plan.objective = objective;
    try {
        for (const auto& h : sections.at("hypotheses")) {
            Hypothesis hyp;
            hyp.statement = h.at("statement").get<std::string>();
            for (const auto& e : h.at("evidence")) {
                auto id = Hash128::from_hex(e.get<std::string>());
                if (!id) throw doc::SchemaViolation("hypothesis cites a malformed doc id");
                hyp.evidence.push_back(*id);
            }
            if (hyp.evidence.empty())
                throw doc::SchemaViolation("hypothesis cites no evidence");
            plan.hypotheses.push_back(std::move(hyp));
        }
        for (const auto& i : sections.at("interventions")) {
            Intervention iv;
            auto kind = intervention_kind_from(i.at("kind").get<std::string>());
            if (!kind) throw doc::SchemaViolation("unknown intervention kind");
            iv.kind = *kind;
            iv.target_api = i.at("target_api").get<std::string>();
            iv.description = i.value("description", std::string());
            if (i.contains("knob") && !i.at("knob").is_null()) {
                const Json& k = i.at("knob");
                iv.knob = PlanKnob{k.at("name").get<std::string>(),
                                   k.at("proposed").get<std::string>(),
                                   k.value("range", std::string())};
            }
            if (iv.kind == InterventionKind::TuneKnob) {
                if (!iv.knob) throw doc::SchemaViolation("TuneKnob without a knob");
                bool parsed = true;
                if (!value_in_range(iv.knob->proposed, iv.knob->range, &parsed))
                    throw doc::SchemaViolation("TuneKnob proposed value outside its range");
            }
            if (iv.target_api.empty())
                throw doc::SchemaViolation("intervention names no target");
            plan.interventions.push_back(std::move(iv));
        }
        for (const auto& t : sections.at("telemetry"))
            plan.telemetry.push_back(t.get<std::string>());
        for (const auto& s : sections.at("suggested_locations"))
            plan.suggested_locations.emplace_back(s.at("api").get<std::string>(),
                                                  s.value("rationale", std::string()));
    } catch (const nlohmann::json::exception& e) {
        throw doc::SchemaViolation(std::string("malformed section payload: ") + e.what());
    }

    if (plan.interventions.empty())
        throw doc::SchemaViolation("no intervention derivable from evidence");
    for (const auto& iv : plan.interventions)
        if (corpus_text.find(iv.target_api) == std::string::npos)
            throw HallucinatedTarget("target_api not present in evidence: " + iv.target_api);
    return plan;
}

std::vector<const graph::GraphNode*> resolve_api(const graph::CodeGraph& graph,
                                                 const std::string& target_api) {
    std::vector<const graph::GraphNode*> exact;
    for (const auto& [id, node] : graph.nodes)
        if (node.qualified_name == target_api &&
            (node.kind == graph::NodeKind::Definition ||
             node.kind == graph::NodeKind::Declaration ||
             node.kind == graph::NodeKind::SccGroup))
            exact.push_back(&node);
    if (!exact.empty()) return exact;
    // last component
    std::string suffix1 = "::" + target_api;
    std::string suffix2 = "." + target_api;
    std::vector<const graph::GraphNode*> loose;
    for (const auto& [id, node] : graph.nodes) {
        if (node.kind != graph::NodeKind::Definition && node.kind != graph::NodeKind::SccGroup)
            continue;
        const std::string& q = node.qualified_name;
        auto ends_with = [&](const std::string& suffix) {
            return q.size() > suffix.size() &&
                   q.compare(q.size() - suffix.size(), suffix.size(), suffix) == 0;
        };
        if (ends_with(suffix1) || ends_with(suffix2)) loose.push_back(&node);
    }
    return loose;
}

std::vector<PlanAssertion> validate_plan(const HighLevelPlan& plan,
                                         const graph::CodeGraph& graph,
                                         const doc::CardStore& cards,
                                         const ValidateOptions& options) {
    std::vector<PlanAssertion> assertions;
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    };

    for (const auto& iv : plan.interventions) {
        auto nodes = resolve_api(graph, iv.target_api);
        {
            PlanAssertion a{AssertionKind::ApiExists, iv.target_api, !nodes.empty(),
                            nodes.empty() ? "no graph node matches " + iv.target_api
                                          : "resolved to " + nodes[0]->qualified_name};
            assertions.push_back(std::move(a));
        }
        const doc::DocCard* card = nullptr;
        if (!nodes.empty()) card = cards.find(nodes[0]->id);

        if (iv.kind == InterventionKind::TuneKnob && iv.knob) {
            PlanAssertion a{AssertionKind::ParamInRange, iv.target_api + "/" + iv.knob->name,
                            true, ""};
            std::string range;
            if (card) {
                for (const auto& knob : card->config_knobs)
                    if (knob.name == iv.knob->name) range = knob.range;
            }
            if (range.empty()) {
                a.passed = true;
                a.message = "no range recorded on the card; passes vacuously (warning)";
            } else {
                bool parsed = true;
                bool ok = value_in_range(iv.knob->proposed, range, &parsed);
                if (!parsed) {
                    a.passed = true;
                    a.message = "unparsable range '" + range + "'; passes vacuously (warning)";
                } else {
                    a.passed = ok;
                    a.message = "value " + iv.knob->proposed + " vs range " + range;
                }
            }
            assertions.push_back(std::move(a));
        }

        // protected-term check against the card preconditions
        PlanAssertion inv{AssertionKind::InvariantRespected, iv.target_api, true, ""};
        if (card) {
            std::string desc = lower(iv.description);
            for (const auto& term : options.protected_terms) {
                std::string needle = lower(term);
                bool mentioned = false;
                for (const auto& pre : card->preconditions)
                    if (lower(pre).find(needle) != std::string::npos) mentioned = true;
                if (mentioned && desc.find(needle) == std::string::npos) {
                    inv.passed = false;
                    inv.message = "card precondition mentions '" + term +
                                  "' but the intervention does not address it";
                    break;
                }
            }
        }
        if (inv.passed && inv.message.empty()) inv.message = "no protected terms implicated";
        assertions.push_back(std::move(inv));
    }
    return assertions;
}

}  // namespace qorpilot::planner
