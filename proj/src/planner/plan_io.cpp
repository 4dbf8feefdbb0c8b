#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/planner/planner.hpp"

namespace qorpilot::planner {

std::string plan_to_json(const HighLevelPlan& plan) {
    Json j;
    Json objective;
    objective["metric"] = metric_name(plan.objective.metric);
    objective["lower_is_better"] = plan.objective.lower_is_better;
    objective["scope"] = plan.objective.scope;
    objective["context"] = plan.objective.context;
    j["objective"] = std::move(objective);

    Json hypotheses = Json::array();
    for (const auto& h : plan.hypotheses) {
        Json hj;
        hj["statement"] = h.statement;
        Json ev = Json::array();
        for (const auto& id : h.evidence) ev.push_back(id.to_hex());
        hj["evidence"] = std::move(ev);
        hypotheses.push_back(std::move(hj));
    }
    j["hypotheses"] = std::move(hypotheses);

    Json interventions = Json::array();
    for (const auto& iv : plan.interventions) {
        Json ij;
        ij["kind"] = intervention_kind_name(iv.kind);
        ij["target_api"] = iv.target_api;
        ij["knob"] = iv.knob ? Json{{"name", iv.knob->name},
                                    {"proposed", iv.knob->proposed},
                                    {"range", iv.knob->range}}
                             : Json(nullptr);
        ij["description"] = iv.description;
        interventions.push_back(std::move(ij));
    }
    j["interventions"] = std::move(interventions);
    j["telemetry"] = plan.telemetry;

    Json locations = Json::array();
    for (const auto& [api, rationale] : plan.suggested_locations)
        locations.push_back(Json{{"api", api}, {"rationale", rationale}});
    j["suggested_locations"] = std::move(locations);
    return canonical_dump(j);
}

HighLevelPlan plan_from_json(std::string_view bytes) {
    Json j = parse_json(bytes, "plan file");
    try {
        HighLevelPlan plan;
        const Json& o = j.at("objective");
        auto metric = metric_from(o.at("metric").get<std::string>());
        if (!metric) throw JsonParseError("plan file: unknown metric");
        plan.objective.metric = *metric;
        plan.objective.lower_is_better = o.at("lower_is_better").get<bool>();
        for (const auto& s : o.at("scope"))
            plan.objective.scope.insert(s.get<std::string>());
        plan.objective.context = o.value("context", std::string());

        for (const auto& h : j.at("hypotheses")) {
            Hypothesis hyp;
            hyp.statement = h.at("statement").get<std::string>();
            for (const auto& e : h.at("evidence")) {
                auto id = Hash128::from_hex(e.get<std::string>());
                if (!id) throw JsonParseError("plan file: bad evidence id");
                hyp.evidence.push_back(*id);
            }
            plan.hypotheses.push_back(std::move(hyp));
        }
        for (const auto& i : j.at("interventions")) {
            Intervention iv;
            auto kind = intervention_kind_from(i.at("kind").get<std::string>());
            if (!kind) throw JsonParseError("plan file: unknown intervention kind");
            iv.kind = *kind;
            iv.target_api = i.at("target_api").get<std::string>();
            iv.description = i.value("description", std::string());
            if (i.contains("knob") && !i.at("knob").is_null()) {
                const Json& k = i.at("knob");
                iv.knob = PlanKnob{k.at("name").get<std::string>(),
                                   k.at("proposed").get<std::string>(),
                                   k.value("range", std::string())};
            }
            plan.interventions.push_back(std::move(iv));
        }
        for (const auto& t : j.at("telemetry")) plan.telemetry.push_back(t.get<std::string>());
        for (const auto& s : j.at("suggested_locations"))
            plan.suggested_locations.emplace_back(s.at("api").get<std::string>(),
                                                  s.value("rationale", std::string()));
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw JsonParseError(std::string("plan file: ") + e.what());
    }
}

Hash128 plan_hash(const HighLevelPlan& plan) { return md5(plan_to_json(plan)); }

}  // namespace qorpilot::planner
