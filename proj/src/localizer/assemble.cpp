#include <algorithm>

#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/localizer/localizer.hpp"

namespace qorpilot::localizer {

std::string_view pre_check_name(PreCheck c) {
    switch (c) {
        case PreCheck::Build: return "Build";
        case PreCheck::UnitTests: return "UnitTests";
        case PreCheck::FlowSmoke: return "FlowSmoke";
        case PreCheck::Format: return "Format";
    }
    return "Build";
}

std::optional<PreCheck> pre_check_from(std::string_view name) {
    if (name == "Build") return PreCheck::Build;
    if (name == "UnitTests") return PreCheck::UnitTests;
    if (name == "FlowSmoke") return PreCheck::FlowSmoke;
    if (name == "Format") return PreCheck::Format;
    return std::nullopt;
}

GranularPlan assemble_granular_plan(const planner::HighLevelPlan& plan,
                                    const EditSurface& surface,
                                    const flow::FlowRunConfig& flow_template,
                                    const AssembleOptions& options) {
    for (size_t i = 0; i < plan.interventions.size(); ++i)
        if (!surface.coverage.count(i) || surface.coverage.at(i).empty())
            throw Error("surface does not cover intervention " + std::to_string(i));

    // group interventions by their covering node; one step per node
    std::map<NodeId, std::vector<size_t>> by_node;
    for (const auto& [idx, nodes] : surface.coverage)
        for (NodeId id : nodes) by_node[id].push_back(idx);

    // conflict: two structural rewrites of the same node cannot merge
    for (const auto& [id, indices] : by_node) {
        size_t structural = 0;
        for (size_t i : indices)
            if (plan.interventions[i].kind != planner::InterventionKind::TuneKnob)
                ++structural;
        if (structural >= 2)
            throw ConflictingSteps("node " + id.to_hex() + " is rewritten by " +
                                   std::to_string(structural) + " structural interventions");
    }

    std::vector<std::string> probes;
    for (const auto& t : plan.telemetry) {
        const auto& fields = flow::qor_metric_fields();
        if (std::find(fields.begin(), fields.end(), t) != fields.end()) probes.push_back(t);
    }
    if (probes.empty())
        probes.push_back(std::string(planner::metric_qor_field(plan.objective.metric)));

    GranularPlan out;
    out.provenance = planner::plan_hash(plan);

    for (const auto& [node_id, indices] : by_node) {
        GranularStep step;
        step.target = node_id;
        step.pre_checks = options.pre_checks;
        if (std::find(step.pre_checks.begin(), step.pre_checks.end(), PreCheck::Build) ==
            step.pre_checks.end())
            step.pre_checks.insert(step.pre_checks.begin(), PreCheck::Build);
        step.run_config = flow_template;
        step.probes = probes;
        step.post.min_composite_improvement = options.epsilon;
        step.post.rollback_on = {"BuildFailed", "TestsFailed", "NewDrcs", "WnsDegraded"};
        step.interventions = indices;
        std::sort(step.interventions.begin(), step.interventions.end());
        for (size_t i : step.interventions) {
            const auto& iv = plan.interventions[i];
            if (!step.edit_description.empty()) step.edit_description += "; ";
            step.edit_description += iv.description.empty()
                                         ? std::string(planner::intervention_kind_name(iv.kind)) +
                                               " " + iv.target_api
                                         : iv.description;
            if (iv.kind == planner::InterventionKind::TuneKnob && iv.knob)
                step.run_config.parameters[iv.knob->name] = iv.knob->proposed;
            if (step.target_api.empty()) step.target_api = iv.target_api;
        }
        out.steps.push_back(std::move(step));
    }

    // safest first: ascending blast contribution, ties by node id
    std::sort(out.steps.begin(), out.steps.end(),
              [&](const GranularStep& a, const GranularStep& b) {
                  double ba = surface.node_blast.count(a.target)
                                  ? surface.node_blast.at(a.target)
                                  : 0.0;
                  double bb = surface.node_blast.count(b.target)
                                  ? surface.node_blast.at(b.target)
                                  : 0.0;
                  if (ba != bb) return ba < bb;
                  return a.target < b.target;
              });

    Md5 id_hash;
    id_hash.update(out.provenance.to_hex());
    for (size_t i = 0; i < out.steps.size(); ++i) {
        auto& step = out.steps[i];
        char buf[16];
        std::snprintf(buf, sizeof(buf), "step-%03zu", i + 1);
        step.id = buf;
        step.surface_files = surface.files;
        id_hash.update(step.target.to_hex());
        id_hash.update(flow::config_fingerprint(step.run_config).to_hex());
    }
    out.plan_id = id_hash.digest();
    return out;
}

std::string granular_to_json(const GranularPlan& plan) {
    Json j;
    j["plan_id"] = plan.plan_id.to_hex();
    j["provenance"] = plan.provenance.to_hex();
    Json steps = Json::array();
    for (const auto& s : plan.steps) {
        Json sj;
        sj["id"] = s.id;
        sj["target"] = s.target.to_hex();
        sj["target_api"] = s.target_api;
        sj["edit_description"] = s.edit_description;
        sj["patch"] = s.patch ? Json(*s.patch) : Json(nullptr);
        Json checks = Json::array();
        for (auto c : s.pre_checks) checks.push_back(pre_check_name(c));
        sj["pre_checks"] = std::move(checks);
        sj["run_config"] = Json::parse(flow::render_flow_config(s.run_config));
        sj["probes"] = s.probes;
        sj["post"] = Json{{"min_composite_improvement", s.post.min_composite_improvement},
                          {"rollback_on", s.post.rollback_on}};
        sj["interventions"] = s.interventions;
        sj["surface_files"] = s.surface_files;
        steps.push_back(std::move(sj));
    }
    j["steps"] = std::move(steps);
    return canonical_dump(j);
}

GranularPlan granular_from_json(std::string_view bytes) {
    Json j = parse_json(bytes, "granular plan");
    try {
        GranularPlan plan;
        auto pid = Hash128::from_hex(j.at("plan_id").get<std::string>());
        auto prov = Hash128::from_hex(j.at("provenance").get<std::string>());
        if (!pid || !prov) throw JsonParseError("granular plan: bad hash");
        plan.plan_id = *pid;
        plan.provenance = *prov;
        for (const auto& sj : j.at("steps")) {
            GranularStep step;
            step.id = sj.at("id").get<std::string>();
            auto target = Hash128::from_hex(sj.at("target").get<std::string>());
            if (!target) throw JsonParseError("granular plan: bad target id");
            step.target = *target;
            step.target_api = sj.at("target_api").get<std::string>();
            step.edit_description = sj.value("edit_description", std::string());
            if (sj.contains("patch") && !sj.at("patch").is_null())
                step.patch = sj.at("patch").get<std::string>();
            for (const auto& c : sj.at("pre_checks")) {
                auto check = pre_check_from(c.get<std::string>());
                if (!check) throw JsonParseError("granular plan: unknown pre check");
                step.pre_checks.push_back(*check);
            }
            step.run_config = flow::parse_flow_config_json(sj.at("run_config").dump());
            for (const auto& p : sj.at("probes")) step.probes.push_back(p.get<std::string>());
            const Json& post = sj.at("post");
            step.post.min_composite_improvement =
                post.at("min_composite_improvement").get<double>();
            if (step.post.min_composite_improvement < 0)
                throw JsonParseError("granular plan: negative epsilon");
            for (const auto& r : post.at("rollback_on"))
                step.post.rollback_on.push_back(r.get<std::string>());
            for (const auto& i : sj.at("interventions"))
                step.interventions.push_back(i.get<size_t>());
            for (const auto& f : sj.at("surface_files"))
                step.surface_files.insert(f.get<std::string>());
            plan.steps.push_back(std::move(step));
        }
        // no-self-conflict invariant
        std::set<NodeId> seen;
        for (const auto& s : plan.steps)
            if (!seen.insert(s.target).second)
                throw JsonParseError("granular plan: a node is targeted by two steps");
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw JsonParseError(std::string("granular plan: ") + e.what());
    }
}

}  // namespace qorpilot::localizer
