// S2: project a validated plan onto concrete edit surfaces (greedy set
// cover, blast radius from degree centrality + change frequency) and emit
// the ordered granular plan with checks, run configs, probes and rollback
// conditions.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qorpilot/flow/flowsim.hpp"
#include "qorpilot/planner/planner.hpp"

namespace qorpilot::localizer {

QORPILOT_DEFINE_ERROR(UnknownApi);
QORPILOT_DEFINE_ERROR(AmbiguousTarget);
QORPILOT_DEFINE_ERROR(ConflictingSteps);

using graph::NodeId;

struct EditSurface {
    std::set<NodeId> covering_nodes;  // chosen entity nodes plus their File nodes
    std::set<std::string> files;
    std::map<size_t, std::set<NodeId>> coverage;  // intervention index -> entity nodes
    double blast_radius = 0;
    std::map<NodeId, double> node_blast;  // per-node contribution
};

struct LocalizeOptions {
    size_t ambiguous_cap = 8;  // > cap candidate nodes per target -> AmbiguousTarget
    double degree_weight = 0.5;
    double change_freq_weight = 0.5;
};

EditSurface localize(const planner::HighLevelPlan& plan, const graph::CodeGraph& graph,
                     const std::map<std::string, double>* change_freq = nullptr,
                     const LocalizeOptions& options = {});

enum class PreCheck { Build, UnitTests, FlowSmoke, Format };

std::string_view pre_check_name(PreCheck c);
std::optional<PreCheck> pre_check_from(std::string_view name);

struct StepPost {
    double min_composite_improvement = 0.001;
    std::vector<std::string> rollback_on;  // gate reason names
};

struct GranularStep {
    std::string id;  // "step-001", ordinal after sorting
    NodeId target;
    std::string target_api;
    std::string edit_description;
    std::optional<std::string> patch;  // literal patch text when preplanned
    std::vector<PreCheck> pre_checks;
    flow::FlowRunConfig run_config;
    std::vector<std::string> probes;  // QoR field names
    StepPost post;
    std::vector<size_t> interventions;   // covered intervention indices
    std::set<std::string> surface_files;
};

struct GranularPlan {
    Hash128 plan_id;
    Hash128 provenance;  // hash of the high-level plan
    std::vector<GranularStep> steps;
};

struct AssembleOptions {
    double epsilon = 0.001;  // default min composite improvement
    std::vector<PreCheck> pre_checks = {PreCheck::Build, PreCheck::UnitTests};
};

// One step per covering entity node (interventions sharing a node merge into
// its step), ordered safest-first by blast contribution, ties by node id.
GranularPlan assemble_granular_plan(const planner::HighLevelPlan& plan,
                                    const EditSurface& surface,
                                    const flow::FlowRunConfig& flow_template,
                                    const AssembleOptions& options = {});

std::string granular_to_json(const GranularPlan& plan);
GranularPlan granular_from_json(std::string_view bytes);

}  // namespace qorpilot::localizer
