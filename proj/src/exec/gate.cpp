#include "qorpilot/exec/executor.hpp"

namespace qorpilot::exec {

std::string_view gate_reason_name(GateReason r) {
    switch (r) {
        case GateReason::NewDrcs: return "NewDrcs";
        case GateReason::WnsDegraded: return "WnsDegraded";
        case GateReason::BuildFailed: return "BuildFailed";
        case GateReason::TestsFailed: return "TestsFailed";
        case GateReason::NoImprovement: return "NoImprovement";
    }
    return "NoImprovement";
}

GateDecision gate(const QoRReport& candidate, const QoRReport& baseline, bool build_ok,
                  bool tests_ok, const MetricModel& model, const GateConfig& config) {
    GateDecision decision;

    if (config.require_build && !build_ok) decision.reasons.push_back(GateReason::BuildFailed);
    if (config.require_tests && !tests_ok) decision.reasons.push_back(GateReason::TestsFailed);

    if (config.forbid_new_drcs) {
        if (candidate.drc_count && baseline.drc_count) {
            if (*candidate.drc_count > *baseline.drc_count)
                decision.reasons.push_back(GateReason::NewDrcs);
        } else {
            decision.warnings.push_back("drc gate passes vacuously: count missing");
        }
    }

    if (candidate.wns_ns && baseline.wns_ns) {
        if (*candidate.wns_ns < *baseline.wns_ns - config.wns_degradation_threshold_ns)
            decision.reasons.push_back(GateReason::WnsDegraded);
    } else {
        decision.warnings.push_back("wns gate passes vacuously: wns missing");
    }

    // composite delta over the model rebased onto this baseline; metrics
    // missing on either side drop out with a warning
    MetricModel rebased;
    for (const auto& [field, mw] : model.metrics) {
        if (mw.weight <= 0) continue;
        auto base_value = baseline.metric(field);
        auto cand_value = candidate.metric(field);
        if (!base_value || *base_value <= 0 || !cand_value) {
            decision.warnings.push_back("composite term dropped (metric missing): " + field);
            continue;
        }
        rebased.metrics[field] = {mw.weight, *base_value, mw.lower_is_better};
    }
    if (rebased.metrics.empty()) {
        decision.warnings.push_back("no comparable composite metric; delta = 0");
        decision.composite_delta = 0;
    } else {
        decision.composite_delta = composite_score(candidate, rebased);
    }
    if (decision.composite_delta <= 0)
        decision.reasons.push_back(GateReason::NoImprovement);

    decision.accepted = decision.reasons.empty();
    return decision;
}

}  // namespace qorpilot::exec
