#include "qorpilot/exec/executor.hpp"

namespace qorpilot::exec {

namespace {

bool field_lower_is_better(const std::string& field) {
    // slack improves upward; everything else improves downward
    return field != "wns_ns" && field != "tns_ns";
}

}  // namespace

MetricModel default_metric_model(const QoRReport& baseline) {
    static const std::vector<std::pair<std::string, double>> defaults = {
        {"routed_wirelength_um", 0.4},
        {"wns_ns", 0.3},
        {"via_count", 0.15},
        {"density", 0.15}};
    MetricModel model;
    for (const auto& [field, weight] : defaults) {
        auto value = baseline.metric(field);
        if (!value || *value <= 0) continue;  // baselines must be positive
        model.metrics[field] = {weight, *value, field_lower_is_better(field)};
    }
    return model;
}

MetricModel single_metric_model(const std::string& field, const QoRReport& baseline) {
    MetricModel model;
    auto value = baseline.metric(field);
    if (value && *value > 0)
        model.metrics[field] = {1.0, *value, field_lower_is_better(field)};
    return model;
}

double composite_score(const QoRReport& report, const MetricModel& model) {
    double total_weight = 0;
    double score = 0;
    for (const auto& [field, mw] : model.metrics) {
        if (mw.weight <= 0) continue;
        total_weight += mw.weight;
        auto value = report.metric(field);
        if (!value) throw MissingMetric("report lacks weighted metric " + field);
        double normalized = mw.lower_is_better ? (mw.baseline - *value) / mw.baseline
                                               : (*value - mw.baseline) / mw.baseline;
        score += mw.weight * normalized;
    }
    if (total_weight <= 0) throw MissingMetric("metric model carries no positive weight");
    return score;
}

}  // namespace qorpilot::exec
