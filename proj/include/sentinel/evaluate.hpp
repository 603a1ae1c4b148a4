#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentinel/monitor.hpp"
#include "sentinel/synth.hpp"

namespace sentinel {

struct WarningRow {
    Timestamp timestamp = 0;
    std::string farm_id;
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    int old_level = 0;
    int new_level = 0;
    double kpi = 0.0;
};

std::vector<WarningRow> load_warning_log(const std::string& path);
std::vector<GroundTruthLabel> load_labels(const std::string& path);

struct FaultOutcome {
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    TimeInterval degrading;
    bool detected = false;
    Timestamp first_warning = 0;  // meaningful only when detected
    double lead_days = 0.0;       // failure - first warning, only when detected
    int max_level = 0;            // highest level reached before the failure
};

struct EvaluationReport {
    std::vector<FaultOutcome> faults;
    std::size_t detected_count = 0;
    std::optional<double> detection_rate;  // absent when no faults are labeled
    std::size_t false_positive_events = 0;
    double healthy_component_years = 0.0;
    std::optional<double> false_positives_per_component_year;
    std::size_t total_events = 0;
};

/// Matches warning events against labeled intervals: a fault (one degrading
/// interval) counts as detected when any escalation fires inside it; events
/// inside healthy intervals (or with no matching label) are false positives.
EvaluationReport evaluate_warnings(const std::vector<WarningRow>& events,
                                   const std::vector<GroundTruthLabel>& labels);

std::string report_text(const EvaluationReport& report);
nlohmann::json report_json(const EvaluationReport& report);

} // namespace sentinel
