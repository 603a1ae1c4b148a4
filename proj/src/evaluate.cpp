#include "sentinel/evaluate.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

constexpr double kYearSeconds = 365.25 * 86400.0;

int require_column(const CsvTable& table, const std::string& name, const std::string& path) {
    int c = table.column(name);
    require_data(c >= 0, "file '" + path + "' has no '" + name + "' column");
    return c;
}

int parse_level(const std::string& text, const std::string& path) {
    try {
        int level = std::stoi(text);
        require_data(level >= 0 && level <= 3, "warning level out of range in '" + path + "'");
        return level;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw_data("malformed warning level '" + text + "' in '" + path + "'");
    }
}

} // namespace

std::vector<WarningRow> load_warning_log(const std::string& path) {
    CsvTable table = read_csv(path);
    const int c_ts = require_column(table, "timestamp", path);
    const int c_farm = require_column(table, "farm_id", path);
    const int c_turbine = require_column(table, "turbine_id", path);
    const int c_comp = require_column(table, "component", path);
    const int c_old = require_column(table, "old_level", path);
    const int c_new = require_column(table, "new_level", path);
    const int c_kpi = require_column(table, "kpi", path);

    std::vector<WarningRow> rows;
    for (const auto& r : table.rows) {
        WarningRow w;
        w.timestamp = parse_iso8601(r[static_cast<std::size_t>(c_ts)]);
        w.farm_id = r[static_cast<std::size_t>(c_farm)];
        w.turbine_id = r[static_cast<std::size_t>(c_turbine)];
        w.component = component_kind_from_name(r[static_cast<std::size_t>(c_comp)]);
        w.old_level = parse_level(r[static_cast<std::size_t>(c_old)], path);
        w.new_level = parse_level(r[static_cast<std::size_t>(c_new)], path);
        try {
            w.kpi = std::stod(r[static_cast<std::size_t>(c_kpi)]);
        } catch (const std::exception&) {
            throw_data("malformed kpi value in '" + path + "'");
        }
        rows.push_back(std::move(w));
    }
    return rows;
}

std::vector<GroundTruthLabel> load_labels(const std::string& path) {
    CsvTable table = read_csv(path);
    const int c_turbine = require_column(table, "turbine_id", path);
    const int c_comp = require_column(table, "component", path);
    const int c_label = require_column(table, "label", path);
    const int c_start = require_column(table, "start", path);
    const int c_end = require_column(table, "end", path);

    std::vector<GroundTruthLabel> labels;
    for (const auto& r : table.rows) {
        GroundTruthLabel l;
        l.turbine_id = r[static_cast<std::size_t>(c_turbine)];
        l.component = component_kind_from_name(r[static_cast<std::size_t>(c_comp)]);
        l.label = r[static_cast<std::size_t>(c_label)];
        require_data(l.label == "healthy" || l.label == "degrading" || l.label == "outage",
                     "unknown label '" + l.label + "' in '" + path + "'");
        l.interval.start = parse_iso8601(r[static_cast<std::size_t>(c_start)]);
        l.interval.end = parse_iso8601(r[static_cast<std::size_t>(c_end)]);
        require_data(l.interval.start < l.interval.end,
                     "label interval start must precede end in '" + path + "'");
        labels.push_back(std::move(l));
    }
    return labels;
}

EvaluationReport evaluate_warnings(const std::vector<WarningRow>& events,
                                   const std::vector<GroundTruthLabel>& labels) {
    EvaluationReport report;
    report.total_events = events.size();

    for (const auto& label : labels) {
        if (label.label == "healthy")
            report.healthy_component_years +=
                static_cast<double>(label.interval.end - label.interval.start) / kYearSeconds;
        if (label.label != "degrading") continue;
        FaultOutcome fault;
        fault.turbine_id = label.turbine_id;
        fault.component = label.component;
        fault.degrading = label.interval;
        for (const auto& e : events) {
            if (e.new_level < 1) continue;
            if (e.turbine_id != label.turbine_id || e.component != label.component) continue;
            if (!label.interval.contains(e.timestamp)) continue;
            if (!fault.detected || e.timestamp < fault.first_warning)
                fault.first_warning = e.timestamp;
            fault.detected = true;
            fault.max_level = std::max(fault.max_level, e.new_level);
        }
        if (fault.detected)
            fault.lead_days = static_cast<double>(label.interval.end - fault.first_warning) /
                              static_cast<double>(kSecondsPerDay);
        if (fault.detected) ++report.detected_count;
        report.faults.push_back(std::move(fault));
    }
    if (!report.faults.empty())
        report.detection_rate = static_cast<double>(report.detected_count) /
                                static_cast<double>(report.faults.size());

    for (const auto& e : events) {
        if (e.new_level < 1) continue;
        bool in_fault_span = false;
        bool in_healthy = false;
        bool matched = false;
        for (const auto& label : labels) {
            if (label.turbine_id != e.turbine_id || label.component != e.component) continue;
            if (!label.interval.contains(e.timestamp)) continue;
            matched = true;
            if (label.label == "healthy") in_healthy = true;
            else in_fault_span = true;
        }
        if (in_healthy && !in_fault_span) ++report.false_positive_events;
        if (!matched) ++report.false_positive_events;
    }
    if (report.healthy_component_years > 0.0)
        report.false_positives_per_component_year =
            static_cast<double>(report.false_positive_events) / report.healthy_component_years;
    return report;
}

std::string report_text(const EvaluationReport& report) {
    std::ostringstream out;
    out << "faults " << report.faults.size() << ", detected " << report.detected_count
        << ", detection_rate ";
    if (report.detection_rate)
        out << format_double(*report.detection_rate);
    else
        out << "n/a";
    out << "\n";
    for (const auto& f : report.faults) {
        out << "fault " << f.turbine_id << " " << component_kind_name(f.component) << " ["
            << format_iso8601(f.degrading.start) << ", " << format_iso8601(f.degrading.end)
            << "): ";
        if (f.detected)
            out << "detected, first_warning " << format_iso8601(f.first_warning)
                << ", lead_days " << format_double(f.lead_days) << ", max_level "
                << f.max_level;
        else
            out << "missed";
        out << "\n";
    }
    out << "false_positive_events " << report.false_positive_events << "\n";
    out << "healthy_component_years " << format_double(report.healthy_component_years) << "\n";
    out << "false_positives_per_component_year ";
    if (report.false_positives_per_component_year)
        out << format_double(*report.false_positives_per_component_year);
    else
        out << "n/a";
    out << "\n";
    return out.str();
}

nlohmann::json report_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["faults"] = nlohmann::json::array();
    for (const auto& f : report.faults) {
        nlohmann::json jf;
        jf["turbine_id"] = f.turbine_id;
        jf["component"] = component_kind_name(f.component);
        jf["onset"] = format_iso8601(f.degrading.start);
        jf["failure"] = format_iso8601(f.degrading.end);
        jf["detected"] = f.detected;
        if (f.detected) {
            jf["first_warning"] = format_iso8601(f.first_warning);
            jf["lead_days"] = f.lead_days;
        }
        jf["max_level"] = f.max_level;
        j["faults"].push_back(std::move(jf));
    }
    j["detected_count"] = report.detected_count;
    if (report.detection_rate)
        j["detection_rate"] = *report.detection_rate;
    else
        j["detection_rate"] = nullptr;
    j["false_positive_events"] = report.false_positive_events;
    j["healthy_component_years"] = report.healthy_component_years;
    if (report.false_positives_per_component_year)
        j["false_positives_per_component_year"] = *report.false_positives_per_component_year;
    else
        j["false_positives_per_component_year"] = nullptr;
    j["total_events"] = report.total_events;
    return j;
}

} // namespace sentinel
