#include "doctest.h"

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/timeutil.hpp"

using namespace sentinel;

namespace {

constexpr Timestamp kDay = kSecondsPerDay;

WarningRow event(const std::string& turbine, Timestamp t, int old_level, int new_level,
                 double kpi = 0.5) {
    WarningRow w;
    w.timestamp = t;
    w.farm_id = "testfarm";
    w.turbine_id = turbine;
    w.component = ComponentKind::Gearbox;
    w.old_level = old_level;
    w.new_level = new_level;
    w.kpi = kpi;
    return w;
}

GroundTruthLabel label(const std::string& turbine, const std::string& kind, Timestamp start,
                       Timestamp end) {
    GroundTruthLabel l;
    l.turbine_id = turbine;
    l.component = ComponentKind::Gearbox;
    l.label = kind;
    l.interval = {start, end};
    return l;
}

/// Two turbines with labels, one fault detected with a 62-day lead, one
/// missed fault, three false positives, one recovery, one outage event.
struct Fixture {
    std::vector<GroundTruthLabel> labels{
        label("wt01", "healthy", 0, 100 * kDay),
        label("wt01", "degrading", 100 * kDay, 162 * kDay),
        label("wt01", "outage", 162 * kDay, 164 * kDay),
        label("wt01", "healthy", 164 * kDay, 200 * kDay),
        label("wt02", "healthy", 0, 200 * kDay),
        label("wt03", "degrading", 10 * kDay, 20 * kDay),
    };
    std::vector<WarningRow> events{
        event("wt01", 10 * kDay, 0, 2),    // false positive in a healthy span
        event("wt02", 50 * kDay, 0, 1),    // false positive in a healthy span
        event("wt09", 60 * kDay, 0, 1),    // false positive: no labels at all
        event("wt01", 100 * kDay, 0, 1),   // first true detection
        event("wt01", 120 * kDay, 1, 3),   // escalation within the same fault
        event("wt01", 163 * kDay, 0, 1),   // during the outage: not a false positive
        event("wt01", 170 * kDay, 3, 0),   // recovery: never counted anywhere
    };
};

} // namespace

TEST_CASE("evaluation separates detections, misses, and false positives") {
    Fixture fx;
    EvaluationReport r = evaluate_warnings(fx.events, fx.labels);

    CHECK(r.total_events == 7);
    REQUIRE(r.faults.size() == 2);
    CHECK(r.detected_count == 1);
    REQUIRE(r.detection_rate.has_value());
    CHECK(*r.detection_rate == 0.5);

    const FaultOutcome& hit = r.faults[0];
    CHECK(hit.turbine_id == "wt01");
    CHECK(hit.detected);
    CHECK(hit.first_warning == 100 * kDay);
    CHECK(hit.lead_days == 62.0);
    CHECK(hit.max_level == 3);

    const FaultOutcome& miss = r.faults[1];
    CHECK(miss.turbine_id == "wt03");
    CHECK_FALSE(miss.detected);
    CHECK(miss.max_level == 0);

    CHECK(r.false_positive_events == 3);
    const double healthy_years = (100.0 + 36.0 + 200.0) / 365.25;
    CHECK(r.healthy_component_years == doctest::Approx(healthy_years).epsilon(1e-12));
    REQUIRE(r.false_positives_per_component_year.has_value());
    CHECK(*r.false_positives_per_component_year ==
          doctest::Approx(3.0 / healthy_years).epsilon(1e-12));
}

TEST_CASE("rates are omitted when their denominators are empty") {
    SUBCASE("no faults labeled") {
        std::vector<GroundTruthLabel> labels{label("wt01", "healthy", 0, 10 * kDay)};
        EvaluationReport r = evaluate_warnings({event("wt01", kDay, 0, 1)}, labels);
        CHECK(r.faults.empty());
        CHECK_FALSE(r.detection_rate.has_value());
        CHECK(r.false_positive_events == 1);
        CHECK(report_text(r).find("detection_rate n/a") != std::string::npos);
        CHECK(report_json(r)["detection_rate"].is_null());
    }
    SUBCASE("no healthy time labeled") {
        std::vector<GroundTruthLabel> labels{label("wt01", "degrading", 0, 10 * kDay)};
        EvaluationReport r = evaluate_warnings({}, labels);
        CHECK(r.healthy_component_years == 0.0);
        CHECK_FALSE(r.false_positives_per_component_year.has_value());
        CHECK(report_json(r)["false_positives_per_component_year"].is_null());
    }
}

TEST_CASE("reports carry the per-fault story in both formats") {
    Fixture fx;
    EvaluationReport r = evaluate_warnings(fx.events, fx.labels);

    std::string text = report_text(r);
    CHECK(text.find("faults 2, detected 1, detection_rate 0.5") != std::string::npos);
    CHECK(text.find("lead_days 62") != std::string::npos);
    CHECK(text.find("missed") != std::string::npos);
    CHECK(text.find("false_positive_events 3") != std::string::npos);

    nlohmann::json j = report_json(r);
    REQUIRE(j["faults"].size() == 2);
    CHECK(j["faults"][0]["detected"].get<bool>());
    CHECK(j["faults"][0]["lead_days"].get<double>() == 62.0);
    CHECK(j["faults"][0]["max_level"].get<int>() == 3);
    CHECK_FALSE(j["faults"][1]["detected"].get<bool>());
    CHECK_FALSE(j["faults"][1].contains("first_warning"));
    CHECK(j["detection_rate"].get<double>() == 0.5);
    CHECK(j["total_events"].get<std::size_t>() == 7);
}

TEST_CASE("warning logs and labels round trip through their CSV forms") {
    testutil::TempDir dir;

    std::vector<WarningEvent> events;
    WarningEvent e;
    e.timestamp = parse_iso8601("2022-06-01T12:10:00Z");
    e.turbine_id = "wt01";
    e.component = ComponentKind::Gearbox;
    e.old_level = 0;
    e.new_level = 2;
    e.kpi = 0.8437500000000001;  // exercises shortest round-trip formatting
    events.push_back(e);
    e.timestamp = parse_iso8601("2022-06-02T00:00:00Z");
    e.old_level = 2;
    e.new_level = 3;
    e.kpi = 0.25;
    events.push_back(e);

    const std::string wpath = dir.file("warnings.csv");
    std::ofstream(wpath) << warning_log_csv("testfarm", events);
    std::vector<WarningRow> rows = load_warning_log(wpath);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].farm_id == "testfarm");
    CHECK(rows[0].turbine_id == "wt01");
    CHECK(rows[0].component == ComponentKind::Gearbox);
    CHECK(rows[0].timestamp == events[0].timestamp);
    CHECK(rows[0].old_level == 0);
    CHECK(rows[0].new_level == 2);
    CHECK(rows[0].kpi == 0.8437500000000001);
    CHECK(rows[1].kpi == 0.25);

    std::vector<GroundTruthLabel> labels{
        label("wt01", "healthy", 0, 100 * kDay),
        label("wt01", "degrading", 100 * kDay, 162 * kDay),
    };
    const std::string lpath = dir.file("labels.csv");
    std::ofstream(lpath) << labels_csv(labels);
    CHECK(load_labels(lpath) == labels);
}

TEST_CASE("malformed evaluation inputs are named precisely") {
    testutil::TempDir dir;
    auto write = [&](const std::string& name, const std::string& text) {
        std::string path = dir.file(name);
        std::ofstream(path) << text;
        return path;
    };

    const std::string header =
        "timestamp,farm_id,turbine_id,component,old_level,new_level,kpi\n";

    SUBCASE("missing column") {
        std::string path =
            write("w.csv", "timestamp,farm_id,turbine_id,component,old_level,new_level\n");
        testutil::check_error_contains([&] { load_warning_log(path); }, "no 'kpi' column");
    }
    SUBCASE("warning level out of range") {
        std::string path = write(
            "w.csv", header + "2022-01-01T00:00:00Z,f,wt01,gearbox,0,7,0.5\n");
        testutil::check_error_contains([&] { load_warning_log(path); }, "out of range");
    }
    SUBCASE("warning level not a number") {
        std::string path = write(
            "w.csv", header + "2022-01-01T00:00:00Z,f,wt01,gearbox,0,high,0.5\n");
        testutil::check_error_contains([&] { load_warning_log(path); },
                                       "malformed warning level");
    }
    SUBCASE("malformed kpi") {
        std::string path = write(
            "w.csv", header + "2022-01-01T00:00:00Z,f,wt01,gearbox,0,1,sideways\n");
        testutil::check_error_contains([&] { load_warning_log(path); }, "malformed kpi");
    }
    SUBCASE("unknown component") {
        std::string path = write(
            "w.csv", header + "2022-01-01T00:00:00Z,f,wt01,flux_capacitor,0,1,0.5\n");
        testutil::check_error_contains([&] { load_warning_log(path); },
                                       "unknown component kind");
    }
    SUBCASE("unknown label") {
        std::string path = write("l.csv",
                                 "turbine_id,component,label,start,end\n"
                                 "wt01,gearbox,broken,2022-01-01T00:00:00Z,2022-02-01T00:00:00Z\n");
        testutil::check_error_contains([&] { load_labels(path); }, "unknown label 'broken'");
    }
    SUBCASE("empty label interval") {
        std::string path = write("l.csv",
                                 "turbine_id,component,label,start,end\n"
                                 "wt01,gearbox,healthy,2022-01-01T00:00:00Z,2022-01-01T00:00:00Z\n");
        testutil::check_error_contains([&] { load_labels(path); }, "must precede end");
    }
}
