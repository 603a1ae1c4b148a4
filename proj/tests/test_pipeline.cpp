#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "sentinel/artifact.hpp"
#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/timeutil.hpp"

using namespace sentinel;

namespace {

FarmConfig fast_farm(int turbines = 2) {
    FarmConfig cfg = testutil::small_farm(turbines);
    cfg.train.epochs = 15;
    return cfg;
}

/// One month of healthy data for the two-turbine farm, generated once.
const RawRecordTable& month_table() {
    static const RawRecordTable table = [] {
        SynthSettings s;
        s.start = parse_iso8601("2022-01-01T00:00:00Z");
        s.duration_days = 30;
        s.seed = 11;
        s.missing_rate = 0.01;
        return generate_healthy(fast_farm(), s);
    }();
    return table;
}

std::string masked_dump(const ModelArtifact& artifact) {
    nlohmann::json j = artifact_to_json(artifact);
    j["created_utc"] = "";
    return j.dump();
}

} // namespace

TEST_CASE("training fits one artifact per turbine-component and filters modestly") {
    FarmConfig cfg = fast_farm();
    std::vector<ComponentTrainStats> stats;
    std::vector<ModelArtifact> artifacts = train_models(cfg, month_table(), std::nullopt, &stats);

    REQUIRE(artifacts.size() == 2);
    REQUIRE(stats.size() == 2);
    CHECK(artifacts[0].turbine_id == "wt01");
    CHECK(artifacts[1].turbine_id == "wt02");

    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const ModelArtifact& a = artifacts[i];
        const ComponentTrainStats& st = stats[i];
        CHECK(a.farm_id == "testfarm");
        CHECK(a.component == ComponentKind::Gearbox);
        CHECK(a.tags.size() == 4);
        CHECK(a.aux_tags.size() == 3);  // wind, ambient, power support columns
        CHECK(a.nominal_power_kw == 2000.0);
        CHECK(a.chart.q2 > a.chart.q1);
        CHECK(a.chart.q1 > 0.0);
        CHECK(a.aann.epochs_run > 0);
        CHECK(!a.fingerprint.hash.empty());

        CHECK(st.turbine_id == a.turbine_id);
        CHECK(st.rows_loaded >= st.rows_after_power);
        CHECK(st.rows_after_power >= st.rows_after_mor);
        CHECK(st.rows_after_mor > 0);
        // Healthy data: the cleaning stages must leave at least 97% of rows.
        CHECK(static_cast<double>(st.rows_after_mor) >=
              0.97 * static_cast<double>(st.rows_loaded));
        CHECK(st.epochs_run == a.aann.epochs_run);
        CHECK(st.validation_loss > 0.0);
    }
}

TEST_CASE("training is deterministic and honors the seed override") {
    FarmConfig cfg = fast_farm(1);
    auto a = train_models(cfg, month_table());
    auto b = train_models(cfg, month_table());
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(masked_dump(a[0]) == masked_dump(b[0]));

    auto c = train_models(cfg, month_table(), 4242);
    REQUIRE(c.size() == 1);
    CHECK(c[0].aann.seed != a[0].aann.seed);
    CHECK(masked_dump(c[0]) != masked_dump(a[0]));
}

TEST_CASE("monitoring the training period stays at level 0 or 1") {
    FarmConfig cfg = fast_farm();
    std::vector<ModelArtifact> artifacts = train_models(cfg, month_table());
    auto matrices = regularize(month_table(), cfg, GapPolicy{});

    for (const ModelArtifact& artifact : artifacts) {
        MonitorOutput out =
            monitor_stream(monitor_models(artifact), matrices.at(artifact.turbine_id),
                           artifact.monitor);
        CHECK(out.series.size() > 4000);
        for (const auto& e : out.warnings) CHECK(e.new_level <= 1);
        CHECK(out.final_level <= 1);

        // Worst KPI over the month stays near its healthy ceiling.
        double min_kpi = 1.0;
        std::size_t ready = 0;
        for (const auto& pt : out.series)
            if (pt.kpi) {
                min_kpi = std::min(min_kpi, *pt.kpi);
                ++ready;
            }
        CHECK(ready > 3000);
        CHECK(min_kpi > 0.85);
    }
}

TEST_CASE("the train command writes loadable artifacts and a summary") {
    testutil::TempDir dir;
    const std::string csv = dir.file("scada.csv");
    std::ofstream(csv) << scada_csv_text(month_table());

    FarmConfig cfg = fast_farm();
    TrainResult result = run_train(cfg, {csv}, dir.path() + "/models");
    REQUIRE(result.components.size() == 2);
    CHECK(result.summary.find("wt01 gearbox") != std::string::npos);
    CHECK(result.summary.find("wt02 gearbox") != std::string::npos);

    for (const auto& st : result.components) {
        REQUIRE(!st.artifact_path.empty());
        CHECK(std::filesystem::exists(st.artifact_path));
        ModelArtifact loaded = load_model(st.artifact_path);
        CHECK(loaded.turbine_id == st.turbine_id);
    }
}

TEST_CASE("commands reject missing or empty inputs before doing any work") {
    testutil::TempDir dir;
    FarmConfig cfg = fast_farm();

    auto expect_usage = [](auto&& fn) {
        try {
            fn();
            FAIL_CHECK("expected a usage error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Usage);
        }
    };
    expect_usage([&] { run_train(cfg, {}, dir.path() + "/m"); });
    expect_usage([&] { run_monitor({}, {dir.file("x.csv")}, dir.path() + "/o"); });
    expect_usage([&] { run_monitor({dir.file("m.json")}, {}, dir.path() + "/o"); });

    try {
        run_train(cfg, {dir.file("absent.csv")}, dir.path() + "/m2");
        FAIL_CHECK("expected a data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("the monitor command scores streams against stored models") {
    testutil::TempDir dir;
    const std::string csv = dir.file("scada.csv");
    std::ofstream(csv) << scada_csv_text(month_table());

    FarmConfig cfg = fast_farm();
    TrainResult trained = run_train(cfg, {csv}, dir.path() + "/models");
    std::vector<std::string> model_paths;
    for (const auto& st : trained.components) model_paths.push_back(st.artifact_path);

    MonitorResult result = run_monitor(model_paths, {csv}, dir.path() + "/out");
    REQUIRE(result.series_paths.size() == 2);
    REQUIRE(result.warning_paths.size() == 2);
    CHECK(result.max_level <= 1);  // scoring the training month itself

    // The per-stream series files parse and carry the full column set.
    CsvTable series = read_csv(result.series_paths[0]);
    CHECK(series.column("timestamp") >= 0);
    CHECK(series.column("t2") >= 0);
    CHECK(series.column("region") >= 0);
    CHECK(series.column("kpi") >= 0);
    CHECK(series.column("level") >= 0);
    CHECK(series.rows.size() > 4000);

    // The combined warning log is sorted and consistent with the counters.
    REQUIRE(std::filesystem::exists(result.combined_warnings_path));
    std::vector<WarningRow> combined = load_warning_log(result.combined_warnings_path);
    std::size_t escalations = 0;
    for (std::size_t i = 0; i < combined.size(); ++i) {
        if (i > 0) CHECK(combined[i].timestamp >= combined[i - 1].timestamp);
        if (combined[i].new_level > combined[i].old_level) ++escalations;
    }
    CHECK(escalations == result.escalation_events);
}

TEST_CASE("the simulate command writes data and labels that agree") {
    testutil::TempDir dir;
    FarmConfig cfg = fast_farm();
    Scenario scenario = load_scenario(testutil::data_file("scenario_fault.json"));

    SimulateResult result = run_simulate(cfg, scenario, dir.path());
    CHECK(result.rows == 2u * 40u * 144u);
    REQUIRE(std::filesystem::exists(result.scada_path));
    REQUIRE(std::filesystem::exists(result.labels_path));

    RawRecordTable table = load_scada_csvs({result.scada_path}, cfg);
    CHECK(table.rows.size() == result.rows);

    std::vector<GroundTruthLabel> labels = load_labels(result.labels_path);
    bool degrading_found = false;
    for (const auto& l : labels) {
        if (l.turbine_id != "wt01" || l.label != "degrading") continue;
        degrading_found = true;
        CHECK(l.interval.start == scenario.faults[0].onset);
        CHECK(l.interval.end == scenario.faults[0].failure);
    }
    CHECK(degrading_found);

    // The labeled degradation is visible in the data itself: the faulted
    // component runs hotter in the ramp's second half than in January.
    std::size_t bearing = 0, n_tags = table.tag_names.size();
    for (std::size_t i = 0; i < n_tags; ++i)
        if (table.tag_names[i] == "gearbox_bearing_temp") bearing = i;
    double early = 0.0, late = 0.0;
    std::size_t early_n = 0, late_n = 0;
    const Timestamp mid = scenario.faults[0].onset +
                          (scenario.faults[0].failure - scenario.faults[0].onset) / 2;
    for (const auto& r : table.rows) {
        if (r.turbine_id != "wt01" || !r.present[bearing]) continue;
        if (r.timestamp < scenario.faults[0].onset) {
            early += r.values[bearing];
            ++early_n;
        } else if (r.timestamp >= mid && r.timestamp < scenario.faults[0].failure) {
            late += r.values[bearing];
            ++late_n;
        }
    }
    REQUIRE(early_n > 100);
    REQUIRE(late_n > 100);
    CHECK(late / static_cast<double>(late_n) >
          early / static_cast<double>(early_n) + 5.0);
}
