#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/rng.hpp"

using namespace sentinel;

TEST_CASE("regularized incomplete gamma matches reference values") {
    CHECK(regularized_gamma_p(0.5, 0.1) == doctest::Approx(0.345279153981423).epsilon(1e-12));
    CHECK(regularized_gamma_p(1.0, 1.0) == doctest::Approx(0.632120558828558).epsilon(1e-12));
    CHECK(regularized_gamma_p(2.5, 2.0) == doctest::Approx(0.450584048647220).epsilon(1e-12));
    CHECK(regularized_gamma_p(5.0, 10.0) == doctest::Approx(0.970747311923039).epsilon(1e-12));
    CHECK(regularized_gamma_p(10.0, 3.0) == doctest::Approx(0.001102488130115).epsilon(1e-9));
}

TEST_CASE("chi-square cdf matches reference values") {
    CHECK(chi_square_cdf(3.841458820694124, 1) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(chi_square_cdf(5.0, 2) == doctest::Approx(0.917915001376101).epsilon(1e-12));
    CHECK(chi_square_cdf(0.0, 5) == 0.0);
    CHECK(chi_square_cdf(-3.0, 5) == 0.0);
}

TEST_CASE("chi-square quantiles match published tables") {
    struct Row {
        int dof;
        double alpha;
        double expected;
    };
    // Reference values computed independently to 12 digits.
    const Row rows[] = {
        {1, 0.5, 0.454936423120},   {1, 0.95, 3.841458820694},  {1, 0.99, 6.634896601021},
        {2, 0.5, 1.386294361120},   {2, 0.95, 5.991464547108},  {2, 0.99, 9.210340371976},
        {5, 0.5, 4.351460191096},   {5, 0.95, 11.070497693516}, {5, 0.99, 15.086272469389},
        {10, 0.5, 9.341817765592},  {10, 0.95, 18.307038053275}, {10, 0.99, 23.209251158954},
    };
    for (const auto& r : rows) {
        CAPTURE(r.dof);
        CAPTURE(r.alpha);
        CHECK(chi_square_quantile(r.dof, r.alpha) == doctest::Approx(r.expected).epsilon(1e-9));
    }
    // Round trip: the quantile inverts the cdf.
    for (int dof : {1, 3, 7, 20}) {
        for (double alpha : {0.01, 0.3, 0.6, 0.95, 0.999}) {
            CHECK(chi_square_cdf(chi_square_quantile(dof, alpha), dof) ==
                  doctest::Approx(alpha).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(chi_square_quantile(0, 0.5), Error);
    CHECK_THROWS_AS(chi_square_quantile(3, 0.0), Error);
    CHECK_THROWS_AS(chi_square_quantile(3, 1.0), Error);
}

namespace {

// 20 two-dimensional residuals with an independently computed chart oracle.
Eigen::MatrixXd oracle_residuals() {
    Eigen::MatrixXd r(20, 2);
    r << 0.1, -0.2, 0.3, 0.1, -0.4, 0.2, 0.0, -0.1, 0.2, 0.3, -0.1, -0.3, 0.5, 0.0, -0.3, 0.1,
        0.1, 0.2, -0.2, -0.4, 0.0, 0.3, 0.4, -0.1, -0.5, -0.2, 0.2, 0.0, -0.1, 0.4, 0.3, -0.3,
        -0.2, 0.2, 0.1, -0.4, 0.0, 0.1, -0.4, 0.3;
    return r;
}

} // namespace

TEST_CASE("chart fit matches the closed-form oracle") {
    ChartModel chart = fit_residual_chart(oracle_residuals(), {"a", "b"});
    REQUIRE(chart.dims() == 2);
    CHECK(chart.mean(0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(chart.mean(1) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(chart.inverse_covariance(0, 0) == doctest::Approx(13.263550832333168).epsilon(1e-9));
    CHECK(chart.inverse_covariance(0, 1) == doctest::Approx(2.026686555503572).epsilon(1e-9));
    CHECK(chart.inverse_covariance(1, 0) == doctest::Approx(2.026686555503572).epsilon(1e-9));
    CHECK(chart.inverse_covariance(1, 1) == doctest::Approx(16.438696277764372).epsilon(1e-9));
    CHECK(chart.q1 == doctest::Approx(5.991464547108).epsilon(1e-9));
    CHECK(chart.q2 == doctest::Approx(9.210340371976).epsilon(1e-9));

    Eigen::VectorXd probe(2);
    probe << 0.25, -0.15;
    CHECK(t2_score(chart, probe) == doctest::Approx(1.087667627291305).epsilon(1e-9));

    // The inverse covariance must be exactly symmetric as stored.
    CHECK(chart.inverse_covariance(0, 1) == chart.inverse_covariance(1, 0));
}

TEST_CASE("chart rejects insufficient or degenerate data") {
    Eigen::MatrixXd r = oracle_residuals();
    CHECK_THROWS_AS(fit_residual_chart(r.topRows(19), {"a", "b"}), Error);  // n < 10p

    Eigen::MatrixXd dup(30, 2);
    Rng rng(3);
    for (int i = 0; i < 30; ++i) {
        double v = rng.normal();
        dup(i, 0) = v;
        dup(i, 1) = v;  // perfectly collinear columns
    }
    try {
        fit_residual_chart(dup, {"left", "right"}, 0.0);
        FAIL_CHECK("expected singularity error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("left") != std::string::npos);
        CHECK(msg.find("right") != std::string::npos);
    }
    // The diagonal inflation makes the same data workable.
    ChartModel chart = fit_residual_chart(dup, {"left", "right"}, 1e-6);
    CHECK(std::isfinite(chart.inverse_covariance(0, 0)));
}

TEST_CASE("t2 is invariant under column rescaling") {
    Eigen::MatrixXd r(40, 3);
    Rng rng(17);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = rng.normal() + 0.3 * j;
    Eigen::MatrixXd scaled = r;
    scaled.col(1) *= 2.0;

    ChartModel a = fit_residual_chart(r, {"x", "y", "z"});
    ChartModel b = fit_residual_chart(scaled, {"x", "y", "z"});
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd pa = r.row(i).transpose();
        Eigen::VectorXd pb = scaled.row(i).transpose();
        CHECK(t2_score(a, pa) == doctest::Approx(t2_score(b, pb)).epsilon(1e-6));
    }
}

TEST_CASE("t2 with identity inverse covariance is the squared norm") {
    ChartModel chart;
    chart.mean = Eigen::VectorXd::Zero(3);
    chart.inverse_covariance = Eigen::MatrixXd::Identity(3, 3);
    chart.q1 = 7.814727903251;   // chi-square(3) at 0.95
    chart.q2 = 11.344866730144;  // chi-square(3) at 0.99
    Eigen::VectorXd d(3);
    d << 1.0, 2.0, -2.0;
    CHECK(t2_score(chart, d) == doctest::Approx(9.0).epsilon(1e-15));

    CHECK(classify_region(chart.q1, chart) == 1);           // boundary belongs below
    CHECK(classify_region(chart.q1 + 1e-9, chart) == 2);
    CHECK(classify_region(chart.q2, chart) == 2);
    CHECK(classify_region(chart.q2 + 1e-9, chart) == 3);
    CHECK(classify_region(0.0, chart) == 1);
}

TEST_CASE("kpi formula is exact on the defining cases") {
    const std::array<double, 3> pi{0.95, 0.04, 0.01};
    CHECK(kpi_value({0.95, 0.04, 0.01}, pi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kpi_value({0.0, 0.0, 1.0}, pi) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(kpi_value({0.85, 0.05, 0.10}, pi) == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(kpi_value({1.0, 0.0, 0.0}, pi) == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("kpi window warms up, slides, and matches a naive recount") {
    KpiState state;
    state.window = 432;
    state.min_window = 216;

    for (int i = 0; i < 215; ++i) CHECK_FALSE(kpi_update(state, 1).has_value());
    auto first = kpi_update(state, 1);
    REQUIRE(first.has_value());
    CHECK(*first == doctest::Approx(0.95).epsilon(1e-12));

    // Push a long random region stream and compare against a naive window.
    Rng rng(8);
    std::vector<int> window_copy(state.regions.begin(), state.regions.end());
    for (int i = 0; i < 1000; ++i) {
        int region = 1 + static_cast<int>(rng.index(3));
        window_copy.push_back(region);
        if (window_copy.size() > state.window)
            window_copy.erase(window_copy.begin());
        auto kpi = kpi_update(state, region);
        REQUIRE(kpi.has_value());
        std::array<double, 3> fr{0, 0, 0};
        for (int r : window_copy) fr[static_cast<std::size_t>(r - 1)] += 1.0;
        for (auto& f : fr) f /= static_cast<double>(window_copy.size());
        CHECK(*kpi == doctest::Approx(kpi_value(fr, state.pi)).epsilon(1e-12));
        CHECK(state.regions.size() <= state.window);
    }
}

TEST_CASE("warning machine follows persistence and recovery rules") {
    const Timestamp t0 = 1640995200;
    auto update = [&](WarningState& s, std::optional<double> kpi, int step) {
        return update_warning_state(s, kpi, t0 + step * 600, "wt01", ComponentKind::Gearbox);
    };

    SUBCASE("three mild violations escalate one level") {
        WarningState s;
        CHECK_FALSE(update(s, 0.90, 0).has_value());
        CHECK_FALSE(update(s, 0.90, 1).has_value());
        auto event = update(s, 0.90, 2);
        REQUIRE(event.has_value());
        CHECK(event->old_level == 0);
        CHECK(event->new_level == 1);
        CHECK(event->kpi == 0.90);
        CHECK(event->timestamp == t0 + 1200);
        CHECK(s.level == 1);
        // Staying at the same severity produces no further events.
        for (int i = 3; i < 40; ++i) CHECK_FALSE(update(s, 0.90, i).has_value());
    }

    SUBCASE("a single dip does not trigger") {
        WarningState s;
        CHECK_FALSE(update(s, 0.70, 0).has_value());
        for (int i = 1; i < 300; ++i) CHECK_FALSE(update(s, 0.95, i).has_value());
        CHECK(s.level == 0);
    }

    SUBCASE("persistent severe violations jump to the deepest level") {
        WarningState s;
        update(s, 0.70, 0);
        update(s, 0.70, 1);
        auto event = update(s, 0.70, 2);
        REQUIRE(event.has_value());
        CHECK(event->old_level == 0);
        CHECK(event->new_level == 3);
    }

    SUBCASE("recovery goes straight to level zero after a clean stretch") {
        WarningState s;
        update(s, 0.70, 0);
        update(s, 0.70, 1);
        update(s, 0.70, 2);
        REQUIRE(s.level == 3);
        int step = 3;
        for (int i = 0; i < s.recovery - 1; ++i)
            CHECK_FALSE(update(s, 0.95, step++).has_value());
        auto event = update(s, 0.95, step);
        REQUIRE(event.has_value());
        CHECK(event->old_level == 3);
        CHECK(event->new_level == 0);
        CHECK(s.level == 0);
    }

    SUBCASE("mid severities never de-escalate partially") {
        WarningState s;
        update(s, 0.70, 0);
        update(s, 0.70, 1);
        update(s, 0.70, 2);
        REQUIRE(s.level == 3);
        // KPI recovers only to the 0.88 band: below t1, above t2.
        for (int i = 3; i < 400; ++i) CHECK_FALSE(update(s, 0.88, i).has_value());
        CHECK(s.level == 3);
    }

    SUBCASE("warm-up samples freeze the machine") {
        WarningState s;
        update(s, 0.90, 0);
        update(s, 0.90, 1);
        CHECK_FALSE(update(s, std::nullopt, 2).has_value());
        auto event = update(s, 0.90, 3);  // streak resumes, not reset
        REQUIRE(event.has_value());
        CHECK(event->new_level == 1);
    }

    SUBCASE("interrupted streaks reset") {
        WarningState s;
        update(s, 0.90, 0);
        update(s, 0.90, 1);
        CHECK_FALSE(update(s, 0.93, 2).has_value());
        CHECK_FALSE(update(s, 0.90, 3).has_value());
        CHECK_FALSE(update(s, 0.90, 4).has_value());
        auto event = update(s, 0.90, 5);
        REQUIRE(event.has_value());
        CHECK(event->new_level == 1);
    }
}

namespace {

// A fully handcrafted monitoring setup: zeroed reconstruction network (the
// residual equals the standardized input), identity chart, no seasonal fits.
// Every score is analytic.
MonitorModels analytic_models() {
    MonitorModels m;
    m.turbine_id = "wt01";
    m.component = ComponentKind::Gearbox;
    m.tags = {testutil::tag("tempA", TagRole::ComponentTemperature),
              testutil::tag("tempB", TagRole::ComponentTemperature)};
    m.nominal_power_kw = 2000.0;
    m.standardizer.tags = {"tempA", "tempB"};
    m.standardizer.mean = {0.0, 0.0};
    m.standardizer.stddev = {1.0, 1.0};
    m.seasonal.ambient_tag = "ambient_temp";
    m.aann = init_aann(2, 1);
    for (auto& w : m.aann.weights) w.setZero();
    for (auto& b : m.aann.biases) b.setZero();
    m.chart.mean = Eigen::VectorXd::Zero(2);
    m.chart.inverse_covariance = Eigen::MatrixXd::Identity(2, 2);
    m.chart.q1 = 5.991464547108;  // chi-square(2) quantiles
    m.chart.q2 = 9.210340371976;
    return m;
}

MonitorSettings analytic_settings() {
    MonitorSettings s;
    s.window = 6;
    s.min_window = 3;
    s.persistence = 2;
    s.recovery = 4;
    return s;
}

} // namespace

TEST_CASE("stream scoring skips bad rows and walks the warning ladder") {
    MonitorModels models = analytic_models();
    MonitorSettings settings = analytic_settings();

    std::vector<TagId> columns = {
        testutil::tag("wind_speed", TagRole::WindSpeed),
        testutil::tag("ambient_temp", TagRole::AmbientTemperature),
        testutil::tag("active_power", TagRole::ActivePower),
        testutil::tag("tempA", TagRole::ComponentTemperature),
        testutil::tag("tempB", TagRole::ComponentTemperature),
    };
    std::vector<std::vector<double>> rows;
    auto normal = [&] { rows.push_back({8.0, 10.0, 900.0, 0.1, 0.1}); };
    auto excursion = [&] { rows.push_back({8.0, 10.0, 900.0, 5.0, 5.0}); };
    for (int i = 0; i < 3; ++i) normal();
    rows.push_back({8.0, 10.0, 900.0, 0.1, 0.1});  // row 3: tempA will be masked
    rows.push_back({10.0, 10.0, 5.0, 0.1, 0.1});   // row 4: curtailment (wind, no power)
    for (int i = 0; i < 3; ++i) excursion();       // rows 5-7
    for (int i = 0; i < 12; ++i) normal();         // rows 8-19

    const Timestamp t0 = 1640995200;
    SampleMatrix matrix = testutil::make_matrix(rows, columns, t0);
    matrix.flag(3, 3) = CellFlag::Missing;

    MonitorOutput out = monitor_stream(models, matrix, settings);

    CHECK(out.series.size() == 18);  // 20 rows, 2 skipped
    CHECK(out.series[0].region == 1);
    CHECK(out.series[0].t2 == doctest::Approx(0.02).epsilon(1e-12));
    CHECK_FALSE(out.series[0].kpi.has_value());
    REQUIRE(out.series[2].kpi.has_value());
    CHECK(*out.series[2].kpi == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(out.series[3].region == 3);
    CHECK(out.series[3].t2 == doctest::Approx(50.0).epsilon(1e-12));

    REQUIRE(out.warnings.size() == 3);
    CHECK(out.warnings[0].old_level == 0);
    CHECK(out.warnings[0].new_level == 2);
    CHECK(out.warnings[0].timestamp == t0 + 6 * 600);
    CHECK(out.warnings[0].kpi == doctest::Approx(0.61).epsilon(1e-12));
    CHECK(out.warnings[1].old_level == 2);
    CHECK(out.warnings[1].new_level == 3);
    CHECK(out.warnings[1].timestamp == t0 + 7 * 600);
    CHECK(out.warnings[2].old_level == 3);
    CHECK(out.warnings[2].new_level == 0);
    CHECK(out.warnings[2].timestamp == t0 + 16 * 600);
    CHECK(out.final_level == 0);
}

TEST_CASE("stream scoring validates the schema") {
    MonitorModels models = analytic_models();
    MonitorSettings settings = analytic_settings();

    SUBCASE("missing component column") {
        std::vector<TagId> columns = {
            testutil::tag("wind_speed", TagRole::WindSpeed),
            testutil::tag("ambient_temp", TagRole::AmbientTemperature),
            testutil::tag("active_power", TagRole::ActivePower),
            testutil::tag("tempA", TagRole::ComponentTemperature),
        };
        SampleMatrix m = testutil::make_matrix({{8.0, 10.0, 900.0, 0.1}}, columns);
        CHECK_THROWS_AS(monitor_stream(models, m, settings), Error);
    }
    SUBCASE("missing wind column") {
        std::vector<TagId> columns = {
            testutil::tag("ambient_temp", TagRole::AmbientTemperature),
            testutil::tag("active_power", TagRole::ActivePower),
            testutil::tag("tempA", TagRole::ComponentTemperature),
            testutil::tag("tempB", TagRole::ComponentTemperature),
        };
        SampleMatrix m = testutil::make_matrix({{10.0, 900.0, 0.1, 0.1}}, columns);
        CHECK_THROWS_AS(monitor_stream(models, m, settings), Error);
    }
}
