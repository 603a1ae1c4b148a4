#pragma once

#include <array>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sentinel/aann.hpp"
#include "sentinel/domain.hpp"
#include "sentinel/preprocess.hpp"

namespace sentinel {

/// Regularized lower incomplete gamma P(a, x) and the chi-square CDF/quantile
/// built on it.
double regularized_gamma_p(double a, double x);
double chi_square_cdf(double x, int dof);
double chi_square_quantile(int dof, double alpha);

/// Hotelling T^2 chart over reconstruction residuals.
struct ChartModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd inverse_covariance;
    double q1 = 0.0;
    double q2 = 0.0;
    double alpha1 = 0.95;
    double alpha2 = 0.99;
    double ridge = 1e-6;
    std::array<double, 3> pi{0.95, 0.04, 0.01};

    std::size_t dims() const { return static_cast<std::size_t>(mean.size()); }
};

ChartModel fit_residual_chart(const Eigen::MatrixXd& residuals,
                              const std::vector<std::string>& column_names, double ridge = 1e-6,
                              double alpha1 = 0.95, double alpha2 = 0.99);
ChartModel fit_residual_chart(const SampleMatrix& residuals, double ridge = 1e-6,
                              double alpha1 = 0.95, double alpha2 = 0.99);

double t2_score(const ChartModel& chart, const Eigen::VectorXd& residual);

/// 1 if t2 <= q1, 2 if q1 < t2 <= q2, 3 otherwise.
int classify_region(double t2, const ChartModel& chart);

/// KPI = sum_i min(f_i, pi_i): the overlap between observed and expected
/// region occupancy, i.e. 1 minus their total-variation distance.
double kpi_value(const std::array<double, 3>& fractions, const std::array<double, 3>& pi);

/// Sliding-window region histogram feeding kpi_value.
struct KpiState {
    std::size_t window = 432;
    std::size_t min_window = 216;
    std::array<double, 3> pi{0.95, 0.04, 0.01};
    std::deque<int> regions;
    std::array<std::size_t, 3> counts{0, 0, 0};

    bool ready() const { return regions.size() >= min_window; }
    double value() const;
};

/// Advances the window with one region observation; returns the KPI, or
/// nullopt while the window is below min_window.
std::optional<double> kpi_update(KpiState& state, int region);

struct WarningEvent {
    Timestamp timestamp = 0;
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    int old_level = 0;
    int new_level = 0;
    double kpi = 0.0;
};

/// Three-level warning machine. Escalates to the deepest level whose KPI
/// threshold has been violated for `persistence` consecutive ready
/// evaluations; recovers only to level 0 after `recovery` consecutive
/// evaluations at or above t1.
struct WarningState {
    int level = 0;
    double t1 = 0.92;
    double t2 = 0.85;
    double t3 = 0.75;
    int persistence = 3;
    int recovery = 144;
    std::array<int, 3> below_streak{0, 0, 0};
    int recovery_streak = 0;
};

std::optional<WarningEvent> update_warning_state(WarningState& state,
                                                 std::optional<double> kpi, Timestamp timestamp,
                                                 const std::string& turbine_id,
                                                 ComponentKind component);

/// Everything needed to score one turbine-component stream.
struct MonitorModels {
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    std::vector<TagId> tags;
    double nominal_power_kw = 0.0;
    Standardizer standardizer;
    SeasonalModel seasonal;
    AannModel aann;
    ChartModel chart;
};

struct SeriesPoint {
    Timestamp timestamp = 0;
    double t2 = 0.0;
    int region = 0;
    std::optional<double> kpi;
    int level = 0;
};

struct MonitorOutput {
    std::vector<SeriesPoint> series;
    std::vector<WarningEvent> warnings;
    int final_level = 0;
};

/// Scores an evaluation stream: per valid operating row, seasonal-adjust ->
/// standardize -> residual -> T^2 -> region -> KPI -> warning machine.
/// Rows with missing cells, and rows where the turbine is stopped despite
/// wind (curtailment/outage), freeze the KPI window.
MonitorOutput monitor_stream(const MonitorModels& models, const SampleMatrix& eval,
                             const MonitorSettings& settings);

} // namespace sentinel
