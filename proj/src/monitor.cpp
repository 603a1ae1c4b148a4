#include "sentinel/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x, double log_gamma_a) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
}

// Lentz continued fraction for Q(a,x), valid for x >= a+1.
double gamma_q_fraction(double a, double x, double log_gamma_a) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma_a) * h;
}

} // namespace

double regularized_gamma_p(double a, double x) {
    require_data(a > 0.0, "incomplete gamma requires a > 0");
    require_data(x >= 0.0, "incomplete gamma requires x >= 0");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) return gamma_p_series(a, x, lg);
    return 1.0 - gamma_q_fraction(a, x, lg);
}

double chi_square_cdf(double x, int dof) {
    require_data(dof >= 1, "chi-square needs dof >= 1");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(int dof, double alpha) {
    require_data(dof >= 1, "chi-square needs dof >= 1");
    require_data(alpha > 0.0 && alpha < 1.0,
                 "chi-square quantile requires alpha strictly inside (0, 1)");

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi_square_cdf(hi, dof) < alpha) {
        lo = hi;
        hi *= 2.0;
        require_internal(hi < 1e12, "chi-square quantile bracket failed to close");
    }
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double cdf = chi_square_cdf(mid, dof);
        if (std::fabs(cdf - alpha) <= 1e-12 || (hi - lo) <= 1e-13 * std::max(1.0, mid)) return mid;
        if (cdf < alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ChartModel fit_residual_chart(const Eigen::MatrixXd& residuals,
                              const std::vector<std::string>& column_names, double ridge,
                              double alpha1, double alpha2) {
    const Eigen::Index n = residuals.rows();
    const Eigen::Index p = residuals.cols();
    require_data(p >= 1, "chart needs at least one residual column");
    require_data(n >= 10 * p, "chart fit needs at least 10 rows per dimension, got " +
                                  std::to_string(n));
    require_data(residuals.allFinite(), "residuals contain non-finite values");
    require_data(ridge >= 0.0, "ridge must be >= 0");
    require_data(0.0 < alpha1 && alpha1 < alpha2 && alpha2 < 1.0,
                 "region quantiles must satisfy 0 < alpha1 < alpha2 < 1");

    auto name_of = [&](Eigen::Index c) {
        if (static_cast<std::size_t>(c) < column_names.size()) return column_names[c];
        return "column " + std::to_string(c);
    };

    ChartModel chart;
    chart.ridge = ridge;
    chart.alpha1 = alpha1;
    chart.alpha2 = alpha2;
    chart.mean = residuals.colwise().mean();
    Eigen::MatrixXd centered = residuals.rowwise() - chart.mean.transpose();
    Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(n - 1);
    cov.diagonal() *= (1.0 + ridge);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    Eigen::VectorXd d = ldlt.vectorD();
    const double d_max = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0.0 ||
        d.minCoeff() < 1e-12 * std::max(d_max, 1e-300)) {
        // Name the most correlated column pair to point at the collinearity.
        Eigen::Index bad_a = 0, bad_b = p > 1 ? 1 : 0;
        double worst = -1.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = i + 1; j < p; ++j) {
                double denom = std::sqrt(cov(i, i) * cov(j, j));
                double corr = denom > 0.0 ? std::fabs(cov(i, j)) / denom : 1.0;
                if (corr > worst) {
                    worst = corr;
                    bad_a = i;
                    bad_b = j;
                }
            }
        }
        throw_data("residual covariance is numerically singular; columns '" + name_of(bad_a) +
                   "' and '" + name_of(bad_b) + "' are nearly collinear");
    }

    chart.inverse_covariance =
        ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    chart.inverse_covariance =
        0.5 * (chart.inverse_covariance + chart.inverse_covariance.transpose()).eval();
    chart.q1 = chi_square_quantile(static_cast<int>(p), alpha1);
    chart.q2 = chi_square_quantile(static_cast<int>(p), alpha2);
    chart.pi = {alpha1, alpha2 - alpha1, 1.0 - alpha2};
    return chart;
}

ChartModel fit_residual_chart(const SampleMatrix& residuals, double ridge, double alpha1,
                              double alpha2) {
    std::vector<std::string> names;
    names.reserve(residuals.cols());
    for (const auto& c : residuals.columns) names.push_back(c.name);
    return fit_residual_chart(valid_rows_matrix(residuals), names, ridge, alpha1, alpha2);
}

double t2_score(const ChartModel& chart, const Eigen::VectorXd& residual) {
    require_data(static_cast<std::size_t>(residual.size()) == chart.dims(),
                 "residual length does not match the chart dimensionality");
    Eigen::VectorXd d = residual - chart.mean;
    double t2 = d.dot(chart.inverse_covariance * d);
    return std::max(0.0, t2);
}

int classify_region(double t2, const ChartModel& chart) {
    if (t2 <= chart.q1) return 1;
    if (t2 <= chart.q2) return 2;
    return 3;
}

double kpi_value(const std::array<double, 3>& fractions, const std::array<double, 3>& pi) {
    double kpi = 0.0;
    for (std::size_t i = 0; i < 3; ++i) kpi += std::min(fractions[i], pi[i]);
    return kpi;
}

double KpiState::value() const {
    const double size = static_cast<double>(regions.size());
    std::array<double, 3> fractions{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i)
        fractions[i] = static_cast<double>(counts[i]) / size;
    return kpi_value(fractions, pi);
}

std::optional<double> kpi_update(KpiState& state, int region) {
    require_data(region >= 1 && region <= 3, "region index must be 1, 2 or 3");
    state.regions.push_back(region);
    ++state.counts[static_cast<std::size_t>(region - 1)];
    if (state.regions.size() > state.window) {
        int oldest = state.regions.front();
        state.regions.pop_front();
        --state.counts[static_cast<std::size_t>(oldest - 1)];
    }
    if (!state.ready()) return std::nullopt;
    return state.value();
}

std::optional<WarningEvent> update_warning_state(WarningState& state, std::optional<double> kpi,
                                                 Timestamp timestamp,
                                                 const std::string& turbine_id,
                                                 ComponentKind component) {
    if (!kpi.has_value()) return std::nullopt;
    const double value = *kpi;
    const double thresholds[3] = {state.t1, state.t2, state.t3};
    for (int i = 0; i < 3; ++i) {
        if (value < thresholds[i])
            ++state.below_streak[static_cast<std::size_t>(i)];
        else
            state.below_streak[static_cast<std::size_t>(i)] = 0;
    }
    if (value >= state.t1)
        ++state.recovery_streak;
    else
        state.recovery_streak = 0;

    for (int level = 3; level >= 1; --level) {
        if (level <= state.level) break;
        if (state.below_streak[static_cast<std::size_t>(level - 1)] < state.persistence) continue;
        WarningEvent event{timestamp, turbine_id, component, state.level, level, value};
        state.level = level;
        return event;
    }
    if (state.level > 0 && state.recovery_streak >= state.recovery) {
        WarningEvent event{timestamp, turbine_id, component, state.level, 0, value};
        state.level = 0;
        return event;
    }
    return std::nullopt;
}

MonitorOutput monitor_stream(const MonitorModels& models, const SampleMatrix& eval,
                             const MonitorSettings& settings) {
    const std::size_t p = models.tags.size();
    require_data(p >= 2, "monitoring needs at least two tags");
    require_data(models.aann.input_dim == p, "autoencoder width does not match the tag list");
    require_data(models.chart.dims() == p, "chart dimensionality does not match the tag list");
    require_data(models.standardizer.tags.size() == p,
                 "standardizer width does not match the tag list");
    for (std::size_t i = 0; i < p; ++i)
        require_data(models.standardizer.tags[i] == models.tags[i].name,
                     "standardizer column order does not match the tag list");
    require_data(models.nominal_power_kw > 0.0, "nominal power must be > 0");
    require_data(settings.window >= 1 && settings.min_window >= 1 &&
                     settings.min_window <= settings.window,
                 "KPI window settings invalid");

    std::vector<std::size_t> tag_cols;
    tag_cols.reserve(p);
    for (const auto& tag : models.tags) {
        auto idx = eval.column_index(tag.name);
        require_data(idx.has_value(), "evaluation stream is missing tag '" + tag.name + "'");
        tag_cols.push_back(*idx);
    }
    auto ambient_col = eval.column_index(models.seasonal.ambient_tag);
    require_data(ambient_col.has_value(), "evaluation stream is missing ambient tag '" +
                                              models.seasonal.ambient_tag + "'");
    auto power_col = eval.column_with_role(TagRole::ActivePower);
    auto wind_col = eval.column_with_role(TagRole::WindSpeed);
    require_data(power_col.has_value() && wind_col.has_value(),
                 "evaluation stream needs active_power and wind_speed columns");

    KpiState kpi_state;
    kpi_state.window = static_cast<std::size_t>(settings.window);
    kpi_state.min_window = static_cast<std::size_t>(settings.min_window);
    kpi_state.pi = models.chart.pi;

    WarningState warn;
    warn.t1 = settings.warn_t1;
    warn.t2 = settings.warn_t2;
    warn.t3 = settings.warn_t3;
    warn.persistence = settings.persistence;
    warn.recovery = settings.recovery;

    MonitorOutput out;
    Eigen::VectorXd x(static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < eval.rows(); ++r) {
        bool valid = cell_valid(eval.flag(r, *ambient_col)) &&
                     cell_valid(eval.flag(r, *power_col)) && cell_valid(eval.flag(r, *wind_col));
        for (std::size_t i = 0; valid && i < p; ++i)
            valid = cell_valid(eval.flag(r, tag_cols[i]));
        if (!valid) continue;

        // A stopped turbine in usable wind (curtailment or outage) carries no
        // thermal information; freeze the window rather than feed it.
        double power = eval.at(r, *power_col);
        double wind = eval.at(r, *wind_col);
        if (power < kCurtailmentPowerFraction * models.nominal_power_kw &&
            wind > kCurtailmentWind)
            continue;

        double ambient = eval.at(r, *ambient_col);
        for (std::size_t i = 0; i < p; ++i) {
            double v = eval.at(r, tag_cols[i]);
            if (const auto* fit = models.seasonal.fit_for(models.tags[i].name))
                v -= fit->slope * (ambient - models.seasonal.reference_ambient);
            x(static_cast<Eigen::Index>(i)) =
                (v - models.standardizer.mean[i]) / models.standardizer.stddev[i];
        }

        Eigen::VectorXd rec = reconstruct(models.aann, x);
        double t2 = t2_score(models.chart, x - rec);
        int region = classify_region(t2, models.chart);
        auto kpi = kpi_update(kpi_state, region);
        auto event = update_warning_state(warn, kpi, eval.timestamps[r], models.turbine_id,
                                          models.component);
        if (event) out.warnings.push_back(*event);
        out.series.push_back({eval.timestamps[r], t2, region, kpi, warn.level});
    }
    out.final_level = warn.level;
    return out;
}

} // namespace sentinel
