#include "sentinel/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel {

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

constexpr double kMadToSigma = 1.4826;

} // namespace

int PowerCurveModel::bin_of(double wind) const {
    if (!(wind >= 0.0) || wind >= cut_out) return -1;
    std::size_t b = static_cast<std::size_t>(wind / bin_width);
    if (b >= bin_median.size()) return -1;
    return static_cast<int>(b);
}

PowerCurveModel fit_power_curve(std::span<const double> wind, std::span<const double> power,
                                double nominal_power_kw, double bin_width, double cut_out) {
    require_data(wind.size() == power.size(), "wind and power series must have equal length");
    require_data(nominal_power_kw > 0.0, "nominal power must be > 0");

    PowerCurveModel curve;
    curve.bin_width = bin_width;
    curve.cut_out = cut_out;
    curve.nominal_power_kw = nominal_power_kw;
    const std::size_t n_bins = static_cast<std::size_t>(std::ceil(cut_out / bin_width));
    std::vector<std::vector<double>> members(n_bins);

    std::size_t valid = 0;
    for (std::size_t i = 0; i < wind.size(); ++i) {
        if (!std::isfinite(wind[i]) || !std::isfinite(power[i])) continue;
        ++valid;
        if (wind[i] < 0.0 || wind[i] >= cut_out) continue;
        std::size_t b = static_cast<std::size_t>(wind[i] / bin_width);
        if (b < n_bins) members[b].push_back(power[i]);
    }
    if (valid < 500)
        throw_data("power curve fit needs at least 500 valid (wind, power) pairs, got " +
                   std::to_string(valid));

    curve.bin_median.assign(n_bins, 0.0);
    curve.bin_spread.assign(n_bins, 0.0);
    curve.bin_count.assign(n_bins, 0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        curve.bin_count[b] = static_cast<int>(members[b].size());
        if (members[b].empty()) continue;
        double med = median_inplace(members[b]);
        curve.bin_median[b] = med;
        std::vector<double> dev(members[b].size());
        for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::fabs(members[b][i] - med);
        curve.bin_spread[b] = kMadToSigma * median_inplace(dev);
    }
    return curve;
}

std::vector<bool> filter_power_curve_outliers(const SampleMatrix& matrix,
                                              const PowerCurveModel& curve, double band) {
    auto wind_col = matrix.column_with_role(TagRole::WindSpeed);
    auto power_col = matrix.column_with_role(TagRole::ActivePower);
    require_data(wind_col.has_value() && power_col.has_value(),
                 "power curve filter requires wind_speed and active_power columns");

    std::vector<bool> inlier(matrix.rows(), true);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (!cell_valid(matrix.flag(r, *wind_col)) || !cell_valid(matrix.flag(r, *power_col)))
            continue;
        double wind = matrix.at(r, *wind_col);
        double power = matrix.at(r, *power_col);
        if (wind > kCurtailmentWind &&
            power < kCurtailmentPowerFraction * curve.nominal_power_kw) {
            inlier[r] = false;
            continue;
        }
        int b = curve.bin_of(wind);
        if (b < 0 || !curve.bin_usable(static_cast<std::size_t>(b))) continue;
        if (std::fabs(power - curve.bin_median[b]) > band * curve.bin_spread[b])
            inlier[r] = false;
    }
    return inlier;
}

namespace {

double sq_distance(const SampleMatrix& m, std::size_t row, const std::vector<double>& centroids,
                   std::size_t cluster, std::size_t dims) {
    double d2 = 0.0;
    const double* row_ptr = m.values.data() + row * dims;
    const double* c_ptr = centroids.data() + cluster * dims;
    for (std::size_t j = 0; j < dims; ++j) {
        double d = row_ptr[j] - c_ptr[j];
        d2 += d * d;
    }
    return d2;
}

std::size_t nearest_cluster(const SampleMatrix& m, std::size_t row,
                            const std::vector<double>& centroids, int k, std::size_t dims,
                            double* best_d2_out = nullptr) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        double d2 = sq_distance(m, row, centroids, static_cast<std::size_t>(c), dims);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<std::size_t>(c);
        }
    }
    if (best_d2_out) *best_d2_out = best_d2;
    return best;
}

} // namespace

MorModel mor_fit(const SampleMatrix& standardized, int k, std::uint64_t seed, double c,
                 double min_cluster_fraction) {
    require_data(k >= 1, "mor_fit requires k >= 1");
    const std::size_t dims = standardized.cols();
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < standardized.rows(); ++r)
        if (standardized.row_valid(r)) rows.push_back(r);
    const std::size_t n = rows.size();
    require_data(n >= static_cast<std::size_t>(10 * k),
                 "mor_fit requires at least 10*k rows, got " + std::to_string(n));

    MorModel model;
    model.k = k;
    model.dims = dims;
    model.c = c;
    model.min_cluster_fraction = min_cluster_fraction;
    model.n_train = n;
    model.centroids.assign(static_cast<std::size_t>(k) * dims, 0.0);

    Rng rng(seed);
    constexpr int kMaxIterations = 300;
    constexpr int kMaxReseeds = 5;

    // Farthest-point seeding: a random first centroid, then repeatedly the
    // point furthest from its nearest chosen centroid.
    auto seed_centroids = [&]() {
        std::size_t first = rows[rng.index(n)];
        for (std::size_t j = 0; j < dims; ++j) model.centroids[j] = standardized.at(first, j);
        std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
        for (int chosen = 1; chosen < k; ++chosen) {
            std::size_t far_i = 0;
            double far_d2 = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d2 = sq_distance(standardized, rows[i], model.centroids,
                                        static_cast<std::size_t>(chosen - 1), dims);
                if (d2 < min_d2[i]) min_d2[i] = d2;
                if (min_d2[i] > far_d2) {
                    far_d2 = min_d2[i];
                    far_i = i;
                }
            }
            for (std::size_t j = 0; j < dims; ++j)
                model.centroids[chosen * dims + j] = standardized.at(rows[far_i], j);
        }
    };
    seed_centroids();

    std::vector<std::size_t> assignment(n, 0);
    std::vector<double> sums(static_cast<std::size_t>(k) * dims);
    std::vector<int> counts(k);

    int reseeds = 0;
    while (true) {
        bool assignments_stable = false;
        for (int iter = 0; iter < kMaxIterations; ++iter) {
            bool changed = false;
            double objective = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d2;
                std::size_t best = nearest_cluster(standardized, rows[i], model.centroids, k,
                                                   dims, &d2);
                objective += d2;
                if (best != assignment[i]) {
                    assignment[i] = best;
                    changed = true;
                }
            }
            model.objective_history.push_back(objective);
            std::fill(sums.begin(), sums.end(), 0.0);
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++counts[assignment[i]];
                const double* row_ptr = standardized.values.data() + rows[i] * dims;
                double* sum_ptr = sums.data() + assignment[i] * dims;
                for (std::size_t j = 0; j < dims; ++j) sum_ptr[j] += row_ptr[j];
            }
            for (int cl = 0; cl < k; ++cl) {
                if (counts[cl] == 0) continue;
                for (std::size_t j = 0; j < dims; ++j)
                    model.centroids[cl * dims + j] = sums[cl * dims + j] / counts[cl];
            }
            if (!changed) {
                assignments_stable = true;
                break;
            }
        }

        int empty_cluster = -1;
        for (int cl = 0; cl < k; ++cl)
            if (counts[cl] == 0) empty_cluster = cl;
        if (empty_cluster < 0 && assignments_stable) break;
        if (empty_cluster < 0) break;  // hit the iteration cap with all clusters populated

        if (++reseeds > kMaxReseeds)
            throw_data("mor_fit: cluster remained empty after " + std::to_string(kMaxReseeds) +
                       " re-seeding attempts (k too large for the data?)");
        // Re-seed the empty centroid at the point farthest from its assigned centroid.
        std::size_t far_i = 0;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = sq_distance(standardized, rows[i], model.centroids, assignment[i], dims);
            if (d2 > far_d2) {
                far_d2 = d2;
                far_i = i;
            }
        }
        for (std::size_t j = 0; j < dims; ++j)
            model.centroids[empty_cluster * dims + j] = standardized.at(rows[far_i], j);
    }

    model.member_count.assign(k, 0);
    std::vector<double> dist_sum(k, 0.0), dist_sq_sum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double d2;
        std::size_t cl = nearest_cluster(standardized, rows[i], model.centroids, k, dims, &d2);
        double d = std::sqrt(d2);
        ++model.member_count[cl];
        dist_sum[cl] += d;
        dist_sq_sum[cl] += d * d;
    }
    model.threshold.assign(k, 0.0);
    for (int cl = 0; cl < k; ++cl) {
        if (model.member_count[cl] == 0) continue;
        double m = dist_sum[cl] / model.member_count[cl];
        double var = dist_sq_sum[cl] / model.member_count[cl] - m * m;
        double sd = std::sqrt(std::max(0.0, var));
        model.threshold[cl] = std::max(m + c * sd, 1e-12);
    }
    return model;
}

std::vector<bool> mor_filter(const SampleMatrix& standardized, const MorModel& model) {
    require_data(standardized.cols() == model.dims,
                 "mor_filter: matrix dimensionality does not match the model");
    std::vector<bool> inlier(standardized.rows(), true);
    for (std::size_t r = 0; r < standardized.rows(); ++r) {
        if (!standardized.row_valid(r)) continue;
        double d2;
        std::size_t cl = nearest_cluster(standardized, r, model.centroids, model.k, model.dims,
                                         &d2);
        double fraction = model.n_train > 0
                              ? static_cast<double>(model.member_count[cl]) / model.n_train
                              : 0.0;
        if (fraction < model.min_cluster_fraction || std::sqrt(d2) > model.threshold[cl])
            inlier[r] = false;
    }
    return inlier;
}

const SeasonalModel::TagFit* SeasonalModel::fit_for(const std::string& tag) const {
    for (const auto& f : fits)
        if (f.tag == tag) return &f;
    return nullptr;
}

SeasonalModel fit_seasonal_model(const SampleMatrix& matrix, const ComponentSpec& spec,
                                 double nominal_power_kw, double low_load_threshold,
                                 std::size_t min_low_load_rows) {
    auto ambient_col = matrix.column_with_role(TagRole::AmbientTemperature);
    auto power_col = matrix.column_with_role(TagRole::ActivePower);
    require_data(ambient_col.has_value(), "seasonal fit requires an ambient_temperature column");
    require_data(power_col.has_value(), "seasonal fit requires an active_power column");
    require_data(nominal_power_kw > 0.0, "nominal power must be > 0");

    SeasonalModel model;
    model.ambient_tag = matrix.columns[*ambient_col].name;
    model.low_load_threshold = low_load_threshold;

    std::vector<std::size_t> low_load;
    double ambient_sum = 0.0;
    std::size_t ambient_n = 0;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (!cell_valid(matrix.flag(r, *ambient_col))) continue;
        ambient_sum += matrix.at(r, *ambient_col);
        ++ambient_n;
        if (!cell_valid(matrix.flag(r, *power_col))) continue;
        if (matrix.at(r, *power_col) < low_load_threshold * nominal_power_kw)
            low_load.push_back(r);
    }
    require_data(ambient_n > 0, "no valid ambient temperature samples");
    model.reference_ambient = ambient_sum / static_cast<double>(ambient_n);

    if (low_load.size() < min_low_load_rows)
        throw_data("seasonal fit needs at least " + std::to_string(min_low_load_rows) +
                   " low-load rows, got " + std::to_string(low_load.size()));

    for (const auto& tag : spec.temperature_tags()) {
        auto temp_col = matrix.column_index(tag.name);
        require_data(temp_col.has_value(), "temperature tag '" + tag.name + "' not in matrix");
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t n = 0;
        for (std::size_t r : low_load) {
            if (!cell_valid(matrix.flag(r, *temp_col))) continue;
            double x = matrix.at(r, *ambient_col);
            double y = matrix.at(r, *temp_col);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        require_data(n >= min_low_load_rows,
                     "too few valid low-load samples for tag '" + tag.name + "'");
        double denom = n * sxx - sx * sx;
        if (std::fabs(denom) < 1e-12 * n * std::max(1.0, sxx))
            throw_data("ambient temperature has zero variance in the low-load regime; "
                       "seasonal slope undefined");
        SeasonalModel::TagFit fit;
        fit.tag = tag.name;
        fit.slope = (n * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / n;
        require_data(std::isfinite(fit.slope) && std::isfinite(fit.intercept),
                     "seasonal fit produced non-finite coefficients");
        model.fits.push_back(fit);
    }
    return model;
}

SampleMatrix apply_seasonal_adjustment(const SampleMatrix& matrix, const SeasonalModel& model) {
    auto ambient_col = matrix.column_index(model.ambient_tag);
    require_data(ambient_col.has_value(),
                 "seasonal adjustment requires ambient tag '" + model.ambient_tag + "'");
    SampleMatrix out = matrix;
    for (const auto& fit : model.fits) {
        auto col = matrix.column_index(fit.tag);
        require_data(col.has_value(),
                     "seasonal adjustment: tag '" + fit.tag + "' not in matrix");
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!cell_valid(out.flag(r, *col)) || !cell_valid(out.flag(r, *ambient_col)))
                continue;
            double ambient = out.at(r, *ambient_col);
            out.at(r, *col) -= fit.slope * (ambient - model.reference_ambient);
        }
    }
    return out;
}

Standardizer fit_standardizer(const SampleMatrix& matrix) {
    require_data(matrix.rows() >= 2, "standardizer needs at least 2 rows");
    Standardizer s;
    const std::size_t p = matrix.cols();
    for (std::size_t c = 0; c < p; ++c) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            if (!cell_valid(matrix.flag(r, c))) continue;
            sum += matrix.at(r, c);
            ++n;
        }
        require_data(n >= 2, "column '" + matrix.columns[c].name + "' has fewer than 2 valid cells");
        double mean = sum / n;
        double ss = 0.0;
        for (std::size_t r = 0; r < matrix.rows(); ++r) {
            if (!cell_valid(matrix.flag(r, c))) continue;
            double d = matrix.at(r, c) - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0))
            throw_data("column '" + matrix.columns[c].name +
                       "' is constant; cannot standardize");
        s.tags.push_back(matrix.columns[c].name);
        s.mean.push_back(mean);
        s.stddev.push_back(sd);
    }
    return s;
}

SampleMatrix apply_standardizer(const SampleMatrix& matrix, const Standardizer& s) {
    require_data(matrix.cols() == s.tags.size(), "standardizer column count mismatch");
    SampleMatrix out = matrix;
    for (std::size_t c = 0; c < out.cols(); ++c) {
        require_data(out.columns[c].name == s.tags[c],
                     "standardizer column order mismatch at '" + out.columns[c].name + "'");
        for (std::size_t r = 0; r < out.rows(); ++r)
            if (cell_valid(out.flag(r, c)))
                out.at(r, c) = (out.at(r, c) - s.mean[c]) / s.stddev[c];
    }
    return out;
}

SampleMatrix invert_standardizer(const SampleMatrix& matrix, const Standardizer& s) {
    require_data(matrix.cols() == s.tags.size(), "standardizer column count mismatch");
    SampleMatrix out = matrix;
    for (std::size_t c = 0; c < out.cols(); ++c)
        for (std::size_t r = 0; r < out.rows(); ++r)
            if (cell_valid(out.flag(r, c)))
                out.at(r, c) = out.at(r, c) * s.stddev[c] + s.mean[c];
    return out;
}

void standardize_sample(const Standardizer& s, std::span<double> sample) {
    require_data(sample.size() == s.tags.size(), "standardizer sample length mismatch");
    for (std::size_t c = 0; c < sample.size(); ++c)
        sample[c] = (sample[c] - s.mean[c]) / s.stddev[c];
}

} // namespace sentinel
