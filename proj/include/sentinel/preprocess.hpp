#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sentinel/domain.hpp"

namespace sentinel {

/// Binned power curve with robust per-bin statistics (median and scaled MAD),
/// fitted on healthy data and used for bivariate outlier removal.
struct PowerCurveModel {
    double bin_width = 0.5;   // m/s
    double cut_out = 25.0;    // m/s
    double nominal_power_kw = 0.0;
    int min_bin_samples = 10;
    std::vector<double> bin_median;  // kW, one per bin
    std::vector<double> bin_spread;  // kW, MAD * 1.4826
    std::vector<int> bin_count;

    std::size_t bin_count_total() const { return bin_median.size(); }
    bool bin_usable(std::size_t b) const {
        return b < bin_count.size() && bin_count[b] >= min_bin_samples;
    }
    /// Bin index for a wind speed, or -1 outside [0, cut_out).
    int bin_of(double wind) const;
};

/// Curtailment rule: effectively zero power despite wind above cut-in marks a
/// stopped or curtailed turbine.
constexpr double kCurtailmentWind = 4.0;          // m/s
constexpr double kCurtailmentPowerFraction = 0.01;

PowerCurveModel fit_power_curve(std::span<const double> wind, std::span<const double> power,
                                double nominal_power_kw, double bin_width = 0.5,
                                double cut_out = 25.0);

/// Inlier mask over matrix rows (true = keep). A row is an outlier when its
/// power deviates from the bin median by more than band * spread in a usable
/// bin, or when the curtailment rule fires. Rows with invalid wind/power
/// cells are kept (they are handled by validity filtering).
std::vector<bool> filter_power_curve_outliers(const SampleMatrix& matrix,
                                              const PowerCurveModel& curve, double band = 4.0);

/// k-means based multivariate outlier removal, fitted in standardized space.
struct MorModel {
    int k = 0;
    std::size_t dims = 0;
    std::vector<double> centroids;      // k x dims, row-major
    std::vector<int> member_count;
    std::vector<double> threshold;      // per cluster, mean + c * std of member distances
    double c = 3.0;
    double min_cluster_fraction = 0.02;
    std::size_t n_train = 0;
    std::vector<double> objective_history;  // total within-cluster squared distance per iteration

    double centroid_at(std::size_t cluster, std::size_t d) const {
        return centroids[cluster * dims + d];
    }
};

MorModel mor_fit(const SampleMatrix& standardized, int k, std::uint64_t seed, double c = 3.0,
                 double min_cluster_fraction = 0.02);

/// Inlier mask (true = keep). A row is an outlier when its nearest centroid
/// belongs to a cluster below min_cluster_fraction, or its distance exceeds
/// that cluster's threshold.
std::vector<bool> mor_filter(const SampleMatrix& standardized, const MorModel& model);

/// Per-temperature-tag linear dependence on ambient temperature, fitted in
/// the low load regime where self-heating is minimal.
struct SeasonalModel {
    std::string ambient_tag;
    struct TagFit {
        std::string tag;
        double intercept = 0.0;  // degC
        double slope = 0.0;
    };
    std::vector<TagFit> fits;
    double low_load_threshold = 0.2;
    double reference_ambient = 0.0;  // degC, mean ambient over training

    const TagFit* fit_for(const std::string& tag) const;
};

SeasonalModel fit_seasonal_model(const SampleMatrix& matrix, const ComponentSpec& spec,
                                 double nominal_power_kw, double low_load_threshold = 0.2,
                                 std::size_t min_low_load_rows = 50);

/// adjusted = temp - slope * (ambient - reference_ambient). Only modeled
/// temperature columns change.
SampleMatrix apply_seasonal_adjustment(const SampleMatrix& matrix, const SeasonalModel& model);

/// Per-column affine transform to zero mean, unit standard deviation
/// (unbiased estimator). Constant columns are rejected.
struct Standardizer {
    std::vector<std::string> tags;
    std::vector<double> mean;
    std::vector<double> stddev;
};

Standardizer fit_standardizer(const SampleMatrix& matrix);
SampleMatrix apply_standardizer(const SampleMatrix& matrix, const Standardizer& s);
SampleMatrix invert_standardizer(const SampleMatrix& matrix, const Standardizer& s);

/// Apply/invert for a single sample laid out in standardizer column order.
void standardize_sample(const Standardizer& s, std::span<double> sample);

} // namespace sentinel
