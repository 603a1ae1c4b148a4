#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentinel/timeutil.hpp"

namespace sentinel {

enum class TagRole {
    ActivePower,
    WindSpeed,
    RotorSpeed,
    ShaftTorque,
    AmbientTemperature,
    ComponentTemperature,
    Other,
};

const char* tag_role_name(TagRole role);
TagRole tag_role_from_name(const std::string& name);

/// A single SCADA measurement channel: the name is the CSV column.
struct TagId {
    std::string name;
    TagRole role = TagRole::Other;

    bool operator==(const TagId&) const = default;
};

enum class ComponentKind { Gearbox, GeneratorBearing, MainBearing };

const char* component_kind_name(ComponentKind kind);
ComponentKind component_kind_from_name(const std::string& name);

/// The monitored multivariate vector for one component.
struct ComponentSpec {
    ComponentKind kind = ComponentKind::Gearbox;
    std::vector<TagId> tag_list;

    /// Subset of tag_list with role ComponentTemperature, in tag_list order.
    std::vector<TagId> temperature_tags() const;

    bool operator==(const ComponentSpec&) const = default;
};

/// Half-open UTC interval [start, end).
struct TimeInterval {
    Timestamp start = 0;
    Timestamp end = 0;

    bool contains(Timestamp t) const { return t >= start && t < end; }
    bool operator==(const TimeInterval&) const = default;
};

struct TurbineConfig {
    std::string turbine_id;
    double nominal_power_kw = 0.0;
    std::vector<TagId> tags;
    std::vector<ComponentSpec> components;

    const TagId* tag_with_role(TagRole role) const;
    bool operator==(const TurbineConfig&) const = default;
};

/// Preprocessing knobs, one block per farm (config "preprocess" section).
struct PreprocessSettings {
    double power_band = 4.0;
    int kmeans_k = 8;
    double mor_c = 3.0;
    double min_cluster_fraction = 0.02;
    double low_load_threshold = 0.2;
    int max_interpolation_gap = 3;

    bool operator==(const PreprocessSettings&) const = default;
};

/// AANN training knobs (config "train" section).
struct TrainSettings {
    int epochs = 200;
    int batch_size = 64;
    double learning_rate = 1e-3;
    int lr_halve_every = 80;
    int patience = 20;
    double validation_fraction = 0.15;
    double momentum = 0.9;
    std::uint64_t seed = 42;
    std::size_t min_training_rows = 1000;

    bool operator==(const TrainSettings&) const = default;
};

/// Control chart / KPI / warning knobs (config "monitor" section).
struct MonitorSettings {
    int window = 432;      // 3 days at 10-minute sampling
    int min_window = 216;  // KPI not ready below this fill
    double alpha1 = 0.95;
    double alpha2 = 0.99;
    double ridge = 1e-6;
    double warn_t1 = 0.92;
    double warn_t2 = 0.85;
    double warn_t3 = 0.75;
    int persistence = 3;
    int recovery = 144;  // 1 day of nominal KPI to return to level 0

    bool operator==(const MonitorSettings&) const = default;
};

struct FarmConfig {
    std::string farm_id;
    std::int64_t sample_interval = 600;  // seconds
    std::vector<TimeInterval> healthy_periods;
    std::vector<TurbineConfig> turbines;
    PreprocessSettings preprocess;
    TrainSettings train;
    MonitorSettings monitor;

    const TurbineConfig* find_turbine(const std::string& id) const;
    bool operator==(const FarmConfig&) const = default;
};

/// Per-cell validity. 0.0 is a legal measurement, so validity is an explicit
/// flag rather than a sentinel value.
enum class CellFlag : std::uint8_t { Missing = 0, Measured = 1, Interpolated = 2 };

inline bool cell_valid(CellFlag f) { return f != CellFlag::Missing; }

/// Time-indexed multivariate matrix of SCADA samples for one turbine.
/// Row-major storage; timestamps strictly increasing on the sampling grid.
struct SampleMatrix {
    std::vector<Timestamp> timestamps;
    std::vector<TagId> columns;
    std::vector<double> values;
    std::vector<CellFlag> flags;

    std::size_t rows() const { return timestamps.size(); }
    std::size_t cols() const { return columns.size(); }

    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    CellFlag flag(std::size_t r, std::size_t c) const { return flags[r * cols() + c]; }
    CellFlag& flag(std::size_t r, std::size_t c) { return flags[r * cols() + c]; }

    bool row_valid(std::size_t r) const;
    std::optional<std::size_t> column_index(const std::string& tag_name) const;
    std::optional<std::size_t> column_with_role(TagRole role) const;

    void resize(std::size_t n_rows, std::vector<TagId> cols);
};

/// Validate a parsed config document, fill defaults, and return the typed
/// config. Throws data errors describing the first violated invariant.
FarmConfig validate_farm_config(const nlohmann::json& raw);

/// Convenience: parse + validate a config file from disk.
FarmConfig load_farm_config(const std::string& path);

/// Serialize back to the config document format (round-trips through
/// validate_farm_config to an equal config).
nlohmann::json farm_config_to_json(const FarmConfig& config);

/// Project the matrix onto spec.tag_list (in that order), dropping rows with
/// any invalid cell among the selected columns. Timestamps of surviving rows
/// are preserved. Throws if a tag is absent.
SampleMatrix select_component_samples(const SampleMatrix& matrix, const ComponentSpec& spec);

/// Column projection used by select_component_samples; also drops rows with
/// invalid cells among the selected columns.
SampleMatrix select_columns(const SampleMatrix& matrix, const std::vector<TagId>& tags);

/// Keep only rows where mask[r] is true.
SampleMatrix filter_rows(const SampleMatrix& matrix, const std::vector<bool>& mask);

} // namespace sentinel
