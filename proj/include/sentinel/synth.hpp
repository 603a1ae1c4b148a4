#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentinel/domain.hpp"
#include "sentinel/ingestion.hpp"

namespace sentinel {

/// Autocorrelated Weibull-like wind: a latent AR(1) Gaussian process mapped
/// through its own CDF onto the Weibull quantile function.
struct WindModel {
    double weibull_shape = 2.0;
    double weibull_scale = 8.0;  // m/s
    double ar1 = 0.97;           // at one grid step
    double cut_out = 25.0;       // m/s

    bool operator==(const WindModel&) const = default;
};

struct AmbientModel {
    double mean_c = 12.0;
    double annual_amplitude_c = 10.0;
    double daily_amplitude_c = 4.0;
    double noise_sigma_c = 1.0;

    bool operator==(const AmbientModel&) const = default;
};

/// First-order thermal response: each component temperature relaxes toward
/// a + ambient_gain*ambient + c*load with the given time constant.
struct ThermalModel {
    double time_constant_s = 3600.0;
    double ambient_gain = 0.85;
    double noise_sigma_c = 0.8;

    bool operator==(const ThermalModel&) const = default;
};

struct SynthSettings {
    Timestamp start = 0;
    int duration_days = 1;
    std::uint64_t seed = 1;
    double missing_rate = 0.01;
    WindModel wind;
    AmbientModel ambient;
    ThermalModel thermal;

    bool operator==(const SynthSettings&) const = default;
};

/// A linear temperature drift on one component, ramping from 0 at onset to
/// delta_t_c at failure, followed by a full outage of the turbine.
struct FaultSpec {
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    Timestamp onset = 0;
    Timestamp failure = 0;
    double delta_t_c = 15.0;
    double noise_inflation = 1.0;
    int outage_days = 30;

    bool operator==(const FaultSpec&) const = default;
};

/// One row per turbine per grid step; a missing_rate share of rows carry no
/// values (exercising the gap policy downstream). Deterministic given seed.
RawRecordTable generate_healthy(const FarmConfig& config, const SynthSettings& settings);

/// Adds the fault ramp to the component's temperature tags and blanks the
/// turbine's rows for outage_days after the failure timestamp. Cells outside
/// the declared tags and interval are bit-identical to the input.
RawRecordTable inject_fault(const RawRecordTable& table, const FaultSpec& fault,
                            const FarmConfig& config);

struct GroundTruthLabel {
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    std::string label;  // healthy | degrading | outage
    TimeInterval interval;

    bool operator==(const GroundTruthLabel&) const = default;
};

/// Chronological, non-overlapping healthy/degrading/outage intervals covering
/// the span for one turbine-component stream.
std::vector<GroundTruthLabel> label_ground_truth(const std::string& turbine_id,
                                                 ComponentKind component,
                                                 const std::vector<FaultSpec>& faults,
                                                 const TimeInterval& span);

/// Labels for every turbine-component in the farm.
std::vector<GroundTruthLabel> label_farm(const FarmConfig& config,
                                         const std::vector<FaultSpec>& faults,
                                         const TimeInterval& span);

struct Scenario {
    SynthSettings settings;
    std::vector<FaultSpec> faults;

    bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(const nlohmann::json& raw);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& scenario);

} // namespace sentinel
