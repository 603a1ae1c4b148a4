#include "sentinel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "sentinel/errors.hpp"
#include "sentinel/rng.hpp"

namespace sentinel {

using json = nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCutInWind = 3.5;    // m/s
constexpr double kRatedWind = 12.0;   // m/s
constexpr double kPowerNoiseFraction = 0.004;
constexpr double kYearSeconds = 365.25 * 86400.0;

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double weibull_quantile(double u, double shape, double scale) {
    u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

double logistic_power_fraction(double wind) {
    // ~1% of rated at cut-in, ~99% at rated wind.
    const double midpoint = 0.5 * (kCutInWind + kRatedWind);
    const double k = std::log(99.0) / (0.5 * (kRatedWind - kCutInWind));
    return 1.0 / (1.0 + std::exp(-k * (wind - midpoint)));
}

/// Steady-state and load gains for a component temperature tag; idx is the
/// tag's position among the component's temperature tags.
struct ThermalParams {
    double base_c = 24.0;
    double load_gain_c = 22.0;
};

ThermalParams thermal_params(ComponentKind kind, std::size_t idx) {
    const double i = static_cast<double>(idx);
    switch (kind) {
        case ComponentKind::Gearbox: return {26.0 + 4.0 * i, 28.0 + 4.0 * i};
        case ComponentKind::GeneratorBearing: return {24.0 + 4.0 * i, 26.0 + 4.0 * i};
        case ComponentKind::MainBearing: return {20.0 + 4.0 * i, 18.0 + 4.0 * i};
    }
    return {};
}

void validate_settings(const SynthSettings& s) {
    require_data(s.duration_days >= 1, "scenario duration must be at least 1 day");
    require_data(s.missing_rate >= 0.0 && s.missing_rate < 0.5,
                 "missing_rate must lie in [0, 0.5)");
    require_data(s.wind.weibull_shape > 0.0 && s.wind.weibull_scale > 0.0,
                 "wind Weibull parameters must be > 0");
    require_data(s.wind.ar1 >= 0.0 && s.wind.ar1 < 1.0, "wind ar1 must lie in [0, 1)");
    require_data(s.wind.cut_out > 0.0, "wind cut_out must be > 0");
    require_data(s.ambient.noise_sigma_c >= 0.0 && s.thermal.noise_sigma_c >= 0.0,
                 "noise sigmas must be >= 0");
    require_data(s.thermal.time_constant_s > 0.0, "thermal time constant must be > 0");
}

} // namespace

RawRecordTable generate_healthy(const FarmConfig& config, const SynthSettings& settings) {
    validate_settings(settings);
    const std::int64_t step = config.sample_interval;
    const std::int64_t total = static_cast<std::int64_t>(settings.duration_days) * kSecondsPerDay;
    const std::size_t steps = static_cast<std::size_t>(total / step);
    require_data(steps >= 1, "scenario shorter than one sample interval");

    RawRecordTable table;
    std::map<std::string, std::size_t> column_of;
    for (const auto& turbine : config.turbines)
        for (const auto& tag : turbine.tags)
            if (column_of.emplace(tag.name, table.tag_names.size()).second)
                table.tag_names.push_back(tag.name);
    const std::size_t width = table.tag_names.size();
    table.rows.reserve(steps * config.turbines.size());

    for (const auto& turbine : config.turbines) {
        Rng rng(seed_mix(settings.seed, turbine.turbine_id));

        std::map<std::string, ThermalParams> params;
        for (const auto& comp : turbine.components) {
            std::size_t idx = 0;
            for (const auto& tag : comp.tag_list) {
                if (tag.role != TagRole::ComponentTemperature) continue;
                params.emplace(tag.name, thermal_params(comp.kind, idx));
                ++idx;
            }
        }

        std::map<std::string, double> thermal_state;
        double latent = rng.normal();
        const double ar1 = settings.wind.ar1;
        const double innovation = std::sqrt(1.0 - ar1 * ar1);
        const double lag_gain =
            static_cast<double>(step) / settings.thermal.time_constant_s;

        for (std::size_t i = 0; i < steps; ++i) {
            const Timestamp t = settings.start + static_cast<Timestamp>(i) * step;
            if (i > 0) latent = ar1 * latent + innovation * rng.normal();
            const double wind = weibull_quantile(standard_normal_cdf(latent),
                                                 settings.wind.weibull_shape,
                                                 settings.wind.weibull_scale);

            const double tt = static_cast<double>(t);
            const double ambient = settings.ambient.mean_c +
                                   settings.ambient.annual_amplitude_c *
                                       std::sin(2.0 * kPi * tt / kYearSeconds) +
                                   settings.ambient.daily_amplitude_c *
                                       std::sin(2.0 * kPi * tt / 86400.0) +
                                   settings.ambient.noise_sigma_c * rng.normal();

            const double fraction =
                wind >= settings.wind.cut_out ? 0.0 : logistic_power_fraction(wind);
            const double power = turbine.nominal_power_kw * fraction +
                                 kPowerNoiseFraction * turbine.nominal_power_kw * rng.normal();
            const double load = fraction;

            RawRecordTable::Row row;
            row.timestamp = t;
            row.turbine_id = turbine.turbine_id;
            row.values.assign(width, 0.0);
            row.present.assign(width, 0);

            for (const auto& tag : turbine.tags) {
                const std::size_t col = column_of.at(tag.name);
                double value = 0.0;
                switch (tag.role) {
                    case TagRole::WindSpeed: value = wind; break;
                    case TagRole::AmbientTemperature: value = ambient; break;
                    case TagRole::ActivePower: value = power; break;
                    case TagRole::ComponentTemperature: {
                        auto pit = params.find(tag.name);
                        ThermalParams tp =
                            pit != params.end() ? pit->second : ThermalParams{};
                        const double target = tp.base_c +
                                              settings.thermal.ambient_gain * ambient +
                                              tp.load_gain_c * load;
                        auto [sit, fresh] = thermal_state.emplace(tag.name, target);
                        if (!fresh) sit->second += lag_gain * (target - sit->second);
                        value = sit->second + settings.thermal.noise_sigma_c * rng.normal();
                        break;
                    }
                    case TagRole::RotorSpeed: {
                        const double base =
                            wind >= settings.wind.cut_out
                                ? 0.0
                                : 16.0 * std::clamp(wind / kRatedWind, 0.25, 1.0);
                        value = base + 0.1 * rng.normal();
                        break;
                    }
                    case TagRole::ShaftTorque: {
                        const double rpm =
                            wind >= settings.wind.cut_out
                                ? 0.0
                                : 16.0 * std::clamp(wind / kRatedWind, 0.25, 1.0);
                        const double omega = std::max(rpm * 2.0 * kPi / 60.0, 1e-3);
                        value = power / omega + 0.5 * rng.normal();
                        break;
                    }
                    default: value = rng.normal(); break;
                }
                row.values[col] = value;
                row.present[col] = 1;
            }

            if (rng.uniform() < settings.missing_rate) {
                std::fill(row.values.begin(), row.values.end(), 0.0);
                std::fill(row.present.begin(), row.present.end(), 0);
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

RawRecordTable inject_fault(const RawRecordTable& table, const FaultSpec& fault,
                            const FarmConfig& config) {
    require_data(fault.delta_t_c >= 0.0, "fault delta_t_c must be >= 0");
    require_data(fault.noise_inflation >= 1.0, "fault noise_inflation must be >= 1");
    require_data(fault.outage_days >= 0, "fault outage_days must be >= 0");
    if (fault.delta_t_c == 0.0) return table;
    require_data(fault.onset < fault.failure, "fault onset must precede failure");

    const TurbineConfig* turbine = config.find_turbine(fault.turbine_id);
    require_data(turbine != nullptr, "fault references unknown turbine '" + fault.turbine_id + "'");
    const ComponentSpec* comp = nullptr;
    for (const auto& c : turbine->components)
        if (c.kind == fault.component) comp = &c;
    require_data(comp != nullptr, "turbine '" + fault.turbine_id + "' has no " +
                                      component_kind_name(fault.component) + " component");

    require_data(!table.rows.empty(), "cannot inject fault into an empty table");
    Timestamp lo = table.rows.front().timestamp, hi = lo;
    for (const auto& row : table.rows) {
        lo = std::min(lo, row.timestamp);
        hi = std::max(hi, row.timestamp);
    }
    require_data(fault.onset >= lo && fault.failure <= hi,
                 "fault interval lies outside the generated span");

    std::vector<std::size_t> affected_cols;
    for (const auto& tag : comp->temperature_tags()) {
        auto it = std::find(table.tag_names.begin(), table.tag_names.end(), tag.name);
        require_data(it != table.tag_names.end(),
                     "fault tag '" + tag.name + "' missing from the table");
        affected_cols.push_back(static_cast<std::size_t>(it - table.tag_names.begin()));
    }
    require_data(!affected_cols.empty(), "faulted component has no temperature tags");

    const Timestamp outage_end =
        fault.failure + static_cast<Timestamp>(fault.outage_days) * kSecondsPerDay;
    const double ramp_span = static_cast<double>(fault.failure - fault.onset);
    Rng noise_rng(seed_mix(static_cast<std::uint64_t>(fault.onset),
                           fault.turbine_id + "/" + component_kind_name(fault.component)));

    RawRecordTable out = table;
    for (auto& row : out.rows) {
        if (row.turbine_id != fault.turbine_id) continue;
        if (row.timestamp >= fault.failure && row.timestamp < outage_end) {
            std::fill(row.values.begin(), row.values.end(), 0.0);
            std::fill(row.present.begin(), row.present.end(), 0);
            continue;
        }
        if (row.timestamp < fault.onset || row.timestamp >= fault.failure) continue;
        const double ramp =
            fault.delta_t_c * static_cast<double>(row.timestamp - fault.onset) / ramp_span;
        for (std::size_t col : affected_cols) {
            if (!row.present[col]) continue;
            row.values[col] += ramp;
            if (fault.noise_inflation > 1.0)
                row.values[col] += (fault.noise_inflation - 1.0) * noise_rng.normal();
        }
    }
    return out;
}

std::vector<GroundTruthLabel> label_ground_truth(const std::string& turbine_id,
                                                 ComponentKind component,
                                                 const std::vector<FaultSpec>& faults,
                                                 const TimeInterval& span) {
    require_data(span.start < span.end, "label span must be non-empty");
    std::vector<FaultSpec> mine;
    for (const auto& f : faults)
        if (f.turbine_id == turbine_id && f.component == component) mine.push_back(f);
    std::sort(mine.begin(), mine.end(),
              [](const FaultSpec& a, const FaultSpec& b) { return a.onset < b.onset; });

    std::vector<GroundTruthLabel> labels;
    auto emit = [&](const char* label, Timestamp start, Timestamp end) {
        start = std::max(start, span.start);
        end = std::min(end, span.end);
        if (start < end)
            labels.push_back({turbine_id, component, label, {start, end}});
    };

    Timestamp cursor = span.start;
    for (const auto& f : mine) {
        require_data(f.onset < f.failure, "fault onset must precede failure");
        const Timestamp onset = std::max(f.onset, cursor);
        const Timestamp outage_end =
            f.failure + static_cast<Timestamp>(f.outage_days) * kSecondsPerDay;
        if (onset >= span.end) break;
        emit("healthy", cursor, f.onset);
        emit("degrading", onset, f.failure);
        emit("outage", std::max(f.failure, cursor), outage_end);
        cursor = std::max(cursor, outage_end);
    }
    emit("healthy", cursor, span.end);
    return labels;
}

std::vector<GroundTruthLabel> label_farm(const FarmConfig& config,
                                         const std::vector<FaultSpec>& faults,
                                         const TimeInterval& span) {
    std::vector<GroundTruthLabel> labels;
    for (const auto& turbine : config.turbines)
        for (const auto& comp : turbine.components) {
            auto one = label_ground_truth(turbine.turbine_id, comp.kind, faults, span);
            labels.insert(labels.end(), one.begin(), one.end());
        }
    return labels;
}

namespace {

WindModel parse_wind(const json& j) {
    WindModel m;
    m.weibull_shape = j.value("weibull_shape", m.weibull_shape);
    m.weibull_scale = j.value("weibull_scale", m.weibull_scale);
    m.ar1 = j.value("ar1", m.ar1);
    m.cut_out = j.value("cut_out", m.cut_out);
    return m;
}

AmbientModel parse_ambient(const json& j) {
    AmbientModel m;
    m.mean_c = j.value("mean_c", m.mean_c);
    m.annual_amplitude_c = j.value("annual_amplitude_c", m.annual_amplitude_c);
    m.daily_amplitude_c = j.value("daily_amplitude_c", m.daily_amplitude_c);
    m.noise_sigma_c = j.value("noise_sigma_c", m.noise_sigma_c);
    return m;
}

ThermalModel parse_thermal(const json& j) {
    ThermalModel m;
    m.time_constant_s = j.value("time_constant_s", m.time_constant_s);
    m.ambient_gain = j.value("ambient_gain", m.ambient_gain);
    m.noise_sigma_c = j.value("noise_sigma_c", m.noise_sigma_c);
    return m;
}

} // namespace

Scenario parse_scenario(const json& raw) {
    require_data(raw.is_object(), "scenario root must be an object");
    Scenario sc;
    if (!raw.contains("start") || !raw.at("start").is_string())
        throw_data("scenario: missing or non-string field 'start'");
    sc.settings.start = parse_iso8601(raw.at("start").get<std::string>());
    if (!raw.contains("duration_days") || !raw.at("duration_days").is_number())
        throw_data("scenario: missing or non-numeric field 'duration_days'");
    sc.settings.duration_days = raw.at("duration_days").get<int>();
    sc.settings.seed = raw.value("seed", sc.settings.seed);
    sc.settings.missing_rate = raw.value("missing_rate", sc.settings.missing_rate);
    sc.settings.wind = parse_wind(raw.value("wind", json::object()));
    sc.settings.ambient = parse_ambient(raw.value("ambient", json::object()));
    sc.settings.thermal = parse_thermal(raw.value("thermal", json::object()));
    validate_settings(sc.settings);

    if (raw.contains("faults")) {
        require_data(raw.at("faults").is_array(), "scenario: 'faults' must be an array");
        for (const auto& jf : raw.at("faults")) {
            FaultSpec f;
            if (!jf.contains("turbine_id") || !jf.at("turbine_id").is_string())
                throw_data("fault: missing or non-string field 'turbine_id'");
            f.turbine_id = jf.at("turbine_id").get<std::string>();
            if (!jf.contains("component") || !jf.at("component").is_string())
                throw_data("fault: missing or non-string field 'component'");
            f.component = component_kind_from_name(jf.at("component").get<std::string>());
            if (!jf.contains("onset") || !jf.at("onset").is_string())
                throw_data("fault: missing or non-string field 'onset'");
            f.onset = parse_iso8601(jf.at("onset").get<std::string>());
            if (!jf.contains("failure") || !jf.at("failure").is_string())
                throw_data("fault: missing or non-string field 'failure'");
            f.failure = parse_iso8601(jf.at("failure").get<std::string>());
            f.delta_t_c = jf.value("delta_t_c", f.delta_t_c);
            f.noise_inflation = jf.value("noise_inflation", f.noise_inflation);
            f.outage_days = jf.value("outage_days", f.outage_days);
            require_data(f.onset < f.failure, "fault onset must precede failure");
            require_data(f.delta_t_c >= 0.0, "fault delta_t_c must be >= 0");
            require_data(f.noise_inflation >= 1.0, "fault noise_inflation must be >= 1");
            require_data(f.outage_days >= 0, "fault outage_days must be >= 0");
            sc.faults.push_back(f);
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open scenario file '" + path + "'");
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::parse_error& e) {
        throw_data("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(raw);
}

json scenario_to_json(const Scenario& sc) {
    json j;
    j["start"] = format_iso8601(sc.settings.start);
    j["duration_days"] = sc.settings.duration_days;
    j["seed"] = sc.settings.seed;
    j["missing_rate"] = sc.settings.missing_rate;
    j["wind"] = {{"weibull_shape", sc.settings.wind.weibull_shape},
                 {"weibull_scale", sc.settings.wind.weibull_scale},
                 {"ar1", sc.settings.wind.ar1},
                 {"cut_out", sc.settings.wind.cut_out}};
    j["ambient"] = {{"mean_c", sc.settings.ambient.mean_c},
                    {"annual_amplitude_c", sc.settings.ambient.annual_amplitude_c},
                    {"daily_amplitude_c", sc.settings.ambient.daily_amplitude_c},
                    {"noise_sigma_c", sc.settings.ambient.noise_sigma_c}};
    j["thermal"] = {{"time_constant_s", sc.settings.thermal.time_constant_s},
                    {"ambient_gain", sc.settings.thermal.ambient_gain},
                    {"noise_sigma_c", sc.settings.thermal.noise_sigma_c}};
    j["faults"] = json::array();
    for (const auto& f : sc.faults)
        j["faults"].push_back({{"turbine_id", f.turbine_id},
                               {"component", component_kind_name(f.component)},
                               {"onset", format_iso8601(f.onset)},
                               {"failure", format_iso8601(f.failure)},
                               {"delta_t_c", f.delta_t_c},
                               {"noise_inflation", f.noise_inflation},
                               {"outage_days", f.outage_days}});
    return j;
}

} // namespace sentinel
