#include "sentinel/domain.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "sentinel/errors.hpp"

namespace sentinel {

using nlohmann::json;

const char* tag_role_name(TagRole role) {
    switch (role) {
        case TagRole::ActivePower: return "active_power";
        case TagRole::WindSpeed: return "wind_speed";
        case TagRole::RotorSpeed: return "rotor_speed";
        case TagRole::ShaftTorque: return "shaft_torque";
        case TagRole::AmbientTemperature: return "ambient_temperature";
        case TagRole::ComponentTemperature: return "component_temperature";
        case TagRole::Other: return "other";
    }
    return "other";
}

TagRole tag_role_from_name(const std::string& name) {
    static const std::map<std::string, TagRole> table = {
        {"active_power", TagRole::ActivePower},
        {"wind_speed", TagRole::WindSpeed},
        {"rotor_speed", TagRole::RotorSpeed},
        {"shaft_torque", TagRole::ShaftTorque},
        {"ambient_temperature", TagRole::AmbientTemperature},
        {"component_temperature", TagRole::ComponentTemperature},
        {"other", TagRole::Other},
    };
    auto it = table.find(name);
    if (it == table.end()) throw_data("unknown tag role '" + name + "'");
    return it->second;
}

const char* component_kind_name(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::Gearbox: return "gearbox";
        case ComponentKind::GeneratorBearing: return "generator_bearing";
        case ComponentKind::MainBearing: return "main_bearing";
    }
    return "gearbox";
}

ComponentKind component_kind_from_name(const std::string& name) {
    if (name == "gearbox") return ComponentKind::Gearbox;
    if (name == "generator_bearing") return ComponentKind::GeneratorBearing;
    if (name == "main_bearing") return ComponentKind::MainBearing;
    throw_data("unknown component kind '" + name +
               "' (expected gearbox, generator_bearing or main_bearing)");
}

std::vector<TagId> ComponentSpec::temperature_tags() const {
    std::vector<TagId> out;
    for (const auto& t : tag_list)
        if (t.role == TagRole::ComponentTemperature) out.push_back(t);
    return out;
}

const TagId* TurbineConfig::tag_with_role(TagRole role) const {
    for (const auto& t : tags)
        if (t.role == role) return &t;
    return nullptr;
}

const TurbineConfig* FarmConfig::find_turbine(const std::string& id) const {
    for (const auto& t : turbines)
        if (t.turbine_id == id) return &t;
    return nullptr;
}

bool SampleMatrix::row_valid(std::size_t r) const {
    for (std::size_t c = 0; c < cols(); ++c)
        if (!cell_valid(flag(r, c))) return false;
    return true;
}

std::optional<std::size_t> SampleMatrix::column_index(const std::string& tag_name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c].name == tag_name) return c;
    return std::nullopt;
}

std::optional<std::size_t> SampleMatrix::column_with_role(TagRole role) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c].role == role) return c;
    return std::nullopt;
}

void SampleMatrix::resize(std::size_t n_rows, std::vector<TagId> cols) {
    columns = std::move(cols);
    timestamps.assign(n_rows, 0);
    values.assign(n_rows * columns.size(), 0.0);
    flags.assign(n_rows * columns.size(), CellFlag::Missing);
}

namespace {

double require_number(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key) || !obj.at(key).is_number())
        throw_data(ctx + ": missing or non-numeric field '" + key + "'");
    return obj.at(key).get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key) || !obj.at(key).is_string())
        throw_data(ctx + ": missing or non-string field '" + key + "'");
    return obj.at(key).get<std::string>();
}

PreprocessSettings parse_preprocess(const json& j) {
    PreprocessSettings s;
    s.power_band = j.value("power_band", s.power_band);
    s.kmeans_k = j.value("kmeans_k", s.kmeans_k);
    s.mor_c = j.value("mor_c", s.mor_c);
    s.min_cluster_fraction = j.value("min_cluster_fraction", s.min_cluster_fraction);
    s.low_load_threshold = j.value("low_load_threshold", s.low_load_threshold);
    s.max_interpolation_gap = j.value("max_interpolation_gap", s.max_interpolation_gap);
    require_data(s.power_band > 0.0, "preprocess.power_band must be > 0");
    require_data(s.kmeans_k >= 1, "preprocess.kmeans_k must be >= 1");
    require_data(s.mor_c > 0.0, "preprocess.mor_c must be > 0");
    require_data(s.min_cluster_fraction >= 0.0 && s.min_cluster_fraction < 1.0,
                 "preprocess.min_cluster_fraction must be in [0, 1)");
    require_data(s.low_load_threshold > 0.0 && s.low_load_threshold < 1.0,
                 "preprocess.low_load_threshold must be in (0, 1)");
    require_data(s.max_interpolation_gap >= 0, "preprocess.max_interpolation_gap must be >= 0");
    return s;
}

TrainSettings parse_train(const json& j) {
    TrainSettings s;
    s.epochs = j.value("epochs", s.epochs);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.lr_halve_every = j.value("lr_halve_every", s.lr_halve_every);
    s.patience = j.value("patience", s.patience);
    s.validation_fraction = j.value("validation_fraction", s.validation_fraction);
    s.momentum = j.value("momentum", s.momentum);
    s.seed = j.value("seed", s.seed);
    s.min_training_rows = j.value("min_training_rows", s.min_training_rows);
    require_data(s.epochs >= 0, "train.epochs must be >= 0");
    require_data(s.batch_size > 0, "train.batch_size must be > 0");
    require_data(s.learning_rate > 0.0, "train.learning_rate must be > 0");
    require_data(s.lr_halve_every > 0, "train.lr_halve_every must be > 0");
    require_data(s.patience > 0, "train.patience must be > 0");
    require_data(s.validation_fraction > 0.0 && s.validation_fraction < 0.5,
                 "train.validation_fraction must be in (0, 0.5)");
    return s;
}

MonitorSettings parse_monitor(const json& j) {
    MonitorSettings s;
    s.window = j.value("window", s.window);
    s.min_window = j.value("min_window", s.window / 2);
    s.alpha1 = j.value("alpha1", s.alpha1);
    s.alpha2 = j.value("alpha2", s.alpha2);
    s.ridge = j.value("ridge", s.ridge);
    if (j.contains("warning_thresholds")) {
        const auto& t = j.at("warning_thresholds");
        require_data(t.is_array() && t.size() == 3,
                     "monitor.warning_thresholds must be an array of 3 values");
        s.warn_t1 = t[0].get<double>();
        s.warn_t2 = t[1].get<double>();
        s.warn_t3 = t[2].get<double>();
    }
    s.persistence = j.value("persistence", s.persistence);
    s.recovery = j.value("recovery", s.recovery);
    require_data(s.window > 0, "monitor.window must be > 0");
    require_data(s.min_window > 0 && s.min_window <= s.window,
                 "monitor.min_window must be in (0, window]");
    require_data(0.0 < s.alpha1 && s.alpha1 < s.alpha2 && s.alpha2 < 1.0,
                 "monitor alphas must satisfy 0 < alpha1 < alpha2 < 1");
    require_data(s.ridge >= 0.0, "monitor.ridge must be >= 0");
    require_data(1.0 > s.warn_t1 && s.warn_t1 > s.warn_t2 && s.warn_t2 > s.warn_t3 &&
                     s.warn_t3 > 0.0,
                 "monitor warning thresholds must satisfy 1 > t1 > t2 > t3 > 0");
    require_data(s.persistence >= 1, "monitor.persistence must be >= 1");
    require_data(s.recovery >= 1, "monitor.recovery must be >= 1");
    return s;
}

} // namespace

FarmConfig validate_farm_config(const json& raw) {
    require_data(raw.is_object(), "config root must be an object");
    FarmConfig cfg;
    cfg.farm_id = require_string(raw, "farm_id", "config");
    require_data(!cfg.farm_id.empty(), "farm_id must be non-empty");
    cfg.sample_interval =
        static_cast<std::int64_t>(raw.value("sample_interval_seconds", 600.0));
    require_data(cfg.sample_interval > 0, "sample_interval_seconds must be > 0");

    if (!raw.contains("healthy_periods") || !raw.at("healthy_periods").is_array() ||
        raw.at("healthy_periods").empty())
        throw_data("healthy_periods must be a non-empty list (training impossible without them)");
    for (const auto& p : raw.at("healthy_periods")) {
        require_data(p.is_array() && p.size() == 2,
                     "each healthy period must be a [start, end) pair");
        TimeInterval iv;
        iv.start = parse_iso8601(p[0].get<std::string>());
        iv.end = parse_iso8601(p[1].get<std::string>());
        require_data(iv.start < iv.end, "healthy period start must precede end");
        cfg.healthy_periods.push_back(iv);
    }
    std::sort(cfg.healthy_periods.begin(), cfg.healthy_periods.end(),
              [](const TimeInterval& a, const TimeInterval& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < cfg.healthy_periods.size(); ++i)
        require_data(cfg.healthy_periods[i - 1].end <= cfg.healthy_periods[i].start,
                     "healthy periods must not overlap");

    cfg.preprocess = parse_preprocess(raw.value("preprocess", json::object()));
    cfg.train = parse_train(raw.value("train", json::object()));
    cfg.monitor = parse_monitor(raw.value("monitor", json::object()));

    if (!raw.contains("turbines") || !raw.at("turbines").is_array() ||
        raw.at("turbines").empty())
        throw_data("turbines must be a non-empty list");

    // Tag names must map to a single role farm-wide: they are shared CSV columns.
    std::map<std::string, TagRole> farm_roles;
    std::set<std::string> turbine_ids;
    for (const auto& jt : raw.at("turbines")) {
        TurbineConfig t;
        t.turbine_id = require_string(jt, "turbine_id", "turbine");
        if (!turbine_ids.insert(t.turbine_id).second)
            throw_data("duplicate turbine_id '" + t.turbine_id + "'");
        t.nominal_power_kw = require_number(jt, "nominal_power_kw", "turbine " + t.turbine_id);
        require_data(t.nominal_power_kw > 0.0,
                     "turbine " + t.turbine_id + ": nominal_power_kw must be > 0");

        if (!jt.contains("tags") || !jt.at("tags").is_array())
            throw_data("turbine " + t.turbine_id + ": missing tags list");
        std::set<std::string> names;
        for (const auto& jtag : jt.at("tags")) {
            TagId tag;
            tag.name = require_string(jtag, "name", "tag");
            require_data(!tag.name.empty(), "tag name must be non-empty");
            tag.role = tag_role_from_name(require_string(jtag, "role", "tag " + tag.name));
            if (!names.insert(tag.name).second)
                throw_data("turbine " + t.turbine_id + ": duplicate tag name '" + tag.name + "'");
            auto it = farm_roles.find(tag.name);
            if (it != farm_roles.end() && it->second != tag.role)
                throw_data("tag '" + tag.name + "' declared with conflicting roles across turbines");
            farm_roles[tag.name] = tag.role;
            t.tags.push_back(tag);
        }
        for (TagRole r : {TagRole::AmbientTemperature, TagRole::ActivePower, TagRole::WindSpeed}) {
            int count = 0;
            for (const auto& tag : t.tags) count += tag.role == r;
            if (count != 1)
                throw_data("turbine " + t.turbine_id + ": exactly one tag with role " +
                           tag_role_name(r) + " required, found " + std::to_string(count));
        }

        if (!jt.contains("components") || !jt.at("components").is_array() ||
            jt.at("components").empty())
            throw_data("turbine " + t.turbine_id + ": missing components list");
        std::set<std::string> kinds;
        for (const auto& jc : jt.at("components")) {
            ComponentSpec spec;
            spec.kind = component_kind_from_name(require_string(jc, "kind", "component"));
            if (!kinds.insert(component_kind_name(spec.kind)).second)
                throw_data("turbine " + t.turbine_id + ": duplicate component kind " +
                           component_kind_name(spec.kind));
            if (!jc.contains("tags") || !jc.at("tags").is_array())
                throw_data("component " + std::string(component_kind_name(spec.kind)) +
                           ": missing tags list");
            for (const auto& jname : jc.at("tags")) {
                std::string name = jname.get<std::string>();
                const TagId* found = nullptr;
                for (const auto& tag : t.tags)
                    if (tag.name == name) found = &tag;
                if (!found)
                    throw_data("component " + std::string(component_kind_name(spec.kind)) +
                               " references undeclared tag '" + name + "'");
                spec.tag_list.push_back(*found);
            }
            if (spec.tag_list.size() < 2)
                throw_data("component " + std::string(component_kind_name(spec.kind)) +
                           " of turbine " + t.turbine_id +
                           ": tag list must have p >= 2 tags (multivariate chart)");
            if (spec.temperature_tags().empty())
                throw_data("component " + std::string(component_kind_name(spec.kind)) +
                           " of turbine " + t.turbine_id +
                           ": at least one component_temperature tag required");
            t.components.push_back(std::move(spec));
        }
        cfg.turbines.push_back(std::move(t));
    }
    return cfg;
}

FarmConfig load_farm_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open config file '" + path + "'");
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::exception& e) {
        throw_data("config '" + path + "' is not valid JSON: " + e.what());
    }
    return validate_farm_config(raw);
}

nlohmann::json farm_config_to_json(const FarmConfig& config) {
    json j;
    j["farm_id"] = config.farm_id;
    j["sample_interval_seconds"] = config.sample_interval;
    json periods = json::array();
    for (const auto& p : config.healthy_periods)
        periods.push_back({format_iso8601(p.start), format_iso8601(p.end)});
    j["healthy_periods"] = periods;
    j["preprocess"] = {
        {"power_band", config.preprocess.power_band},
        {"kmeans_k", config.preprocess.kmeans_k},
        {"mor_c", config.preprocess.mor_c},
        {"min_cluster_fraction", config.preprocess.min_cluster_fraction},
        {"low_load_threshold", config.preprocess.low_load_threshold},
        {"max_interpolation_gap", config.preprocess.max_interpolation_gap},
    };
    j["train"] = {
        {"epochs", config.train.epochs},
        {"batch_size", config.train.batch_size},
        {"learning_rate", config.train.learning_rate},
        {"lr_halve_every", config.train.lr_halve_every},
        {"patience", config.train.patience},
        {"validation_fraction", config.train.validation_fraction},
        {"momentum", config.train.momentum},
        {"seed", config.train.seed},
        {"min_training_rows", config.train.min_training_rows},
    };
    j["monitor"] = {
        {"window", config.monitor.window},
        {"min_window", config.monitor.min_window},
        {"alpha1", config.monitor.alpha1},
        {"alpha2", config.monitor.alpha2},
        {"ridge", config.monitor.ridge},
        {"warning_thresholds",
         {config.monitor.warn_t1, config.monitor.warn_t2, config.monitor.warn_t3}},
        {"persistence", config.monitor.persistence},
        {"recovery", config.monitor.recovery},
    };
    json turbines = json::array();
    for (const auto& t : config.turbines) {
        json jt;
        jt["turbine_id"] = t.turbine_id;
        jt["nominal_power_kw"] = t.nominal_power_kw;
        json tags = json::array();
        for (const auto& tag : t.tags)
            tags.push_back({{"name", tag.name}, {"role", tag_role_name(tag.role)}});
        jt["tags"] = tags;
        json comps = json::array();
        for (const auto& c : t.components) {
            json jc;
            jc["kind"] = component_kind_name(c.kind);
            json names = json::array();
            for (const auto& tag : c.tag_list) names.push_back(tag.name);
            jc["tags"] = names;
            comps.push_back(jc);
        }
        jt["components"] = comps;
        turbines.push_back(jt);
    }
    j["turbines"] = turbines;
    return j;
}

SampleMatrix select_columns(const SampleMatrix& matrix, const std::vector<TagId>& tags) {
    std::vector<std::size_t> idx;
    idx.reserve(tags.size());
    for (const auto& t : tags) {
        auto c = matrix.column_index(t.name);
        if (!c) throw_data("tag '" + t.name + "' not present in sample matrix");
        idx.push_back(*c);
    }
    SampleMatrix out;
    out.columns = tags;
    const std::size_t p = tags.size();
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        bool ok = true;
        for (std::size_t j : idx)
            if (!cell_valid(matrix.flag(r, j))) {
                ok = false;
                break;
            }
        if (!ok) continue;
        out.timestamps.push_back(matrix.timestamps[r]);
        for (std::size_t k = 0; k < p; ++k) {
            out.values.push_back(matrix.at(r, idx[k]));
            out.flags.push_back(matrix.flag(r, idx[k]));
        }
    }
    return out;
}

SampleMatrix select_component_samples(const SampleMatrix& matrix, const ComponentSpec& spec) {
    return select_columns(matrix, spec.tag_list);
}

SampleMatrix filter_rows(const SampleMatrix& matrix, const std::vector<bool>& mask) {
    SampleMatrix out;
    out.columns = matrix.columns;
    const std::size_t p = matrix.cols();
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (r < mask.size() && !mask[r]) continue;
        out.timestamps.push_back(matrix.timestamps[r]);
        for (std::size_t c = 0; c < p; ++c) {
            out.values.push_back(matrix.at(r, c));
            out.flags.push_back(matrix.flag(r, c));
        }
    }
    return out;
}

} // namespace sentinel
