// C API implementation: thin exception-to-status shims over the C++ core.

#include "sentinel.h"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/artifact.hpp"
#include "sentinel/domain.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/monitor.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/synth.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out == nullptr) return nullptr;
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

template <typename Fn>
sentinel_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SENTINEL_OK;
    } catch (const sentinel::Error& e) {
        g_last_error = e.what();
        return static_cast<sentinel_status>(static_cast<int>(e.kind()));
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SENTINEL_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SENTINEL_ERR_INTERNAL;
    }
}

std::vector<std::string> collect_paths(const char* const* paths, size_t count, const char* what) {
    sentinel::require_usage(paths != nullptr || count == 0,
                            std::string(what) + " array is null");
    std::vector<std::string> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        sentinel::require_usage(paths[i] != nullptr, std::string(what) + " entry is null");
        out.emplace_back(paths[i]);
    }
    return out;
}

std::optional<std::uint64_t> parse_seed(const char* text) {
    if (text == nullptr || *text == '\0') return std::nullopt;
    errno = 0;
    char* end = nullptr;
    unsigned long long value = std::strtoull(text, &end, 10);
    sentinel::require_usage(errno == 0 && end != text && *end == '\0' && text[0] != '-',
                            std::string("seed override '") + text +
                                "' is not an unsigned integer");
    return static_cast<std::uint64_t>(value);
}

void require_arg(const void* ptr, const char* name) {
    sentinel::require_usage(ptr != nullptr, std::string(name) + " must not be null");
}

} // namespace

struct sentinel_config {
    sentinel::FarmConfig config;
};

struct sentinel_model {
    sentinel::ModelArtifact artifact;
    sentinel::MonitorModels models;
};

extern "C" {

const char* sentinel_version(void) { return "1.0.0"; }

const char* sentinel_last_error(void) { return g_last_error.c_str(); }

void sentinel_string_free(char* text) { std::free(text); }

sentinel_status sentinel_config_load(const char* path, sentinel_config** out) {
    return guarded([&] {
        require_arg(path, "path");
        require_arg(out, "out");
        auto handle = new sentinel_config{sentinel::load_farm_config(path)};
        *out = handle;
    });
}

void sentinel_config_free(sentinel_config* config) { delete config; }

const char* sentinel_config_farm_id(const sentinel_config* config) {
    return config == nullptr ? nullptr : config->config.farm_id.c_str();
}

size_t sentinel_config_turbine_count(const sentinel_config* config) {
    return config == nullptr ? 0 : config->config.turbines.size();
}

sentinel_status sentinel_train(const char* config_path,
                               const char* const* data_paths, size_t data_count,
                               const char* out_dir,
                               const char* seed_override,
                               char** summary) {
    return guarded([&] {
        require_arg(config_path, "config_path");
        require_arg(out_dir, "out_dir");
        sentinel::FarmConfig config = sentinel::load_farm_config(config_path);
        auto result = sentinel::run_train(config, collect_paths(data_paths, data_count, "data"),
                                          out_dir, parse_seed(seed_override));
        if (summary != nullptr) *summary = dup_string(result.summary);
    });
}

sentinel_status sentinel_monitor(const char* const* model_paths, size_t model_count,
                                 const char* const* data_paths, size_t data_count,
                                 const char* out_dir,
                                 char** summary) {
    return guarded([&] {
        require_arg(out_dir, "out_dir");
        auto result = sentinel::run_monitor(collect_paths(model_paths, model_count, "models"),
                                            collect_paths(data_paths, data_count, "data"),
                                            out_dir);
        if (summary != nullptr) *summary = dup_string(result.summary);
    });
}

sentinel_status sentinel_simulate(const char* config_path,
                                  const char* scenario_path,
                                  const char* out_dir,
                                  const char* seed_override,
                                  char** summary) {
    return guarded([&] {
        require_arg(config_path, "config_path");
        require_arg(scenario_path, "scenario_path");
        require_arg(out_dir, "out_dir");
        sentinel::FarmConfig config = sentinel::load_farm_config(config_path);
        sentinel::Scenario scenario = sentinel::load_scenario(scenario_path);
        if (auto seed = parse_seed(seed_override); seed.has_value()) {
            scenario.settings.seed = *seed;
        }
        auto result = sentinel::run_simulate(config, scenario, out_dir);
        if (summary != nullptr) *summary = dup_string(result.summary);
    });
}

sentinel_status sentinel_evaluate(const char* warnings_path,
                                  const char* labels_path,
                                  int machine_format,
                                  char** report) {
    return guarded([&] {
        require_arg(warnings_path, "warnings_path");
        require_arg(labels_path, "labels_path");
        require_arg(report, "report");
        auto events = sentinel::load_warning_log(warnings_path);
        auto labels = sentinel::load_labels(labels_path);
        auto evaluation = sentinel::evaluate_warnings(events, labels);
        *report = dup_string(machine_format != 0 ? sentinel::report_json(evaluation).dump(2) + "\n"
                                                 : sentinel::report_text(evaluation));
    });
}

sentinel_status sentinel_model_load(const char* path, sentinel_model** out) {
    return guarded([&] {
        require_arg(path, "path");
        require_arg(out, "out");
        sentinel::ModelArtifact artifact = sentinel::load_model(path);
        auto handle = new sentinel_model{artifact, sentinel::monitor_models(artifact)};
        *out = handle;
    });
}

void sentinel_model_free(sentinel_model* model) { delete model; }

const char* sentinel_model_turbine(const sentinel_model* model) {
    return model == nullptr ? nullptr : model->artifact.turbine_id.c_str();
}

const char* sentinel_model_component(const sentinel_model* model) {
    return model == nullptr ? nullptr
                            : sentinel::component_kind_name(model->artifact.component);
}

size_t sentinel_model_tag_count(const sentinel_model* model) {
    return model == nullptr ? 0 : model->artifact.tags.size();
}

const char* sentinel_model_tag_name(const sentinel_model* model, size_t index) {
    if (model == nullptr || index >= model->artifact.tags.size()) return nullptr;
    return model->artifact.tags[index].name.c_str();
}

sentinel_status sentinel_model_score(const sentinel_model* model,
                                     const double* tag_values, size_t count,
                                     double ambient,
                                     double* t2, int* region) {
    return guarded([&] {
        require_arg(model, "model");
        require_arg(tag_values, "tag_values");
        require_arg(t2, "t2");
        require_arg(region, "region");
        const auto& m = model->models;
        sentinel::require_usage(count == m.tags.size(),
                                "expected " + std::to_string(m.tags.size()) +
                                    " tag values, got " + std::to_string(count));
        std::vector<double> sample(tag_values, tag_values + count);
        // Seasonal adjustment first, then standardization: same order as the
        // streaming monitor.
        for (size_t i = 0; i < m.tags.size(); ++i) {
            const auto* fit = model->artifact.seasonal.fit_for(m.tags[i].name);
            if (fit != nullptr) {
                sample[i] -= fit->slope * (ambient - model->artifact.seasonal.reference_ambient);
            }
        }
        sentinel::standardize_sample(m.standardizer, sample);
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(sample.data(),
                                                              static_cast<Eigen::Index>(count));
        Eigen::VectorXd residual = x - sentinel::reconstruct(m.aann, x);
        double score = sentinel::t2_score(m.chart, residual);
        *t2 = score;
        *region = sentinel::classify_region(score, m.chart);
    });
}

} // extern "C"
