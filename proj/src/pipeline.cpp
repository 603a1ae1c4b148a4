#include "sentinel/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/ingestion.hpp"
#include "sentinel/rng.hpp"

namespace fs = std::filesystem;

namespace sentinel {

namespace {

std::string now_utc() { return format_iso8601(static_cast<Timestamp>(std::time(nullptr))); }

std::string join_path(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

} // namespace

std::vector<ModelArtifact> train_models(const FarmConfig& config, const RawRecordTable& table,
                                        std::optional<std::uint64_t> seed_override,
                                        std::vector<ComponentTrainStats>* stats) {
    GapPolicy policy{config.preprocess.max_interpolation_gap};
    auto per_turbine = regularize(table, config, policy);

    TrainSettings base_settings = config.train;
    if (seed_override) base_settings.seed = *seed_override;

    std::vector<ModelArtifact> artifacts;
    for (const auto& turbine : config.turbines) {
        auto it = per_turbine.find(turbine.turbine_id);
        if (it == per_turbine.end() || it->second.rows() == 0)
            throw_data("no rows found for turbine '" + turbine.turbine_id + "'");
        TrainEvalSplit split = split_train_eval(it->second, config.healthy_periods,
                                                base_settings.min_training_rows);
        const SampleMatrix& train = split.train;
        TrainingFingerprint fingerprint = fingerprint_matrix(train);

        auto wind_col = train.column_with_role(TagRole::WindSpeed);
        auto power_col = train.column_with_role(TagRole::ActivePower);
        require_data(wind_col.has_value() && power_col.has_value(),
                     "turbine '" + turbine.turbine_id + "' data lacks wind/power columns");
        std::vector<double> wind, power;
        for (std::size_t r = 0; r < train.rows(); ++r) {
            if (!cell_valid(train.flag(r, *wind_col)) || !cell_valid(train.flag(r, *power_col)))
                continue;
            wind.push_back(train.at(r, *wind_col));
            power.push_back(train.at(r, *power_col));
        }
        PowerCurveModel curve = fit_power_curve(wind, power, turbine.nominal_power_kw);
        std::vector<bool> power_inliers =
            filter_power_curve_outliers(train, curve, config.preprocess.power_band);
        SampleMatrix filtered = filter_rows(train, power_inliers);

        std::vector<TagId> aux_tags;
        for (TagRole role :
             {TagRole::AmbientTemperature, TagRole::ActivePower, TagRole::WindSpeed})
            if (const TagId* tag = turbine.tag_with_role(role)) aux_tags.push_back(*tag);

        for (const auto& comp : turbine.components) {
            const std::string scope =
                turbine.turbine_id + "/" + component_kind_name(comp.kind);
            SeasonalModel seasonal = fit_seasonal_model(filtered, comp, turbine.nominal_power_kw,
                                                        config.preprocess.low_load_threshold);
            SampleMatrix adjusted = apply_seasonal_adjustment(filtered, seasonal);
            SampleMatrix selected = select_component_samples(adjusted, comp);
            Standardizer standardizer = fit_standardizer(selected);
            SampleMatrix standardized = apply_standardizer(selected, standardizer);

            MorModel mor = mor_fit(standardized, config.preprocess.kmeans_k,
                                   seed_mix(base_settings.seed, scope + "/mor"),
                                   config.preprocess.mor_c,
                                   config.preprocess.min_cluster_fraction);
            SampleMatrix cleaned = filter_rows(standardized, mor_filter(standardized, mor));

            TrainSettings settings = base_settings;
            settings.seed = seed_mix(base_settings.seed, scope + "/aann");
            AannModel aann =
                init_aann(comp.tag_list.size(), seed_mix(base_settings.seed, scope + "/init"));
            Eigen::MatrixXd samples = valid_rows_matrix(cleaned);
            LossHistory history = train_aann(aann, samples, settings);

            std::vector<std::string> names;
            for (const auto& tag : comp.tag_list) names.push_back(tag.name);
            // The network trains on MOR-cleaned rows so outliers cannot warp
            // the fit, but the chart is calibrated on the full filtered
            // training population: monitoring scores every valid operating
            // row, so boundaries fitted only on the cleaned subset would sit
            // too tight for the stream they will actually judge.
            ChartModel chart = fit_residual_chart(
                residuals(aann, valid_rows_matrix(standardized)), names, config.monitor.ridge,
                config.monitor.alpha1, config.monitor.alpha2);

            ModelArtifact artifact;
            artifact.farm_id = config.farm_id;
            artifact.turbine_id = turbine.turbine_id;
            artifact.component = comp.kind;
            artifact.created_utc = now_utc();
            artifact.nominal_power_kw = turbine.nominal_power_kw;
            artifact.sample_interval = config.sample_interval;
            artifact.max_interpolation_gap = config.preprocess.max_interpolation_gap;
            artifact.tags = comp.tag_list;
            artifact.aux_tags = aux_tags;
            artifact.standardizer = standardizer;
            artifact.seasonal = seasonal;
            artifact.power_curve = curve;
            artifact.mor = mor;
            artifact.aann = aann;
            artifact.chart = chart;
            artifact.monitor = config.monitor;
            artifact.fingerprint = fingerprint;
            artifacts.push_back(std::move(artifact));

            if (stats) {
                ComponentTrainStats s;
                s.turbine_id = turbine.turbine_id;
                s.component = comp.kind;
                s.rows_loaded = train.rows();
                s.rows_after_power = filtered.rows();
                s.rows_after_mor = static_cast<std::size_t>(samples.rows());
                s.epochs_run = aann.epochs_run;
                s.train_loss = history.train.empty() ? 0.0 : history.train.back();
                s.validation_loss = history.best_validation;
                stats->push_back(std::move(s));
            }
        }
    }
    return artifacts;
}

TrainResult run_train(const FarmConfig& config, const std::vector<std::string>& data_paths,
                      const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
    require_usage(!data_paths.empty(), "no input data files given");
    RawRecordTable table = load_scada_csvs(data_paths, config);
    TrainResult result;
    std::vector<ModelArtifact> artifacts =
        train_models(config, table, seed_override, &result.components);

    fs::create_directories(out_dir);
    std::ostringstream summary;
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const ModelArtifact& artifact = artifacts[i];
        ComponentTrainStats& s = result.components[i];
        const std::string file =
            artifact.turbine_id + "_" + component_kind_name(artifact.component) + ".json";
        s.artifact_path = join_path(out_dir, file);
        save_model(artifact, s.artifact_path);
        summary << artifact.turbine_id << " " << component_kind_name(artifact.component)
                << ": rows " << s.rows_loaded << " -> power_filter " << s.rows_after_power
                << " -> mor " << s.rows_after_mor << "; epochs " << s.epochs_run
                << ", train mse " << format_double(s.train_loss) << ", val mse "
                << format_double(s.validation_loss) << " -> " << s.artifact_path << "\n";
    }
    result.summary = summary.str();
    return result;
}

std::string kpi_series_csv(const MonitorModels& models, const std::vector<SeriesPoint>& series) {
    std::string text = "timestamp,turbine_id,component,t2,region,kpi,level\n";
    for (const auto& point : series) {
        text += format_iso8601(point.timestamp);
        text += ',';
        text += models.turbine_id;
        text += ',';
        text += component_kind_name(models.component);
        text += ',';
        text += format_double(point.t2);
        text += ',';
        text += std::to_string(point.region);
        text += ',';
        if (point.kpi) text += format_double(*point.kpi);
        text += ',';
        text += std::to_string(point.level);
        text += '\n';
    }
    return text;
}

std::string warning_log_csv(const std::string& farm_id,
                            const std::vector<WarningEvent>& events) {
    std::string text = "timestamp,farm_id,turbine_id,component,old_level,new_level,kpi\n";
    for (const auto& e : events) {
        text += format_iso8601(e.timestamp);
        text += ',';
        text += farm_id;
        text += ',';
        text += e.turbine_id;
        text += ',';
        text += component_kind_name(e.component);
        text += ',';
        text += std::to_string(e.old_level);
        text += ',';
        text += std::to_string(e.new_level);
        text += ',';
        text += format_double(e.kpi);
        text += '\n';
    }
    return text;
}

std::string labels_csv(const std::vector<GroundTruthLabel>& labels) {
    std::string text = "turbine_id,component,label,start,end\n";
    for (const auto& l : labels) {
        text += l.turbine_id;
        text += ',';
        text += component_kind_name(l.component);
        text += ',';
        text += l.label;
        text += ',';
        text += format_iso8601(l.interval.start);
        text += ',';
        text += format_iso8601(l.interval.end);
        text += '\n';
    }
    return text;
}

MonitorResult run_monitor(const std::vector<std::string>& model_paths,
                          const std::vector<std::string>& data_paths,
                          const std::string& out_dir) {
    require_usage(!model_paths.empty(), "no model files given");
    require_usage(!data_paths.empty(), "no input data files given");

    std::vector<std::string> sorted_paths = model_paths;
    std::sort(sorted_paths.begin(), sorted_paths.end());
    std::vector<ModelArtifact> artifacts;
    for (const auto& path : sorted_paths) artifacts.push_back(load_model(path));

    // The artifacts are the schema: reassemble the per-turbine tag lists so
    // ingestion can be run without the original config file.
    FarmConfig schema;
    schema.farm_id = artifacts.front().farm_id;
    schema.sample_interval = artifacts.front().sample_interval;
    for (const auto& artifact : artifacts) {
        require_data(artifact.sample_interval == schema.sample_interval,
                     "model files disagree on the sampling interval");
        TurbineConfig* turbine = nullptr;
        for (auto& t : schema.turbines)
            if (t.turbine_id == artifact.turbine_id) turbine = &t;
        if (!turbine) {
            schema.turbines.push_back({});
            turbine = &schema.turbines.back();
            turbine->turbine_id = artifact.turbine_id;
            turbine->nominal_power_kw = artifact.nominal_power_kw;
        }
        auto merge = [&](const TagId& tag) {
            for (auto& existing : turbine->tags)
                if (existing.name == tag.name) {
                    require_data(existing.role == tag.role,
                                 "model files disagree on the role of tag '" + tag.name + "'");
                    return;
                }
            turbine->tags.push_back(tag);
        };
        for (const auto& tag : artifact.tags) merge(tag);
        for (const auto& tag : artifact.aux_tags) merge(tag);
    }

    RawRecordTable table = load_scada_csvs(data_paths, schema);
    GapPolicy policy{artifacts.front().max_interpolation_gap};
    auto per_turbine = regularize(table, schema, policy);

    fs::create_directories(out_dir);
    MonitorResult result;
    std::vector<std::pair<std::string, WarningEvent>> all_events;
    std::ostringstream summary;
    for (const auto& artifact : artifacts) {
        auto it = per_turbine.find(artifact.turbine_id);
        if (it == per_turbine.end())
            throw_data("no rows found for turbine '" + artifact.turbine_id + "'");
        MonitorModels models = monitor_models(artifact);
        MonitorOutput output = monitor_stream(models, it->second, artifact.monitor);

        const std::string stem =
            artifact.turbine_id + "_" + std::string(component_kind_name(artifact.component));
        const std::string series_path = join_path(out_dir, stem + "_kpi.csv");
        write_file_atomic(series_path, kpi_series_csv(models, output.series));
        result.series_paths.push_back(series_path);
        const std::string warn_path = join_path(out_dir, stem + "_warnings.csv");
        write_file_atomic(warn_path, warning_log_csv(artifact.farm_id, output.warnings));
        result.warning_paths.push_back(warn_path);

        std::size_t escalations = 0;
        for (const auto& e : output.warnings) {
            all_events.emplace_back(artifact.farm_id, e);
            if (e.new_level > e.old_level) ++escalations;
            result.max_level = std::max(result.max_level, e.new_level);
        }
        result.escalation_events += escalations;
        summary << artifact.turbine_id << " " << component_kind_name(artifact.component) << ": "
                << output.series.size() << " samples scored, " << output.warnings.size()
                << " events, final level " << output.final_level << "\n";
    }

    std::stable_sort(all_events.begin(), all_events.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second.timestamp != b.second.timestamp)
                             return a.second.timestamp < b.second.timestamp;
                         if (a.second.turbine_id != b.second.turbine_id)
                             return a.second.turbine_id < b.second.turbine_id;
                         return a.second.component < b.second.component;
                     });
    std::string combined = "timestamp,farm_id,turbine_id,component,old_level,new_level,kpi\n";
    for (const auto& [farm_id, e] : all_events) {
        combined += format_iso8601(e.timestamp);
        combined += ',';
        combined += farm_id;
        combined += ',';
        combined += e.turbine_id;
        combined += ',';
        combined += component_kind_name(e.component);
        combined += ',';
        combined += std::to_string(e.old_level);
        combined += ',';
        combined += std::to_string(e.new_level);
        combined += ',';
        combined += format_double(e.kpi);
        combined += '\n';
    }
    result.combined_warnings_path = join_path(out_dir, "warnings.csv");
    write_file_atomic(result.combined_warnings_path, combined);
    result.summary = summary.str();
    return result;
}

SimulateResult run_simulate(const FarmConfig& config, const Scenario& scenario,
                            const std::string& out_dir) {
    RawRecordTable table = generate_healthy(config, scenario.settings);
    for (const auto& fault : scenario.faults) table = inject_fault(table, fault, config);

    fs::create_directories(out_dir);
    SimulateResult result;
    result.rows = table.rows.size();
    result.scada_path = join_path(out_dir, "scada.csv");
    write_file_atomic(result.scada_path, scada_csv_text(table));

    TimeInterval span{scenario.settings.start,
                      scenario.settings.start +
                          static_cast<Timestamp>(scenario.settings.duration_days) *
                              kSecondsPerDay};
    result.labels_path = join_path(out_dir, "labels.csv");
    write_file_atomic(result.labels_path, labels_csv(label_farm(config, scenario.faults, span)));

    std::ostringstream summary;
    summary << result.rows << " rows -> " << result.scada_path << "; labels -> "
            << result.labels_path << "\n";
    result.summary = summary.str();
    return result;
}

} // namespace sentinel
