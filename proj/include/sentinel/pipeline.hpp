#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sentinel/artifact.hpp"
#include "sentinel/synth.hpp"

namespace sentinel {

struct ComponentTrainStats {
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    std::size_t rows_loaded = 0;       // training rows inside healthy periods
    std::size_t rows_after_power = 0;  // after power-curve filtering
    std::size_t rows_after_mor = 0;    // component samples surviving MOR
    std::size_t epochs_run = 0;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    std::string artifact_path;
};

/// Fits one artifact per turbine-component from raw records. seed_override
/// replaces the config training seed (CLI environment hook).
std::vector<ModelArtifact> train_models(const FarmConfig& config, const RawRecordTable& table,
                                        std::optional<std::uint64_t> seed_override = std::nullopt,
                                        std::vector<ComponentTrainStats>* stats = nullptr);

struct TrainResult {
    std::vector<ComponentTrainStats> components;
    std::string summary;
};

TrainResult run_train(const FarmConfig& config, const std::vector<std::string>& data_paths,
                      const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

struct MonitorResult {
    std::vector<std::string> series_paths;
    std::vector<std::string> warning_paths;
    std::string combined_warnings_path;
    std::size_t escalation_events = 0;
    int max_level = 0;
    std::string summary;
};

MonitorResult run_monitor(const std::vector<std::string>& model_paths,
                          const std::vector<std::string>& data_paths,
                          const std::string& out_dir);

struct SimulateResult {
    std::string scada_path;
    std::string labels_path;
    std::size_t rows = 0;
    std::string summary;
};

SimulateResult run_simulate(const FarmConfig& config, const Scenario& scenario,
                            const std::string& out_dir);

/// CSV texts shared by the pipeline and the evaluation loader.
std::string kpi_series_csv(const MonitorModels& models, const std::vector<SeriesPoint>& series);
std::string warning_log_csv(const std::string& farm_id, const std::vector<WarningEvent>& events);
std::string labels_csv(const std::vector<GroundTruthLabel>& labels);

} // namespace sentinel
