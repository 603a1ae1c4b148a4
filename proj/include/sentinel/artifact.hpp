#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sentinel/monitor.hpp"

namespace sentinel {

inline constexpr int kModelFormatVersion = 1;

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a_hex(const void* data, std::size_t size);
std::string fnv1a_hex(const std::string& text);

struct TrainingFingerprint {
    std::size_t rows = 0;
    Timestamp start = 0;
    Timestamp end = 0;
    std::string hash;
};

/// Content hash over timestamps, values and validity flags.
TrainingFingerprint fingerprint_matrix(const SampleMatrix& matrix);

/// One trained turbine-component model: every sub-model needed to score a
/// stream, plus provenance. Serialized as a single JSON document with an
/// embedded integrity hash.
struct ModelArtifact {
    int format_version = kModelFormatVersion;
    std::string farm_id;
    std::string turbine_id;
    ComponentKind component = ComponentKind::Gearbox;
    std::string created_utc;
    double nominal_power_kw = 0.0;
    std::int64_t sample_interval = 600;
    int max_interpolation_gap = 3;
    std::vector<TagId> tags;
    /// Supporting columns (ambient, power, wind) the stream must also carry.
    std::vector<TagId> aux_tags;

    Standardizer standardizer;
    SeasonalModel seasonal;
    PowerCurveModel power_curve;
    MorModel mor;
    AannModel aann;
    ChartModel chart;
    MonitorSettings monitor;
    TrainingFingerprint fingerprint;
};

nlohmann::json artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const nlohmann::json& raw);

/// Atomic write; the document embeds an integrity hash over its own
/// canonical form (with volatile fields blanked), so a rerun with identical
/// inputs is byte-identical except the created_utc line.
void save_model(const ModelArtifact& artifact, const std::string& path);

/// Verifies version and integrity before returning the artifact.
ModelArtifact load_model(const std::string& path);

/// The scoring view of an artifact.
MonitorModels monitor_models(const ModelArtifact& artifact);

} // namespace sentinel
