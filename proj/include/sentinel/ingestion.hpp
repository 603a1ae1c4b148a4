#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sentinel/domain.hpp"

namespace sentinel {

/// Raw SCADA rows as exported: unsorted, possibly duplicated, possibly
/// incomplete. Values are aligned to tag_names; absent cells are flagged.
struct RawRecordTable {
    std::vector<std::string> tag_names;

    struct Row {
        Timestamp timestamp = 0;
        std::string turbine_id;
        std::vector<double> values;
        std::vector<std::uint8_t> present;
    };
    std::vector<Row> rows;

    /// Columns in the source file that matched no configured tag.
    std::size_t ignored_column_count = 0;
};

/// Gap handling during regularization: short runs of missing samples are
/// linearly interpolated, longer runs stay invalid.
struct GapPolicy {
    int max_interpolation_gap = 3;
};

/// Load a SCADA CSV export. Mandatory columns `timestamp` and `turbine_id`;
/// the remaining recognized columns are the union of tag names declared in
/// the config. Malformed numeric cells become missing values; unknown
/// columns are counted and ignored.
RawRecordTable load_scada_csv(const std::string& path, const FarmConfig& schema);

/// Merge several exports into one table (row order = file order).
RawRecordTable load_scada_csvs(const std::vector<std::string>& paths, const FarmConfig& schema);

/// Write a table back out in the same CSV format (used by the simulator).
std::string scada_csv_text(const RawRecordTable& table);

/// Snap rows onto the uniform sampling grid, resolve duplicates
/// (last-write-wins in row order) and apply the gap policy. Returns one
/// matrix per turbine, keyed by turbine id. Timestamps more than 10% of the
/// interval off the grid are rejected.
std::map<std::string, SampleMatrix> regularize(const RawRecordTable& table,
                                               const FarmConfig& config,
                                               const GapPolicy& policy);

/// Split into training rows (inside a healthy period) and the full
/// monitoring stream. Throws when fewer than min_train_rows training rows
/// survive.
struct TrainEvalSplit {
    SampleMatrix train;
    SampleMatrix eval;
};
TrainEvalSplit split_train_eval(const SampleMatrix& matrix,
                                const std::vector<TimeInterval>& healthy_periods,
                                std::size_t min_train_rows = 1000);

} // namespace sentinel
