#include "sentinel/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

std::vector<std::string> farm_tag_names(const FarmConfig& schema) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& t : schema.turbines)
        for (const auto& tag : t.tags)
            if (seen.insert(tag.name).second) names.push_back(tag.name);
    return names;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

} // namespace

RawRecordTable load_scada_csv(const std::string& path, const FarmConfig& schema) {
    CsvTable csv = read_csv(path);
    int ts_col = csv.column("timestamp");
    int id_col = csv.column("turbine_id");
    if (ts_col < 0 || id_col < 0)
        throw_data("file '" + path + "': header must contain 'timestamp' and 'turbine_id'");

    RawRecordTable table;
    table.tag_names = farm_tag_names(schema);

    // Map file columns onto recognized tags once.
    std::vector<int> col_to_tag(csv.header.size(), -1);
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        if (static_cast<int>(c) == ts_col || static_cast<int>(c) == id_col) continue;
        auto it = std::find(table.tag_names.begin(), table.tag_names.end(), csv.header[c]);
        if (it == table.tag_names.end())
            ++table.ignored_column_count;
        else
            col_to_tag[c] = static_cast<int>(it - table.tag_names.begin());
    }

    const std::size_t n_tags = table.tag_names.size();
    table.rows.reserve(csv.rows.size());
    for (const auto& fields : csv.rows) {
        if (fields.size() <= static_cast<std::size_t>(std::max(ts_col, id_col))) continue;
        RawRecordTable::Row row;
        row.timestamp = parse_iso8601(fields[ts_col]);
        row.turbine_id = fields[id_col];
        row.values.assign(n_tags, 0.0);
        row.present.assign(n_tags, 0);
        for (std::size_t c = 0; c < fields.size() && c < col_to_tag.size(); ++c) {
            int t = col_to_tag[c];
            if (t < 0) continue;
            double v;
            if (parse_double(fields[c], v)) {
                row.values[t] = v;
                row.present[t] = 1;
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

RawRecordTable load_scada_csvs(const std::vector<std::string>& paths, const FarmConfig& schema) {
    require_data(!paths.empty(), "no SCADA data files given");
    RawRecordTable merged;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        RawRecordTable t = load_scada_csv(paths[i], schema);
        if (i == 0) {
            merged = std::move(t);
        } else {
            merged.ignored_column_count += t.ignored_column_count;
            merged.rows.insert(merged.rows.end(), std::make_move_iterator(t.rows.begin()),
                               std::make_move_iterator(t.rows.end()));
        }
    }
    return merged;
}

std::string scada_csv_text(const RawRecordTable& table) {
    std::ostringstream out;
    out << "timestamp,turbine_id";
    for (const auto& name : table.tag_names) out << ',' << name;
    out << '\n';
    for (const auto& row : table.rows) {
        out << format_iso8601(row.timestamp) << ',' << row.turbine_id;
        for (std::size_t t = 0; t < table.tag_names.size(); ++t) {
            out << ',';
            if (row.present[t]) out << format_double(row.values[t]);
        }
        out << '\n';
    }
    return out.str();
}

std::map<std::string, SampleMatrix> regularize(const RawRecordTable& table,
                                               const FarmConfig& config,
                                               const GapPolicy& policy) {
    require_data(policy.max_interpolation_gap >= 0, "max_interpolation_gap must be >= 0");
    const std::int64_t step = config.sample_interval;
    std::map<std::string, SampleMatrix> out;

    for (const auto& turbine : config.turbines) {
        // Collect this turbine's rows, snapped to the grid; later rows win.
        std::map<Timestamp, const RawRecordTable::Row*> by_time;
        for (const auto& row : table.rows) {
            if (row.turbine_id != turbine.turbine_id) continue;
            Timestamp snapped =
                (row.timestamp + (row.timestamp >= 0 ? step / 2 : -step / 2)) / step * step;
            if (std::llabs(row.timestamp - snapped) * 10 > step) continue;  // off-grid, rejected
            by_time[snapped] = &row;
        }

        SampleMatrix matrix;
        matrix.columns = turbine.tags;
        if (by_time.empty()) {
            out.emplace(turbine.turbine_id, std::move(matrix));
            continue;
        }

        const Timestamp first = by_time.begin()->first;
        const Timestamp last = by_time.rbegin()->first;
        const std::size_t n = static_cast<std::size_t>((last - first) / step) + 1;
        const std::size_t p = turbine.tags.size();
        matrix.resize(n, turbine.tags);

        // Tag index in the raw table for each matrix column.
        std::vector<int> tag_idx(p, -1);
        for (std::size_t c = 0; c < p; ++c) {
            auto it = std::find(table.tag_names.begin(), table.tag_names.end(),
                                turbine.tags[c].name);
            if (it != table.tag_names.end())
                tag_idx[c] = static_cast<int>(it - table.tag_names.begin());
        }

        for (std::size_t r = 0; r < n; ++r) {
            Timestamp t = first + static_cast<Timestamp>(r) * step;
            matrix.timestamps[r] = t;
            auto it = by_time.find(t);
            if (it == by_time.end()) continue;
            const auto& row = *it->second;
            for (std::size_t c = 0; c < p; ++c) {
                int ti = tag_idx[c];
                if (ti >= 0 && row.present[ti]) {
                    matrix.at(r, c) = row.values[ti];
                    matrix.flag(r, c) = CellFlag::Measured;
                }
            }
        }

        // Per-column gap fill: runs of missing cells up to the policy limit,
        // with measured anchors on both sides, are linearly interpolated.
        for (std::size_t c = 0; c < p; ++c) {
            std::size_t r = 0;
            while (r < n) {
                if (matrix.flag(r, c) != CellFlag::Missing) {
                    ++r;
                    continue;
                }
                std::size_t run_start = r;
                while (r < n && matrix.flag(r, c) == CellFlag::Missing) ++r;
                std::size_t run_len = r - run_start;
                bool has_left = run_start > 0;
                bool has_right = r < n;
                if (!has_left || !has_right ||
                    run_len > static_cast<std::size_t>(policy.max_interpolation_gap))
                    continue;
                double left = matrix.at(run_start - 1, c);
                double right = matrix.at(r, c);
                for (std::size_t k = 0; k < run_len; ++k) {
                    double frac = static_cast<double>(k + 1) / static_cast<double>(run_len + 1);
                    matrix.at(run_start + k, c) = left + frac * (right - left);
                    matrix.flag(run_start + k, c) = CellFlag::Interpolated;
                }
            }
        }

        out.emplace(turbine.turbine_id, std::move(matrix));
    }
    return out;
}

TrainEvalSplit split_train_eval(const SampleMatrix& matrix,
                                const std::vector<TimeInterval>& healthy_periods,
                                std::size_t min_train_rows) {
    std::vector<bool> in_healthy(matrix.rows(), false);
    for (std::size_t r = 0; r < matrix.rows(); ++r)
        for (const auto& p : healthy_periods)
            if (p.contains(matrix.timestamps[r])) {
                in_healthy[r] = true;
                break;
            }

    TrainEvalSplit split;
    split.train = filter_rows(matrix, in_healthy);
    split.eval = matrix;
    if (split.train.rows() < min_train_rows)
        throw_data("insufficient training data: " + std::to_string(split.train.rows()) +
                   " rows inside healthy periods, need at least " +
                   std::to_string(min_train_rows));
    return split;
}

} // namespace sentinel
