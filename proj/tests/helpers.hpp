// Shared builders for tests: a small farm configuration, sample matrices,
// and a self-cleaning temporary directory.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "sentinel/domain.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/timeutil.hpp"

namespace testutil {

/// Asserts that fn() throws sentinel::Error mentioning the fragment.
template <typename Fn>
void check_error_contains(Fn&& fn, const std::string& fragment) {
    try {
        std::forward<Fn>(fn)();
        FAIL_CHECK("expected an error containing '" << fragment << "'");
    } catch (const sentinel::Error& e) {
        CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos,
                      "message was: " << e.what());
    }
}

inline sentinel::TagId tag(const std::string& name, sentinel::TagRole role) {
    sentinel::TagId t;
    t.name = name;
    t.role = role;
    return t;
}

/// One- or two-turbine farm matching tests/data/farm.json: a gearbox
/// component with two temperatures, rotor speed, and shaft torque.
inline sentinel::FarmConfig small_farm(int turbines = 2) {
    using sentinel::TagRole;
    sentinel::FarmConfig cfg;
    cfg.farm_id = "testfarm";
    cfg.sample_interval = 600;
    cfg.healthy_periods.push_back({sentinel::parse_iso8601("2022-01-01T00:00:00Z"),
                                   sentinel::parse_iso8601("2022-01-31T00:00:00Z")});
    cfg.train.epochs = 60;
    for (int i = 0; i < turbines; ++i) {
        sentinel::TurbineConfig t;
        t.turbine_id = i == 0 ? "wt01" : "wt0" + std::to_string(i + 1);
        t.nominal_power_kw = 2000.0;
        t.tags = {
            tag("wind_speed", TagRole::WindSpeed),
            tag("ambient_temp", TagRole::AmbientTemperature),
            tag("active_power", TagRole::ActivePower),
            tag("gearbox_bearing_temp", TagRole::ComponentTemperature),
            tag("gearbox_oil_temp", TagRole::ComponentTemperature),
            tag("rotor_speed", TagRole::RotorSpeed),
            tag("shaft_torque", TagRole::ShaftTorque),
        };
        sentinel::ComponentSpec gearbox;
        gearbox.kind = sentinel::ComponentKind::Gearbox;
        gearbox.tag_list = {t.tags[3], t.tags[4], t.tags[5], t.tags[6]};
        t.components.push_back(gearbox);
        cfg.turbines.push_back(t);
    }
    return cfg;
}

/// Dense matrix with every cell measured; columns default to generic names.
inline sentinel::SampleMatrix make_matrix(const std::vector<std::vector<double>>& rows,
                                          std::vector<sentinel::TagId> columns = {},
                                          sentinel::Timestamp start = 0,
                                          sentinel::Timestamp step = 600) {
    sentinel::SampleMatrix m;
    const std::size_t p = rows.empty() ? columns.size() : rows.front().size();
    if (columns.empty()) {
        for (std::size_t c = 0; c < p; ++c) {
            columns.push_back(tag("col" + std::to_string(c), sentinel::TagRole::Other));
        }
    }
    m.resize(rows.size(), columns);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        m.timestamps[r] = start + static_cast<sentinel::Timestamp>(r) * step;
        for (std::size_t c = 0; c < p; ++c) {
            m.at(r, c) = rows[r][c];
            m.flag(r, c) = sentinel::CellFlag::Measured;
        }
    }
    return m;
}

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "sentinel-test-XXXXXX");
        path_ = mkdtemp(tmpl.data());
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return path_ + "/" + name; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline std::string data_file(const std::string& name) {
    return std::string(TEST_DATA_DIR) + "/" + name;
}

} // namespace testutil
