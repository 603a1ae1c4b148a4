#include "doctest.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "sentinel/domain.hpp"
#include "sentinel/errors.hpp"

using namespace sentinel;
using nlohmann::json;

namespace {

json good_config() {
    std::ifstream in(testutil::data_file("farm.json"));
    return json::parse(in);
}

void check_data_error(const json& raw, const std::string& fragment) {
    try {
        validate_farm_config(raw);
        FAIL_CHECK("expected a data error containing '" << fragment << "'");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
}

} // namespace

TEST_CASE("well-formed config parses with all sections") {
    FarmConfig cfg = validate_farm_config(good_config());
    CHECK(cfg.farm_id == "testfarm");
    CHECK(cfg.sample_interval == 600);
    REQUIRE(cfg.turbines.size() == 2);
    const auto& t = cfg.turbines[0];
    CHECK(t.turbine_id == "wt01");
    CHECK(t.nominal_power_kw == 2000.0);
    REQUIRE(t.components.size() == 1);
    CHECK(t.components[0].kind == ComponentKind::Gearbox);
    REQUIRE(t.components[0].tag_list.size() == 4);
    CHECK(t.components[0].tag_list[0].role == TagRole::ComponentTemperature);
    CHECK(t.components[0].temperature_tags().size() == 2);
    // Defaults fill unspecified sections.
    CHECK(cfg.monitor.window == 432);
    CHECK(cfg.monitor.warn_t1 == 0.92);
    CHECK(cfg.preprocess.kmeans_k == 8);
    CHECK(cfg.train.epochs == 60);  // overridden by the fixture
}

TEST_CASE("config survives a serialization round trip") {
    FarmConfig cfg = validate_farm_config(good_config());
    FarmConfig again = validate_farm_config(farm_config_to_json(cfg));
    CHECK(cfg == again);
}

TEST_CASE("builder helper matches the fixture") {
    FarmConfig cfg = validate_farm_config(good_config());
    CHECK(cfg == testutil::small_farm(2));
}

TEST_CASE("structural problems are rejected with precise messages") {
    SUBCASE("duplicate turbine id") {
        json j = good_config();
        j["turbines"][1]["turbine_id"] = "wt01";
        check_data_error(j, "duplicate turbine_id");
    }
    SUBCASE("missing wind role") {
        json j = good_config();
        auto& tags = j["turbines"][0]["tags"];
        tags.erase(0);
        check_data_error(j, "wind_speed");
    }
    SUBCASE("two power tags") {
        json j = good_config();
        j["turbines"][0]["tags"].push_back({{"name", "power2"}, {"role", "active_power"}});
        check_data_error(j, "active_power");
    }
    SUBCASE("empty healthy periods") {
        json j = good_config();
        j["healthy_periods"] = json::array();
        check_data_error(j, "healthy_periods");
    }
    SUBCASE("overlapping healthy periods") {
        json j = good_config();
        j["healthy_periods"] = json::array(
            {json::array({"2022-01-01T00:00:00Z", "2022-01-20T00:00:00Z"}),
             json::array({"2022-01-10T00:00:00Z", "2022-01-31T00:00:00Z"})});
        check_data_error(j, "overlap");
    }
    SUBCASE("component references unknown tag") {
        json j = good_config();
        j["turbines"][0]["components"][0]["tags"][0] = "no_such_tag";
        check_data_error(j, "no_such_tag");
    }
    SUBCASE("component with a single tag") {
        json j = good_config();
        j["turbines"][0]["components"][0]["tags"] = {"gearbox_bearing_temp"};
        check_data_error(j, "p >= 2");
    }
    SUBCASE("component without temperature tags") {
        json j = good_config();
        j["turbines"][0]["components"][0]["tags"] = {"rotor_speed", "shaft_torque"};
        check_data_error(j, "temperature");
    }
    SUBCASE("conflicting roles across turbines") {
        json j = good_config();
        j["turbines"][1]["tags"][0]["role"] = "other";
        check_data_error(j, "conflicting roles");
    }
    SUBCASE("unknown component kind") {
        json j = good_config();
        j["turbines"][0]["components"][0]["kind"] = "flux_capacitor";
        check_data_error(j, "flux_capacitor");
    }
}

TEST_CASE("column selection extracts component tags in order") {
    FarmConfig cfg = testutil::small_farm(1);
    const auto& spec = cfg.turbines[0].components[0];
    SampleMatrix m = testutil::make_matrix(
        {{8.0, 10.0, 900.0, 55.0, 60.0, 12.0, 700.0},
         {9.0, 11.0, 1100.0, 56.0, 61.0, 12.5, 750.0}},
        cfg.turbines[0].tags);
    SampleMatrix sel = select_component_samples(m, spec);
    REQUIRE(sel.cols() == 4);
    CHECK(sel.columns[0].name == "gearbox_bearing_temp");
    CHECK(sel.columns[3].name == "shaft_torque");
    CHECK(sel.at(0, 0) == 55.0);
    CHECK(sel.at(1, 3) == 750.0);
    CHECK(sel.rows() == 2);

    // Selecting the already-selected columns is the identity.
    SampleMatrix twice = select_columns(sel, spec.tag_list);
    CHECK(twice.values == sel.values);
    CHECK(twice.timestamps == sel.timestamps);
}

TEST_CASE("row filtering by mask") {
    SampleMatrix m = testutil::make_matrix({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
    SampleMatrix kept = filter_rows(m, {true, false, true});
    REQUIRE(kept.rows() == 2);
    CHECK(kept.at(0, 0) == 1.0);
    CHECK(kept.at(1, 1) == 6.0);
    CHECK(kept.timestamps[1] == m.timestamps[2]);
}

TEST_CASE("matrix validity and lookups") {
    SampleMatrix m = testutil::make_matrix({{1.0, 2.0}, {3.0, 4.0}},
                                           {testutil::tag("a", TagRole::Other),
                                            testutil::tag("w", TagRole::WindSpeed)});
    CHECK(m.row_valid(0));
    m.flag(1, 0) = CellFlag::Missing;
    CHECK_FALSE(m.row_valid(1));
    CHECK(m.column_index("w").value() == 1);
    CHECK_FALSE(m.column_index("zz").has_value());
    CHECK(m.column_with_role(TagRole::WindSpeed).value() == 1);
    CHECK_FALSE(m.column_with_role(TagRole::ActivePower).has_value());
}
