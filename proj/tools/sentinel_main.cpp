// sentinel — command-line front end for the condition monitoring library.
//
// Talks to the core exclusively through the C API (sentinel.h), so it doubles
// as a living example of embedding the shared library.

#include <glob.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sentinel.h"

namespace {

// Expands one pattern: a directory becomes <dir>/<ext> files, a glob pattern
// expands via glob(3), and a plain path passes through untouched so missing
// files surface as data errors with a precise message instead of silence.
std::vector<std::string> expand_pattern(const std::string& pattern, const char* dir_extension) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::is_directory(pattern, ec)) {
        std::vector<std::string> found;
        for (const auto& entry : fs::directory_iterator(pattern, ec)) {
            if (entry.is_regular_file() && entry.path().extension() == dir_extension) {
                found.push_back(entry.path().string());
            }
        }
        std::sort(found.begin(), found.end());
        return found;
    }

    glob_t results{};
    int rc = glob(pattern.c_str(), GLOB_ERR, nullptr, &results);
    std::vector<std::string> found;
    if (rc == 0) {
        for (size_t i = 0; i < results.gl_pathc; ++i) {
            found.emplace_back(results.gl_pathv[i]);
        }
    } else {
        found.push_back(pattern);
    }
    globfree(&results);
    std::sort(found.begin(), found.end());
    return found;
}

std::vector<std::string> expand_all(const std::vector<std::string>& patterns,
                                    const char* dir_extension) {
    std::vector<std::string> out;
    for (const auto& pattern : patterns) {
        auto expanded = expand_pattern(pattern, dir_extension);
        out.insert(out.end(), expanded.begin(), expanded.end());
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<const char*> c_view(const std::vector<std::string>& strings) {
    std::vector<const char*> view;
    view.reserve(strings.size());
    for (const auto& s : strings) view.push_back(s.c_str());
    return view;
}

int finish(sentinel_status status, char* text) {
    if (status == SENTINEL_OK) {
        if (text != nullptr && *text != '\0') {
            std::fputs(text, stdout);
            size_t len = std::strlen(text);
            if (len == 0 || text[len - 1] != '\n') std::fputc('\n', stdout);
        }
    } else {
        std::fprintf(stderr, "error: %s\n", sentinel_last_error());
    }
    sentinel_string_free(text);
    return static_cast<int>(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wind-farm drivetrain condition monitoring"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("sentinel ") + sentinel_version());

    const char* env_seed = std::getenv("SENTINEL_SEED");

    std::string config_path;
    std::string scenario_path;
    std::string models_dir;
    std::string warnings_path;
    std::string labels_path;
    std::string out_dir;
    std::string format = "text";
    std::vector<std::string> data_patterns;

    auto* train = app.add_subcommand("train", "Fit monitoring models from healthy history");
    train->add_option("--config", config_path, "Farm configuration JSON")->required();
    train->add_option("--data", data_patterns, "Raw measurement CSV file or glob")->required();
    train->add_option("--out", out_dir, "Directory for trained model files")->required();

    auto* monitor = app.add_subcommand("monitor", "Score measurements against trained models");
    monitor->add_option("--models", models_dir, "Model directory or glob")->required();
    monitor->add_option("--data", data_patterns, "Raw measurement CSV file or glob")->required();
    monitor->add_option("--out", out_dir, "Directory for score series and warning logs")
        ->required();

    auto* simulate = app.add_subcommand("simulate", "Generate synthetic farm data");
    simulate->add_option("--config", config_path, "Farm configuration JSON")->required();
    simulate->add_option("--scenario", scenario_path, "Scenario JSON (duration, faults)")
        ->required();
    simulate->add_option("--out", out_dir, "Directory for generated CSVs")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Compare a warning log to ground truth");
    evaluate->add_option("--warnings", warnings_path, "Warning log CSV")->required();
    evaluate->add_option("--labels", labels_path, "Ground-truth label CSV")->required();
    evaluate->add_option("--format", format, "Report format: text or machine")
        ->check(CLI::IsMember({"text", "machine"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        // CLI11's own exit codes vary; map any parse failure onto usage (1),
        // keeping 0 for --help / --version.
        return rc == 0 ? 0 : static_cast<int>(SENTINEL_ERR_USAGE);
    }

    char* text = nullptr;
    if (train->parsed()) {
        auto data = expand_all(data_patterns, ".csv");
        auto data_view = c_view(data);
        sentinel_status status = sentinel_train(config_path.c_str(), data_view.data(),
                                                data_view.size(), out_dir.c_str(), env_seed,
                                                &text);
        return finish(status, text);
    }
    if (monitor->parsed()) {
        auto models = expand_pattern(models_dir, ".json");
        auto data = expand_all(data_patterns, ".csv");
        auto models_view = c_view(models);
        auto data_view = c_view(data);
        sentinel_status status = sentinel_monitor(models_view.data(), models_view.size(),
                                                  data_view.data(), data_view.size(),
                                                  out_dir.c_str(), &text);
        return finish(status, text);
    }
    if (simulate->parsed()) {
        sentinel_status status = sentinel_simulate(config_path.c_str(), scenario_path.c_str(),
                                                   out_dir.c_str(), env_seed, &text);
        return finish(status, text);
    }
    if (evaluate->parsed()) {
        sentinel_status status = sentinel_evaluate(warnings_path.c_str(), labels_path.c_str(),
                                                   format == "machine" ? 1 : 0, &text);
        return finish(status, text);
    }
    std::fprintf(stderr, "error: no subcommand given\n");
    return static_cast<int>(SENTINEL_ERR_USAGE);
}
