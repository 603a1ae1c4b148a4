#include "sentinel/artifact.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

using json = nlohmann::json;

std::string fnv1a_hex(const void* data, std::size_t size) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data, size);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) { return fnv1a_hex(text.data(), text.size()); }

TrainingFingerprint fingerprint_matrix(const SampleMatrix& matrix) {
    TrainingFingerprint fp;
    fp.rows = matrix.rows();
    if (!matrix.timestamps.empty()) {
        fp.start = matrix.timestamps.front();
        fp.end = matrix.timestamps.back();
    }
    std::uint64_t h = 1469598103934665603ull;
    h = fnv1a64(matrix.timestamps.data(), matrix.timestamps.size() * sizeof(Timestamp), h);
    h = fnv1a64(matrix.values.data(), matrix.values.size() * sizeof(double), h);
    h = fnv1a64(matrix.flags.data(), matrix.flags.size() * sizeof(CellFlag), h);
    for (const auto& c : matrix.columns) h = fnv1a64(c.name.data(), c.name.size(), h);
    fp.hash = fnv1a_hex(&h, sizeof(h));
    return fp;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vector_from_json(const json& a, const std::string& ctx) {
    require_data(a.is_array(), ctx + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        require_data(a[i].is_number(), ctx + " must hold numbers");
        v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& a, const std::string& ctx) {
    require_data(a.is_array() && !a.empty(), ctx + " must be a non-empty array of rows");
    const std::size_t cols = a[0].is_array() ? a[0].size() : 0;
    require_data(cols > 0, ctx + " rows must be non-empty arrays");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < a.size(); ++r) {
        require_data(a[r].is_array() && a[r].size() == cols, ctx + " rows must be equal length");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                a[r][c].get<double>();
    }
    return m;
}

template <typename T>
json num_vec_to_json(const std::vector<T>& v) {
    json a = json::array();
    for (const T& x : v) a.push_back(x);
    return a;
}

template <typename T>
std::vector<T> num_vec_from_json(const json& a, const std::string& ctx) {
    require_data(a.is_array(), ctx + " must be an array");
    std::vector<T> v;
    v.reserve(a.size());
    for (const auto& x : a) {
        require_data(x.is_number(), ctx + " must hold numbers");
        v.push_back(x.get<T>());
    }
    return v;
}

std::vector<std::string> str_vec_from_json(const json& a, const std::string& ctx) {
    require_data(a.is_array(), ctx + " must be an array");
    std::vector<std::string> v;
    v.reserve(a.size());
    for (const auto& x : a) {
        require_data(x.is_string(), ctx + " must hold strings");
        v.push_back(x.get<std::string>());
    }
    return v;
}

const json& member(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) throw_data(ctx + ": missing field '" + key + "'");
    return obj.at(key);
}

} // namespace

json artifact_to_json(const ModelArtifact& a) {
    json j;
    j["format_version"] = a.format_version;
    j["kind"] = "sentinel-model";
    j["farm_id"] = a.farm_id;
    j["turbine_id"] = a.turbine_id;
    j["component"] = component_kind_name(a.component);
    j["created_utc"] = a.created_utc;
    j["nominal_power_kw"] = a.nominal_power_kw;
    j["sample_interval_seconds"] = a.sample_interval;
    j["max_interpolation_gap"] = a.max_interpolation_gap;

    json tags = json::array();
    for (const auto& t : a.tags)
        tags.push_back({{"name", t.name}, {"role", tag_role_name(t.role)}});
    j["tags"] = std::move(tags);

    json aux = json::array();
    for (const auto& t : a.aux_tags)
        aux.push_back({{"name", t.name}, {"role", tag_role_name(t.role)}});
    j["aux_tags"] = std::move(aux);

    j["standardizer"] = {{"tags", a.standardizer.tags},
                         {"mean", num_vec_to_json(a.standardizer.mean)},
                         {"stddev", num_vec_to_json(a.standardizer.stddev)}};

    json fits = json::array();
    for (const auto& f : a.seasonal.fits)
        fits.push_back({{"tag", f.tag}, {"intercept", f.intercept}, {"slope", f.slope}});
    j["seasonal"] = {{"ambient_tag", a.seasonal.ambient_tag},
                     {"low_load_threshold", a.seasonal.low_load_threshold},
                     {"reference_ambient", a.seasonal.reference_ambient},
                     {"fits", std::move(fits)}};

    j["power_curve"] = {{"bin_width", a.power_curve.bin_width},
                        {"cut_out", a.power_curve.cut_out},
                        {"nominal_power_kw", a.power_curve.nominal_power_kw},
                        {"min_bin_samples", a.power_curve.min_bin_samples},
                        {"bin_median", num_vec_to_json(a.power_curve.bin_median)},
                        {"bin_spread", num_vec_to_json(a.power_curve.bin_spread)},
                        {"bin_count", num_vec_to_json(a.power_curve.bin_count)}};

    j["mor"] = {{"k", a.mor.k},
                {"dims", a.mor.dims},
                {"c", a.mor.c},
                {"min_cluster_fraction", a.mor.min_cluster_fraction},
                {"n_train", a.mor.n_train},
                {"centroids", num_vec_to_json(a.mor.centroids)},
                {"member_count", num_vec_to_json(a.mor.member_count)},
                {"threshold", num_vec_to_json(a.mor.threshold)}};

    json weights = json::array();
    json biases = json::array();
    for (std::size_t l = 0; l < a.aann.layer_count(); ++l) {
        weights.push_back(matrix_to_json(a.aann.weights[l]));
        biases.push_back(vector_to_json(a.aann.biases[l]));
    }
    j["aann"] = {{"input_dim", a.aann.input_dim},
                 {"hidden_dim", a.aann.hidden_dim},
                 {"bottleneck_dim", a.aann.bottleneck_dim},
                 {"seed", a.aann.seed},
                 {"epochs_run", a.aann.epochs_run},
                 {"final_loss", a.aann.final_loss},
                 {"weights", std::move(weights)},
                 {"biases", std::move(biases)}};

    j["chart"] = {{"mean", vector_to_json(a.chart.mean)},
                  {"inverse_covariance", matrix_to_json(a.chart.inverse_covariance)},
                  {"q1", a.chart.q1},
                  {"q2", a.chart.q2},
                  {"alpha1", a.chart.alpha1},
                  {"alpha2", a.chart.alpha2},
                  {"ridge", a.chart.ridge},
                  {"pi", json::array({a.chart.pi[0], a.chart.pi[1], a.chart.pi[2]})}};

    j["monitor"] = {{"window", a.monitor.window},
                    {"min_window", a.monitor.min_window},
                    {"alpha1", a.monitor.alpha1},
                    {"alpha2", a.monitor.alpha2},
                    {"ridge", a.monitor.ridge},
                    {"warning_thresholds",
                     json::array({a.monitor.warn_t1, a.monitor.warn_t2, a.monitor.warn_t3})},
                    {"persistence", a.monitor.persistence},
                    {"recovery", a.monitor.recovery}};

    j["fingerprint"] = {{"rows", a.fingerprint.rows},
                        {"start", format_iso8601(a.fingerprint.start)},
                        {"end", format_iso8601(a.fingerprint.end)},
                        {"hash", a.fingerprint.hash}};
    j["integrity"] = "";
    return j;
}

ModelArtifact artifact_from_json(const json& raw) {
    require_data(raw.is_object(), "model document root must be an object");
    ModelArtifact a;
    const json& jv = member(raw, "format_version", "model");
    require_data(jv.is_number_integer(), "model: format_version must be an integer");
    a.format_version = jv.get<int>();
    if (a.format_version != kModelFormatVersion)
        throw_data("model format version " + std::to_string(a.format_version) +
                   " is not supported by this build (expected version " +
                   std::to_string(kModelFormatVersion) + ")");

    a.farm_id = member(raw, "farm_id", "model").get<std::string>();
    a.turbine_id = member(raw, "turbine_id", "model").get<std::string>();
    a.component = component_kind_from_name(member(raw, "component", "model").get<std::string>());
    a.created_utc = raw.value("created_utc", "");
    a.nominal_power_kw = member(raw, "nominal_power_kw", "model").get<double>();
    require_data(a.nominal_power_kw > 0.0, "model: nominal_power_kw must be > 0");
    a.sample_interval = raw.value("sample_interval_seconds", 600);
    require_data(a.sample_interval > 0, "model: sample_interval_seconds must be > 0");
    a.max_interpolation_gap = raw.value("max_interpolation_gap", 3);
    require_data(a.max_interpolation_gap >= 0, "model: max_interpolation_gap must be >= 0");

    for (const auto& jt : member(raw, "tags", "model")) {
        TagId t;
        t.name = member(jt, "name", "model tag").get<std::string>();
        t.role = tag_role_from_name(member(jt, "role", "model tag").get<std::string>());
        a.tags.push_back(t);
    }
    require_data(!a.tags.empty(), "model: empty tag list");
    const std::size_t p = a.tags.size();

    if (raw.contains("aux_tags")) {
        for (const auto& jt : raw.at("aux_tags")) {
            TagId t;
            t.name = member(jt, "name", "model aux tag").get<std::string>();
            t.role = tag_role_from_name(member(jt, "role", "model aux tag").get<std::string>());
            a.aux_tags.push_back(t);
        }
    }

    const json& js = member(raw, "standardizer", "model");
    a.standardizer.tags = str_vec_from_json(member(js, "tags", "standardizer"), "standardizer.tags");
    a.standardizer.mean = num_vec_from_json<double>(member(js, "mean", "standardizer"),
                                                    "standardizer.mean");
    a.standardizer.stddev = num_vec_from_json<double>(member(js, "stddev", "standardizer"),
                                                      "standardizer.stddev");
    require_data(a.standardizer.tags.size() == p && a.standardizer.mean.size() == p &&
                     a.standardizer.stddev.size() == p,
                 "model: standardizer width does not match the tag list");
    for (double sd : a.standardizer.stddev)
        require_data(sd > 0.0, "model: standardizer stddev must be > 0");

    const json& jse = member(raw, "seasonal", "model");
    a.seasonal.ambient_tag = member(jse, "ambient_tag", "seasonal").get<std::string>();
    a.seasonal.low_load_threshold = member(jse, "low_load_threshold", "seasonal").get<double>();
    a.seasonal.reference_ambient = member(jse, "reference_ambient", "seasonal").get<double>();
    for (const auto& jf : member(jse, "fits", "seasonal")) {
        SeasonalModel::TagFit f;
        f.tag = member(jf, "tag", "seasonal fit").get<std::string>();
        f.intercept = member(jf, "intercept", "seasonal fit").get<double>();
        f.slope = member(jf, "slope", "seasonal fit").get<double>();
        a.seasonal.fits.push_back(f);
    }

    const json& jp = member(raw, "power_curve", "model");
    a.power_curve.bin_width = member(jp, "bin_width", "power_curve").get<double>();
    a.power_curve.cut_out = member(jp, "cut_out", "power_curve").get<double>();
    a.power_curve.nominal_power_kw = member(jp, "nominal_power_kw", "power_curve").get<double>();
    a.power_curve.min_bin_samples = member(jp, "min_bin_samples", "power_curve").get<int>();
    a.power_curve.bin_median =
        num_vec_from_json<double>(member(jp, "bin_median", "power_curve"), "power_curve.bin_median");
    a.power_curve.bin_spread =
        num_vec_from_json<double>(member(jp, "bin_spread", "power_curve"), "power_curve.bin_spread");
    a.power_curve.bin_count =
        num_vec_from_json<int>(member(jp, "bin_count", "power_curve"), "power_curve.bin_count");
    require_data(a.power_curve.bin_median.size() == a.power_curve.bin_spread.size() &&
                     a.power_curve.bin_median.size() == a.power_curve.bin_count.size(),
                 "model: power curve bin arrays must be equal length");

    const json& jm = member(raw, "mor", "model");
    a.mor.k = member(jm, "k", "mor").get<int>();
    a.mor.dims = member(jm, "dims", "mor").get<std::size_t>();
    a.mor.c = member(jm, "c", "mor").get<double>();
    a.mor.min_cluster_fraction = member(jm, "min_cluster_fraction", "mor").get<double>();
    a.mor.n_train = member(jm, "n_train", "mor").get<std::size_t>();
    a.mor.centroids = num_vec_from_json<double>(member(jm, "centroids", "mor"), "mor.centroids");
    a.mor.member_count =
        num_vec_from_json<int>(member(jm, "member_count", "mor"), "mor.member_count");
    a.mor.threshold = num_vec_from_json<double>(member(jm, "threshold", "mor"), "mor.threshold");
    require_data(a.mor.k >= 1 && a.mor.dims == p, "model: MOR dimensionality mismatch");
    require_data(a.mor.centroids.size() == static_cast<std::size_t>(a.mor.k) * a.mor.dims,
                 "model: MOR centroid array size mismatch");
    require_data(a.mor.member_count.size() == static_cast<std::size_t>(a.mor.k) &&
                     a.mor.threshold.size() == static_cast<std::size_t>(a.mor.k),
                 "model: MOR per-cluster array size mismatch");

    const json& ja = member(raw, "aann", "model");
    a.aann.input_dim = member(ja, "input_dim", "aann").get<std::size_t>();
    a.aann.hidden_dim = member(ja, "hidden_dim", "aann").get<std::size_t>();
    a.aann.bottleneck_dim = member(ja, "bottleneck_dim", "aann").get<std::size_t>();
    a.aann.seed = member(ja, "seed", "aann").get<std::uint64_t>();
    a.aann.epochs_run = member(ja, "epochs_run", "aann").get<std::size_t>();
    a.aann.final_loss = member(ja, "final_loss", "aann").get<double>();
    const json& jw = member(ja, "weights", "aann");
    const json& jb = member(ja, "biases", "aann");
    require_data(jw.is_array() && jb.is_array() && jw.size() == jb.size() && jw.size() == 4,
                 "model: autoencoder must have 4 weight/bias layers");
    for (std::size_t l = 0; l < jw.size(); ++l) {
        a.aann.weights.push_back(matrix_from_json(jw[l], "aann.weights"));
        a.aann.biases.push_back(vector_from_json(jb[l], "aann.biases"));
        require_data(a.aann.weights[l].rows() == a.aann.biases[l].size(),
                     "model: autoencoder layer shape mismatch");
        require_data(a.aann.weights[l].allFinite() && a.aann.biases[l].allFinite(),
                     "model: autoencoder weights must be finite");
    }
    require_data(a.aann.input_dim == p, "model: autoencoder width does not match the tag list");
    require_data(static_cast<std::size_t>(a.aann.weights[0].cols()) == p &&
                     static_cast<std::size_t>(a.aann.weights[3].rows()) == p,
                 "model: autoencoder outer layer shape mismatch");
    require_data(a.aann.bottleneck_dim < p, "model: bottleneck must be narrower than the input");

    const json& jc = member(raw, "chart", "model");
    a.chart.mean = vector_from_json(member(jc, "mean", "chart"), "chart.mean");
    a.chart.inverse_covariance =
        matrix_from_json(member(jc, "inverse_covariance", "chart"), "chart.inverse_covariance");
    a.chart.q1 = member(jc, "q1", "chart").get<double>();
    a.chart.q2 = member(jc, "q2", "chart").get<double>();
    a.chart.alpha1 = member(jc, "alpha1", "chart").get<double>();
    a.chart.alpha2 = member(jc, "alpha2", "chart").get<double>();
    a.chart.ridge = member(jc, "ridge", "chart").get<double>();
    auto pi = num_vec_from_json<double>(member(jc, "pi", "chart"), "chart.pi");
    require_data(pi.size() == 3, "model: chart.pi must have 3 entries");
    a.chart.pi = {pi[0], pi[1], pi[2]};
    require_data(a.chart.dims() == p, "model: chart dimensionality does not match the tag list");
    require_data(a.chart.inverse_covariance.rows() == a.chart.inverse_covariance.cols() &&
                     a.chart.dims() == static_cast<std::size_t>(a.chart.inverse_covariance.rows()),
                 "model: chart inverse covariance shape mismatch");
    require_data(0.0 < a.chart.q1 && a.chart.q1 < a.chart.q2, "model: chart boundaries invalid");

    const json& jmon = member(raw, "monitor", "model");
    a.monitor.window = member(jmon, "window", "monitor").get<int>();
    a.monitor.min_window = member(jmon, "min_window", "monitor").get<int>();
    a.monitor.alpha1 = member(jmon, "alpha1", "monitor").get<double>();
    a.monitor.alpha2 = member(jmon, "alpha2", "monitor").get<double>();
    a.monitor.ridge = member(jmon, "ridge", "monitor").get<double>();
    auto wt = num_vec_from_json<double>(member(jmon, "warning_thresholds", "monitor"),
                                        "monitor.warning_thresholds");
    require_data(wt.size() == 3, "model: monitor.warning_thresholds must have 3 entries");
    a.monitor.warn_t1 = wt[0];
    a.monitor.warn_t2 = wt[1];
    a.monitor.warn_t3 = wt[2];
    a.monitor.persistence = member(jmon, "persistence", "monitor").get<int>();
    a.monitor.recovery = member(jmon, "recovery", "monitor").get<int>();

    const json& jfp = member(raw, "fingerprint", "model");
    a.fingerprint.rows = member(jfp, "rows", "fingerprint").get<std::size_t>();
    a.fingerprint.start = parse_iso8601(member(jfp, "start", "fingerprint").get<std::string>());
    a.fingerprint.end = parse_iso8601(member(jfp, "end", "fingerprint").get<std::string>());
    a.fingerprint.hash = member(jfp, "hash", "fingerprint").get<std::string>();
    require_data(!a.fingerprint.hash.empty(), "model: empty training fingerprint");
    return a;
}

namespace {

std::string canonical_dump(json j) {
    j["created_utc"] = "";
    j["integrity"] = "";
    return j.dump();
}

} // namespace

void save_model(const ModelArtifact& artifact, const std::string& path) {
    json j = artifact_to_json(artifact);
    j["integrity"] = fnv1a_hex(canonical_dump(j));
    write_file_atomic(path, j.dump(2) + "\n");
}

ModelArtifact load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open model file '" + path + "'");
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::parse_error& e) {
        throw_data("model file '" + path + "' is corrupted (not valid JSON): " + e.what());
    }
    const std::string stored = raw.value("integrity", "");
    require_data(!stored.empty(), "model file '" + path + "' has no integrity hash");
    const std::string computed = fnv1a_hex(canonical_dump(raw));
    if (stored != computed)
        throw_data("model file '" + path + "' failed the integrity check (stored " + stored +
                   ", computed " + computed + ")");
    return artifact_from_json(raw);
}

MonitorModels monitor_models(const ModelArtifact& artifact) {
    MonitorModels m;
    m.turbine_id = artifact.turbine_id;
    m.component = artifact.component;
    m.tags = artifact.tags;
    m.nominal_power_kw = artifact.nominal_power_kw;
    m.standardizer = artifact.standardizer;
    m.seasonal = artifact.seasonal;
    m.aann = artifact.aann;
    m.chart = artifact.chart;
    return m;
}

} // namespace sentinel
