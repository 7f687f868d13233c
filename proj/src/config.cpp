#include "efs/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "efs/dataset_io.hpp"
#include "efs/error.hpp"

namespace efs {

SynthSpec SynthSettings::resolve() const
{
    if (profile == "paper") return paper_profile(seed);
    if (profile == "recovery") return recovery_profile(m, feature_count, planted_count, effect, seed);
    auto out = spec;
    out.seed = seed;
    return out;
}

namespace {

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void bad(const YAML::Node& n, const std::string& msg) const
    {
        const auto mark = n.Mark();
        if (mark.is_null()) fail(ErrorCode::InvalidConfig, fmt::format("{}: {}", origin_, msg));
        fail(ErrorCode::InvalidConfig, fmt::format("{}:{}:{}: {}", origin_, mark.line + 1, mark.column + 1, msg));
    }

    template <typename T>
    T as(const YAML::Node& n, const char* what) const
    {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            bad(n, fmt::format("expected {}", what));
        }
    }

    double real(const YAML::Node& n) const { return as<double>(n, "a number"); }
    std::size_t count(const YAML::Node& n) const
    {
        const auto v = as<long long>(n, "a non-negative integer");
        if (v < 0) bad(n, "expected a non-negative integer");
        return static_cast<std::size_t>(v);
    }
    std::uint64_t seed(const YAML::Node& n) const { return as<std::uint64_t>(n, "an unsigned integer seed"); }
    std::string text(const YAML::Node& n) const { return as<std::string>(n, "a string"); }
    bool flag(const YAML::Node& n) const { return as<bool>(n, "true or false"); }

    std::vector<double> reals(const YAML::Node& n) const
    {
        if (!n.IsSequence()) bad(n, "expected a list of numbers");
        std::vector<double> out;
        for (const auto& e : n) out.push_back(real(e));
        return out;
    }
    std::vector<std::size_t> counts(const YAML::Node& n) const
    {
        if (!n.IsSequence()) bad(n, "expected a list of integers");
        std::vector<std::size_t> out;
        for (const auto& e : n) out.push_back(count(e));
        return out;
    }

    void map(const YAML::Node& n, std::initializer_list<const char*> allowed) const
    {
        if (!n.IsMap()) bad(n, "expected a mapping");
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& kv : n) {
            const auto key = text(kv.first);
            if (keys.count(key) == 0) bad(kv.first, "unknown key '" + key + "'");
        }
    }

private:
    std::string origin_;
};

Block block_of(const Reader& r, const YAML::Node& n)
{
    const auto b = parse_block(r.text(n));
    if (!b) r.bad(n, "block must be one of p, b, h, i, t");
    return *b;
}

void read_custom(const Reader& r, const YAML::Node& s, SynthSpec& spec)
{
    if (s["m"]) spec.m = r.count(s["m"]);
    if (s["noise_sd"]) spec.noise_sd = r.real(s["noise_sd"]);
    if (s["missing_rate"]) spec.missing_rate = r.real(s["missing_rate"]);
    if (s["bait_missing_rate"]) spec.bait_missing_rate = r.real(s["bait_missing_rate"]);
    if (s["sparse_rows"]) spec.sparse_rows = r.count(s["sparse_rows"]);
    if (s["censor_rate"]) spec.censor_rate = r.real(s["censor_rate"]);
    if (const auto fs = s["features"]) {
        if (!fs.IsSequence()) r.bad(fs, "expected a list of features");
        for (const auto& f : fs) {
            r.map(f, {"name", "block", "kind", "levels", "skewed"});
            SynthFeature sf;
            sf.name = r.text(f["name"]);
            if (f["block"]) sf.block = block_of(r, f["block"]);
            if (f["kind"]) {
                const auto k = parse_kind(r.text(f["kind"]));
                if (!k) r.bad(f["kind"], "kind must be numeric, nominal or ordinal");
                sf.kind = *k;
            }
            if (f["levels"]) sf.levels = r.count(f["levels"]);
            if (f["skewed"]) sf.skewed = r.flag(f["skewed"]);
            spec.features.push_back(sf);
        }
    }
    if (const auto ps = s["planted"]) {
        if (!ps.IsSequence()) r.bad(ps, "expected a list of planted effects");
        for (const auto& p : ps) {
            r.map(p, {"feature", "effect"});
            spec.planted.push_back({r.text(p["feature"]), p["effect"] ? r.real(p["effect"]) : 1.0});
        }
    }
    if (const auto cs = s["clusters"]) {
        if (!cs.IsSequence()) r.bad(cs, "expected a list of clusters");
        for (const auto& c : cs) {
            r.map(c, {"features", "correlation"});
            Cluster cl;
            if (!c["features"] || !c["features"].IsSequence()) r.bad(c, "cluster needs a feature list");
            for (const auto& n : c["features"]) cl.features.push_back(r.text(n));
            if (c["correlation"]) cl.correlation = r.real(c["correlation"]);
            spec.clusters.push_back(cl);
        }
    }
    if (const auto ns = s["nulls"]) {
        if (!ns.IsSequence()) r.bad(ns, "expected a list of null indicators");
        for (const auto& n : ns) {
            r.map(n, {"feature", "positives"});
            spec.nulls.push_back({r.text(n["feature"]), n["positives"] ? r.count(n["positives"]) : std::size_t{3}});
        }
    }
    if (const auto bs = s["bait"]) {
        if (!bs.IsSequence()) r.bad(bs, "expected a list of bait columns");
        for (const auto& b : bs) {
            r.map(b, {"name", "block", "kind", "source"});
            Bait bait;
            bait.name = r.text(b["name"]);
            if (b["block"]) bait.block = block_of(r, b["block"]);
            const auto kind = b["kind"] ? r.text(b["kind"]) : std::string("high_missing");
            if (kind == "high_missing") bait.kind = BaitKind::high_missing;
            else if (kind == "constant") bait.kind = BaitKind::constant;
            else if (kind == "duplicate") bait.kind = BaitKind::duplicate;
            else r.bad(b["kind"], "bait kind must be high_missing, constant or duplicate");
            if (b["source"]) bait.source = r.text(b["source"]);
            spec.bait.push_back(bait);
        }
    }
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin)
{
    const Reader r(origin);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        fail(ErrorCode::InvalidConfig, fmt::format("{}:{}:{}: {}", origin, e.mark.line + 1, e.mark.column + 1, e.msg));
    }
    RunConfig cfg;
    if (root.IsNull()) return cfg;
    r.map(root, {"data", "metadata", "output", "seed", "folds", "jobs", "models", "split_ratio", "knn_k", "preprocess",
                 "grid", "max_s", "exp2_max_s", "w", "elevated", "outlier_threshold", "audit_leakage", "synth"});
    auto& h = cfg.harness;
    if (root["data"]) cfg.data = r.text(root["data"]);
    if (root["metadata"]) cfg.metadata = r.text(root["metadata"]);
    if (root["output"]) cfg.output = r.text(root["output"]);
    if (root["seed"]) h.seed = r.seed(root["seed"]);
    if (root["folds"]) h.folds = r.count(root["folds"]);
    if (root["jobs"]) h.jobs = r.count(root["jobs"]);
    if (root["models"]) h.models = r.count(root["models"]);
    if (root["split_ratio"]) h.split_ratio = r.real(root["split_ratio"]);
    if (root["knn_k"]) h.knn_k = r.count(root["knn_k"]);
    if (const auto p = root["preprocess"]) {
        r.map(p, {"column_missing_threshold", "block_row_threshold", "knn_k"});
        if (p["column_missing_threshold"]) h.preprocess.column_missing_threshold = r.real(p["column_missing_threshold"]);
        if (p["block_row_threshold"]) h.preprocess.block_row_threshold = r.real(p["block_row_threshold"]);
        if (p["knn_k"]) h.preprocess.knn_k = r.count(p["knn_k"]);
    }
    if (const auto g = root["grid"]) {
        r.map(g, {"C", "l1_ratio", "tau1", "tau2", "tau3"});
        if (g["C"]) h.grid.C = r.reals(g["C"]);
        if (g["l1_ratio"]) h.grid.l1_ratio = r.reals(g["l1_ratio"]);
        if (g["tau1"]) h.grid.tau1 = r.reals(g["tau1"]);
        if (g["tau2"]) h.grid.tau2 = r.reals(g["tau2"]);
        if (g["tau3"]) {
            if (g["tau3"].IsNull()) h.grid.tau3.reset();
            else h.grid.tau3 = r.real(g["tau3"]);
        }
    }
    if (root["max_s"]) h.max_s_values = r.counts(root["max_s"]);
    if (root["exp2_max_s"]) h.exp2_max_s = r.count(root["exp2_max_s"]);
    if (root["w"]) h.w_values = r.reals(root["w"]);
    if (const auto e = root["elevated"]) {
        if (!e.IsSequence()) r.bad(e, "expected a list of feature names");
        for (const auto& n : e) h.elevated.insert(r.text(n));
    }
    if (root["outlier_threshold"]) h.outlier_threshold = r.real(root["outlier_threshold"]);
    if (root["audit_leakage"]) h.audit_leakage = r.flag(root["audit_leakage"]);
    if (const auto s = root["synth"]) {
        r.map(s, {"profile", "seed", "m", "feature_count", "planted_count", "effect", "noise_sd", "missing_rate",
                  "bait_missing_rate", "sparse_rows", "censor_rate", "features", "planted", "clusters", "nulls", "bait"});
        auto& st = cfg.synth;
        if (s["profile"]) {
            st.profile = r.text(s["profile"]);
            if (st.profile != "paper" && st.profile != "recovery" && st.profile != "custom") {
                r.bad(s["profile"], "profile must be paper, recovery or custom");
            }
        }
        if (s["seed"]) st.seed = r.seed(s["seed"]);
        if (st.profile == "recovery") {
            if (s["m"]) st.m = r.count(s["m"]);
            if (s["feature_count"]) st.feature_count = r.count(s["feature_count"]);
            if (s["planted_count"]) st.planted_count = r.count(s["planted_count"]);
            if (s["effect"]) st.effect = r.real(s["effect"]);
        } else if (st.profile == "custom") {
            read_custom(r, s, st.spec);
        }
    }
    try {
        h.check();
    } catch (const Error& e) {
        fail(ErrorCode::InvalidConfig, fmt::format("{}: {}", origin, e.what()));
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::InvalidConfig, "cannot read config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.string());
}

std::string dump_run_config(const RunConfig& config)
{
    const auto& h = config.harness;
    auto reals = [](const std::vector<double>& v) {
        std::vector<std::string> out;
        for (double x : v) out.push_back(format_double(x));
        return out;
    };
    YAML::Emitter y;
    y << YAML::BeginMap;
    y << YAML::Key << "data" << YAML::Value << config.data.string();
    y << YAML::Key << "metadata" << YAML::Value << config.metadata.string();
    y << YAML::Key << "seed" << YAML::Value << h.seed;
    y << YAML::Key << "folds" << YAML::Value << h.folds;
    y << YAML::Key << "models" << YAML::Value << h.models;
    y << YAML::Key << "split_ratio" << YAML::Value << format_double(h.split_ratio);
    y << YAML::Key << "knn_k" << YAML::Value << h.knn_k;
    y << YAML::Key << "preprocess" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "column_missing_threshold" << YAML::Value << format_double(h.preprocess.column_missing_threshold);
    y << YAML::Key << "block_row_threshold" << YAML::Value << format_double(h.preprocess.block_row_threshold);
    y << YAML::Key << "knn_k" << YAML::Value << h.preprocess.knn_k;
    y << YAML::EndMap;
    y << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "C" << YAML::Value << YAML::Flow << reals(h.grid.C);
    y << YAML::Key << "l1_ratio" << YAML::Value << YAML::Flow << reals(h.grid.l1_ratio);
    y << YAML::Key << "tau1" << YAML::Value << YAML::Flow << reals(h.grid.tau1);
    y << YAML::Key << "tau2" << YAML::Value << YAML::Flow << reals(h.grid.tau2);
    y << YAML::Key << "tau3" << YAML::Value;
    if (h.grid.tau3) y << format_double(*h.grid.tau3);
    else y << YAML::Null;
    y << YAML::EndMap;
    y << YAML::Key << "max_s" << YAML::Value << YAML::Flow << h.max_s_values;
    y << YAML::Key << "exp2_max_s" << YAML::Value << h.exp2_max_s;
    y << YAML::Key << "w" << YAML::Value << YAML::Flow << reals(h.w_values);
    y << YAML::Key << "elevated" << YAML::Value << YAML::Flow
      << std::vector<std::string>(h.elevated.begin(), h.elevated.end());
    y << YAML::Key << "outlier_threshold" << YAML::Value << format_double(h.outlier_threshold);
    y << YAML::Key << "audit_leakage" << YAML::Value << h.audit_leakage;
    y << YAML::Key << "synth" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "profile" << YAML::Value << config.synth.profile;
    y << YAML::Key << "seed" << YAML::Value << config.synth.seed;
    if (config.synth.profile == "recovery") {
        y << YAML::Key << "m" << YAML::Value << config.synth.m;
        y << YAML::Key << "feature_count" << YAML::Value << config.synth.feature_count;
        y << YAML::Key << "planted_count" << YAML::Value << config.synth.planted_count;
        y << YAML::Key << "effect" << YAML::Value << format_double(config.synth.effect);
    }
    y << YAML::EndMap;
    y << YAML::EndMap;
    return std::string(y.c_str()) + "\n";
}

} // namespace efs
