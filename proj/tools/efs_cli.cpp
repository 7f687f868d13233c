#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "efs/config.hpp"
#include "efs/dataset_io.hpp"
#include "efs/error.hpp"
#include "efs/harness.hpp"
#include "efs/synthgen.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;

struct Flags {
    std::string config;
    std::string data;
    std::string metadata;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::size_t> folds;
    std::optional<std::size_t> models;
    std::vector<std::size_t> max_s;
    std::vector<double> w;
    std::vector<std::string> elevated;
    bool audit_leakage = false;
    std::string profile;
    std::optional<std::uint64_t> synth_seed;
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("-c,--config", f.config, "YAML configuration file");
    cmd->add_option("-o,--output", f.output, "Output directory");
}

void add_run(CLI::App* cmd, Flags& f)
{
    add_common(cmd, f);
    cmd->add_option("--data", f.data, "Data CSV");
    cmd->add_option("--metadata", f.metadata, "Metadata YAML sidecar");
    cmd->add_option("--seed", f.seed, "Fold and ensemble seed");
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--folds", f.folds, "Outer folds");
    cmd->add_option("--models", f.models, "Elementary models per ensemble");
    cmd->add_option("--max-s", f.max_s, "max_s values");
    cmd->add_option("--w", f.w, "Prior weight levels");
    cmd->add_option("--elevated", f.elevated, "Prior-elevated feature names");
    cmd->add_flag("--audit-leakage", f.audit_leakage, "Rerun every fold without test rows and compare");
}

efs::RunConfig effective(const Flags& f)
{
    auto cfg = f.config.empty() ? efs::RunConfig{} : efs::load_run_config(f.config);
    auto& h = cfg.harness;
    if (!f.data.empty()) cfg.data = f.data;
    if (!f.metadata.empty()) cfg.metadata = f.metadata;
    if (!f.output.empty()) cfg.output = f.output;
    if (f.seed) h.seed = *f.seed;
    if (f.jobs) h.jobs = *f.jobs;
    if (f.folds) h.folds = *f.folds;
    if (f.models) h.models = *f.models;
    if (!f.max_s.empty()) h.max_s_values = f.max_s;
    if (!f.w.empty()) h.w_values = f.w;
    if (!f.elevated.empty()) h.elevated = {f.elevated.begin(), f.elevated.end()};
    if (f.audit_leakage) h.audit_leakage = true;
    if (!f.profile.empty()) cfg.synth.profile = f.profile;
    if (f.synth_seed) cfg.synth.seed = *f.synth_seed;
    try {
        h.check();
    } catch (const efs::Error& e) {
        efs::fail(efs::ErrorCode::InvalidConfig, e.what());
    }
    return cfg;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) efs::fail(efs::ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
    out << text;
}

efs::Dataset load(const efs::RunConfig& cfg)
{
    if (cfg.data.empty() || cfg.metadata.empty()) {
        efs::fail(efs::ErrorCode::InvalidConfig, "data and metadata paths are required");
    }
    return efs::load_dataset(cfg.data, cfg.metadata);
}

void print_summary(const efs::ExperimentReport& r, const fs::path& dir)
{
    std::cout << fmt::format("{}: {} rows, fold sizes", r.name, r.rows);
    for (auto s : r.fold_sizes) std::cout << ' ' << s;
    std::cout << '\n';
    if (r.prestudy) {
        for (const auto& c : r.prestudy->choices) {
            std::cout << fmt::format("  prestudy fold {} max_s={}: C={} l1={} tau1={} tau2={} inner RMSE {:.4f}{}\n",
                                     c.fold + 1, c.max_s, c.C, c.l1_ratio, c.tau1, c.tau2, c.inner_rmse,
                                     c.relaxed ? " (relaxed)" : "");
        }
    }
    for (const auto& s : r.settings) {
        std::cout << fmt::format("  {:<22}", s.label());
        std::cout << " linear RMSE";
        for (const auto& f : s.folds) std::cout << fmt::format(" {:.3f}", f.rmse_linear);
        std::cout << " | kNN RMSE";
        for (const auto& f : s.folds) std::cout << fmt::format(" {:.3f}", f.rmse_knn);
        std::cout << fmt::format(" | stability {:.3f}", s.stability.value);
        std::cout << (s.red ? fmt::format(" RED {:.3f}", *s.red) : std::string(" RED NA"));
        std::cout << (s.perc ? fmt::format(" PERC {:.3f}", *s.perc) : std::string(" PERC NA")) << '\n';
    }
    if (r.leakage_audited) std::cout << fmt::format("  leakage audit: {} violations\n", r.leakage_violations.size());
    std::cout << "  reports in " << dir.string() << '\n';
}

int cmd_synth(const Flags& f)
{
    const auto cfg = effective(f);
    const auto spec = cfg.synth.resolve();
    const auto ds = efs::generate(spec);
    fs::create_directories(cfg.output);
    efs::save_dataset(ds, cfg.output / "synthetic.csv", cfg.output / "synthetic.yaml");
    std::ofstream truth(cfg.output / "ground_truth.txt", std::ios::binary);
    for (const auto& n : efs::ground_truth(spec)) truth << n << '\n';
    std::cout << fmt::format("wrote {} rows x {} features to {}\n", ds.rows(), ds.cols(), cfg.output.string());
    return 0;
}

int cmd_preprocess(const Flags& f)
{
    const auto cfg = effective(f);
    const auto ds = load(cfg);
    const auto keep = efs::rows_to_keep(ds, cfg.harness.preprocess.block_row_threshold);
    const auto kept = ds.select_rows(keep);
    std::vector<std::size_t> all(kept.rows());
    std::iota(all.begin(), all.end(), 0);
    const auto result = efs::run_pipeline(kept, all, cfg.harness.preprocess);

    const auto dir = cfg.output / "preprocess";
    fs::create_directories(dir);
    std::ofstream out(dir / "encoded.csv", std::ios::binary);
    auto header = result.train.column_names();
    header.insert(header.begin(), "row");
    header.emplace_back("target");
    efs::csv::write_row(out, header);
    for (std::size_t i = 0; i < result.train.rows(); ++i) {
        efs::csv::Row row{std::to_string(keep[result.train.row_ids[i]])};
        for (std::size_t j = 0; j < result.train.cols(); ++j) {
            row.push_back(efs::format_double(result.train.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
        row.push_back(std::to_string(result.train.target[i]));
        efs::csv::write_row(out, row);
    }
    efs::save_transform_params(result.params, dir / "transforms.yaml");
    std::ofstream dropped(dir / "dropped.csv", std::ios::binary);
    efs::csv::write_row(dropped, {"kind", "name", "reason"});
    for (const auto& d : result.dropped_columns) efs::csv::write_row(dropped, {"column", d.name, d.reason});
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) {
            efs::csv::write_row(dropped, {"row", std::to_string(i), "block missingness"});
        }
    }
    write_text(dir / "config_echo.yaml", efs::dump_run_config(cfg));
    std::cout << fmt::format("{} x {} raw -> {} x {} encoded; {} columns and {} rows dropped, {} cells imputed\n",
                             ds.rows(), ds.cols(), result.train.rows(), result.train.cols(),
                             result.dropped_columns.size(), ds.rows() - keep.size(), result.imputation.cells.size());
    for (const auto& w : result.imputation.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int cmd_experiment(const Flags& f, const std::string& which)
{
    const auto cfg = effective(f);
    const auto ds = load(cfg);
    const auto prep = efs::prepare(ds, cfg.harness);
    efs::ExperimentReport report;
    if (which == "prestudy") report = efs::run_prestudy(prep, cfg.harness);
    else if (which == "exp1") report = efs::run_experiment1(prep, cfg.harness);
    else report = efs::run_experiment2(prep, cfg.harness);
    const auto dir = cfg.output / which;
    efs::write_report(report, dir);
    write_text(dir / "config_echo.yaml", efs::dump_run_config(cfg));
    print_summary(report, dir);
    return report.leakage_violations.empty() ? 0 : kRuntimeError;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ensemble feature selection for small mixed-type tabular data"};
    app.require_subcommand(1);
    Flags flags;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    add_common(synth, flags);
    synth->add_option("--profile", flags.profile, "paper, recovery or custom");
    synth->add_option("--seed", flags.synth_seed, "Generator seed");
    auto* pre = app.add_subcommand("preprocess", "Clean, impute, encode and transform the full dataset");
    add_common(pre, flags);
    pre->add_option("--data", flags.data, "Data CSV");
    pre->add_option("--metadata", flags.metadata, "Metadata YAML sidecar");
    auto* prestudy = app.add_subcommand("prestudy", "Nested grid search for RENT");
    add_run(prestudy, flags);
    auto* exp1 = app.add_subcommand("exp1", "RENT and UBayFS over the max_s list");
    add_run(exp1, flags);
    auto* exp2 = app.add_subcommand("exp2", "UBayFS over the prior weight list");
    add_run(exp2, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (synth->parsed()) return cmd_synth(flags);
        if (pre->parsed()) return cmd_preprocess(flags);
        if (prestudy->parsed()) return cmd_experiment(flags, "prestudy");
        if (exp1->parsed()) return cmd_experiment(flags, "exp1");
        return cmd_experiment(flags, "exp2");
    } catch (const efs::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == efs::ErrorCode::InvalidConfig ? kConfigError : kRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
