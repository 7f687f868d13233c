#include "efs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "efs/dataset_io.hpp"
#include "efs/error.hpp"
#include "efs/parallel.hpp"
#include "efs/random.hpp"
#include "efs/ubayfs.hpp"

namespace efs {

namespace {

constexpr std::uint64_t kPrestudyStream = 1;
constexpr std::uint64_t kRentStream = 2;
constexpr std::uint64_t kUbayStream = 3;
constexpr std::uint64_t kAuditStream = 4;

class Fnv {
public:
    void bytes(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ULL;
        }
    }
    void text(const std::string& s)
    {
        bytes(s.data(), s.size());
        bytes("\0", 1);
    }
    [[nodiscard]] std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 14695981039346656037ULL;
};

std::uint64_t fingerprint(const EncodedMatrix& m)
{
    Fnv h;
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
            const double v = m.values(i, j);
            h.bytes(&v, sizeof v);
        }
    }
    for (int t : m.target) h.bytes(&t, sizeof t);
    for (const auto& c : m.columns) h.text(c.name());
    return h.value();
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& X, const std::vector<std::size_t>& cols)
{
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(cols[k]));
    return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[static_cast<Eigen::Index>(rows[k])];
    return out;
}

struct Predictions {
    Eigen::VectorXd linear;
    Eigen::VectorXd knn;
    Eigen::VectorXd coefficients;
};

// OLS and kNN on the selected columns; an empty selection predicts the
// training mean with both models.
Predictions predict_selected(const Eigen::MatrixXd& Xtr, const Eigen::VectorXd& ytr, const Eigen::MatrixXd& Xte,
                             const std::vector<std::size_t>& S, std::size_t k, bool with_knn)
{
    Predictions p;
    if (S.empty()) {
        p.linear = Eigen::VectorXd::Constant(Xte.rows(), ytr.mean());
        p.knn = p.linear;
        return p;
    }
    const auto xs = take_columns(Xtr, S);
    const auto xq = take_columns(Xte, S);
    const auto fit = fit_ols(xs, ytr);
    p.linear = predict(fit.model, xq);
    p.coefficients = fit.model.coefficients;
    if (with_knn) p.knn = knn_regress(xs, ytr, xq, std::min<std::size_t>(k, static_cast<std::size_t>(xs.rows())));
    return p;
}

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt_opt(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string("NA");
}

std::set<std::string> present_names(const std::vector<EncodedColumn>& columns, const std::set<std::string>& names)
{
    std::set<std::string> out;
    for (const auto& c : columns) {
        if (names.count(c.source) != 0) out.insert(c.source);
        if (names.count(c.name()) != 0) out.insert(c.name());
    }
    return out;
}

void check_elevated(const Prepared& prep, const std::set<std::string>& names)
{
    std::set<std::string> seen;
    for (const auto& f : prep.folds) {
        const auto here = present_names(f.pipe.train.columns, names);
        seen.insert(here.begin(), here.end());
    }
    for (const auto& n : names) {
        if (seen.count(n) == 0) fail(ErrorCode::UnknownFeatureName, "unknown elevated feature '" + n + "'");
    }
}

std::optional<std::vector<std::size_t>> fold_elevated(const FoldContext& f, const std::set<std::string>& names)
{
    if (names.empty()) return std::nullopt;
    const auto here = present_names(f.pipe.train.columns, names);
    if (here.empty()) return std::vector<std::size_t>{};
    return elevated_columns(f.pipe.train.columns, here);
}

FoldOutcome evaluate(const FoldContext& f, std::vector<std::size_t> S, const std::set<std::string>& elevated,
                     const HarnessConfig& config)
{
    FoldOutcome out;
    const auto& tr = f.pipe.train;
    const auto& te = f.pipe.test;
    const auto p = predict_selected(tr.values, tr.y(), te.values, S, config.knn_k, true);
    out.y = te.y();
    out.linear = p.linear;
    out.knn = p.knn;
    out.coefficients = p.coefficients;
    out.test_rows = te.row_ids;
    if (te.rows() > 0) {
        out.rmse_linear = rmse(out.y, out.linear);
        out.rmse_knn = rmse(out.y, out.knn);
    } else {
        out.rmse_linear = std::numeric_limits<double>::quiet_NaN();
        out.rmse_knn = out.rmse_linear;
    }
    for (auto j : S) out.names.push_back(tr.columns[j].name());
    if (!S.empty()) {
        out.red = redundancy_rate(tr.values, S).value;
        if (const auto el = fold_elevated(f, elevated)) out.perc = perc(S, *el);
    }
    out.selected = std::move(S);
    return out;
}

Dataset perturb_rows(const Dataset& ds, const std::vector<std::size_t>& rows, std::uint64_t seed)
{
    auto rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> shift(5.0, 50.0);
    std::vector<Cell> cells = ds.cells();
    std::vector<Survival> target = ds.target();
    for (auto i : rows) {
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            auto& c = cells[i * ds.cols() + j];
            const auto& f = ds.feature(j);
            if (f.categorical()) {
                const auto n = f.levels.size();
                c = is_missing(c) ? Level{0} : Level{(std::get<Level>(c).index + 1) % n};
            } else {
                c = is_missing(c) ? shift(rng) : -3.0 * std::get<double>(c) + shift(rng);
            }
        }
        target[i] = {target[i].os_months + shift(rng), false};
    }
    Dataset out(ds.features(), std::move(cells), std::move(target));
    out.target_name = ds.target_name;
    out.censor_name = ds.censor_name;
    return out;
}

// Compares the fitted state of `a` (rows `train` of the full data) with `b`,
// whose row r corresponds to map[r] in `a`'s indexing.
void compare_fits(const PipelineResult& a, const PipelineResult& b, const std::vector<std::size_t>& map,
                  const std::vector<bool>& is_train, const std::string& what, std::vector<std::string>& violations)
{
    auto flag = [&](const std::string& msg) { violations.push_back(what + ": " + msg); };
    if (!(a.params == b.params)) flag("transform parameters differ");
    std::vector<std::string> da;
    std::vector<std::string> db;
    for (const auto& d : a.dropped_columns) da.push_back(d.name + "/" + d.reason);
    for (const auto& d : b.dropped_columns) db.push_back(d.name + "/" + d.reason);
    if (da != db) flag("column audit differs");
    if (!(a.train.columns == b.train.columns)) {
        flag("encoded columns differ");
        return;
    }
    std::vector<std::size_t> ids;
    for (auto r : b.train.row_ids) ids.push_back(map[r]);
    if (ids != a.train.row_ids) flag("training rows differ");
    else if (a.train.values != b.train.values || a.train.target != b.train.target) flag("training matrix differs");
    if (fingerprint(a.train) != fingerprint(b.train)) flag("solver input fingerprint differs");

    std::vector<std::string> ia;
    std::vector<std::string> ib;
    auto describe = [](std::size_t row, const ImputedCell& c, const std::vector<std::size_t>& donors) {
        std::string s = fmt::format("{}:{}:", row, c.column);
        for (auto d : donors) s += std::to_string(d) + ",";
        if (const auto* v = std::get_if<double>(&c.value)) s += format_double(*v);
        else if (const auto* l = std::get_if<Level>(&c.value)) s += "L" + std::to_string(l->index);
        return s;
    };
    for (const auto& c : a.imputation.cells) {
        if (is_train[c.row]) ia.push_back(describe(c.row, c, c.donors));
    }
    for (const auto& c : b.imputation.cells) {
        const auto row = map[c.row];
        if (!is_train[row]) continue;
        std::vector<std::size_t> donors;
        for (auto d : c.donors) donors.push_back(map[d]);
        ib.push_back(describe(row, c, donors));
    }
    if (ia != ib) flag("imputation of training rows differs");
}

std::vector<std::string> audit_fold(const Dataset& data, const std::vector<std::size_t>& train, const FoldContext& ctx,
                                    const HarnessConfig& config)
{
    std::vector<std::string> violations;
    const auto label = fmt::format("fold {}", ctx.fold + 1);
    std::vector<bool> is_train(data.rows(), false);
    for (auto i : train) is_train[i] = true;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!is_train[i]) test.push_back(i);
    }

    for (const auto& c : ctx.pipe.imputation.cells) {
        for (auto d : c.donors) {
            if (!is_train[d]) violations.push_back(fmt::format("{}: row {} imputed from test row {}", label, c.row, d));
        }
    }

    std::vector<std::size_t> identity(data.rows());
    std::iota(identity.begin(), identity.end(), 0);
    const auto perturbed = perturb_rows(data, test, derive_seed(config.seed, {ctx.fold, kAuditStream}));
    const auto pb = run_pipeline(perturbed, train, config.preprocess);
    compare_fits(ctx.pipe, pb, identity, is_train, label + " with perturbed test rows", violations);

    const auto reduced = data.select_rows(train);
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), 0);
    const auto pc = run_pipeline(reduced, all, config.preprocess);
    compare_fits(ctx.pipe, pc, train, is_train, label + " with deleted test rows", violations);
    return violations;
}

std::string grid_label(double v) { return format_double(v); }

} // namespace

std::vector<std::size_t> FoldPlan::rows_in(std::size_t fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::rows_not_in(std::size_t fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::sizes() const
{
    std::vector<std::size_t> out(K, 0);
    for (auto a : assignment) ++out[a];
    return out;
}

FoldPlan make_folds(std::size_t m, std::size_t K, std::uint64_t seed)
{
    if (K < 2) fail(ErrorCode::InvalidArgument, "at least 2 folds required");
    if (m < K) fail(ErrorCode::InvalidArgument, fmt::format("{} rows cannot fill {} folds", m, K));
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, 0);
    for (std::size_t i = m; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    FoldPlan plan{K, std::vector<std::size_t>(m, 0), seed};
    std::size_t pos = 0;
    for (std::size_t f = 0; f < K; ++f) {
        const auto size = m / K + (f < m % K ? 1 : 0);
        for (std::size_t r = 0; r < size; ++r) plan.assignment[order[pos++]] = f;
    }
    return plan;
}

std::vector<double> GridSpec::steps(int n)
{
    std::vector<double> out;
    for (int k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) / static_cast<double>(n));
    return out;
}

void GridSpec::check() const
{
    if (C.empty() || l1_ratio.empty() || tau1.empty() || tau2.empty()) fail(ErrorCode::InvalidConfig, "grid must not be empty");
    for (double c : C) {
        if (!(c > 0.0)) fail(ErrorCode::InvalidConfig, "grid C values must be positive");
    }
    for (double l : l1_ratio) {
        if (!(l >= 0.0 && l <= 1.0)) fail(ErrorCode::InvalidConfig, "grid l1 ratios must lie in [0, 1]");
    }
    for (const auto* taus : {&tau1, &tau2}) {
        for (double t : *taus) {
            if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::InvalidConfig, "grid tau values must lie in [0, 1]");
        }
    }
    if (tau3 && !(*tau3 > 0.5 && *tau3 < 1.0)) fail(ErrorCode::InvalidConfig, "tau3 must lie in (0.5, 1)");
}

void HarnessConfig::check() const
{
    preprocess.check();
    grid.check();
    if (folds < 3) fail(ErrorCode::InvalidConfig, "at least 3 folds are needed for the nested split");
    if (models == 0) fail(ErrorCode::InvalidConfig, "models must be positive");
    if (!(split_ratio > 0.0 && split_ratio <= 1.0)) fail(ErrorCode::InvalidConfig, "split ratio must lie in (0, 1]");
    if (knn_k == 0) fail(ErrorCode::InvalidConfig, "knn k must be positive");
    if (max_s_values.empty()) fail(ErrorCode::InvalidConfig, "max_s list must not be empty");
    for (auto s : max_s_values) {
        if (s == 0) fail(ErrorCode::InvalidConfig, "max_s must be at least 1");
    }
    if (exp2_max_s == 0) fail(ErrorCode::InvalidConfig, "max_s must be at least 1");
    for (double w : w_values) {
        if (!(w > 0.0)) fail(ErrorCode::InvalidConfig, "prior weights must be positive");
    }
    if (!(outlier_threshold > 0.0)) fail(ErrorCode::InvalidConfig, "outlier threshold must be positive");
    if (jobs == 0) fail(ErrorCode::InvalidConfig, "jobs must be at least 1");
}

ResidualReport residual_report(const VectorRef& y, const VectorRef& y_hat, double threshold)
{
    if (y.size() != y_hat.size()) fail(ErrorCode::LengthMismatch, "residuals need equal lengths");
    ResidualReport out;
    out.residuals = y - y_hat;
    for (Eigen::Index i = 0; i < out.residuals.size(); ++i) {
        if (std::abs(out.residuals[i]) > threshold) out.outliers.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

Prepared prepare(const Dataset& ds, const HarnessConfig& config)
{
    config.check();
    Prepared prep;
    const auto keep = rows_to_keep(ds, config.preprocess.block_row_threshold);
    std::vector<bool> kept(ds.rows(), false);
    for (auto i : keep) kept[i] = true;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (!kept[i]) prep.dropped_rows.push_back(i);
    }
    if (keep.empty()) fail(ErrorCode::AllRowsDropped, "every row exceeds the block missingness threshold");
    prep.data = ds.select_rows(keep);
    prep.plan = make_folds(prep.data.rows(), config.folds, config.seed);
    prep.folds.resize(config.folds);
    prep.leakage_audited = config.audit_leakage;

    std::vector<std::vector<std::string>> violations(config.folds);
    parallel_for(config.folds, config.jobs, [&](std::size_t f) {
        const auto train = prep.plan.rows_not_in(f);
        auto& ctx = prep.folds[f];
        ctx.fold = f;
        ctx.pipe = run_pipeline(prep.data, train, config.preprocess);
        for (auto id : ctx.pipe.train.row_ids) {
            const auto a = prep.plan.assignment[id];
            ctx.inner_fold.push_back(a < f ? a : a - 1);
        }
        ctx.train_fingerprint = fingerprint(ctx.pipe.train);
        if (config.audit_leakage) violations[f] = audit_fold(prep.data, train, ctx, config);
    });
    for (auto& v : violations) prep.leakage_violations.insert(prep.leakage_violations.end(), v.begin(), v.end());

    std::set<std::string> seen;
    for (const auto& f : prep.folds) {
        for (const auto& c : f.pipe.train.columns) {
            if (seen.insert(c.name()).second) prep.universe.push_back(c.name());
        }
    }
    return prep;
}

const PrestudyChoice& PrestudyResult::at(std::size_t fold, std::size_t max_s) const
{
    for (const auto& c : choices) {
        if (c.fold == fold && c.max_s == max_s) return c;
    }
    fail(ErrorCode::InvalidArgument, fmt::format("no prestudy result for fold {} and max_s {}", fold + 1, max_s));
}

PrestudyResult prestudy_grid_search(const Prepared& prep, const HarnessConfig& config,
                                    const std::vector<std::size_t>& max_s_values)
{
    config.check();
    const auto& grid = config.grid;
    const auto K = prep.folds.size();
    const auto I = K - 1;
    const auto CL = grid.C.size() * grid.l1_ratio.size();

    struct Split {
        Eigen::MatrixXd Xtr, Xva;
        Eigen::VectorXd ytr, yva;
    };
    std::vector<Split> splits(K * I);
    for (std::size_t f = 0; f < K; ++f) {
        const auto& tr = prep.folds[f].pipe.train;
        const auto y = tr.y();
        for (std::size_t i = 0; i < I; ++i) {
            std::vector<std::size_t> fit_rows;
            std::vector<std::size_t> val_rows;
            for (std::size_t r = 0; r < tr.rows(); ++r) {
                (prep.folds[f].inner_fold[r] == i ? val_rows : fit_rows).push_back(r);
            }
            auto& s = splits[f * I + i];
            s.Xtr = take_rows(tr.values, fit_rows);
            s.Xva = take_rows(tr.values, val_rows);
            s.ytr = take(y, fit_rows);
            s.yva = take(y, val_rows);
        }
    }

    std::vector<RentDiagnostics> diags(K * CL * I);
    parallel_for(diags.size(), config.jobs, [&](std::size_t u) {
        const auto f = u / (CL * I);
        const auto c = (u / I) % CL;
        const auto i = u % I;
        RentConfig rc;
        rc.models = config.models;
        rc.split_ratio = config.split_ratio;
        rc.net.C = grid.C[c / grid.l1_ratio.size()];
        rc.net.l1_ratio = grid.l1_ratio[c % grid.l1_ratio.size()];
        rc.tau1 = 0.0;
        rc.tau2 = 0.0;
        rc.tau3 = grid.tau3;
        rc.seed = derive_seed(config.seed, {f, i, kPrestudyStream});
        rc.jobs = 1;
        const auto& s = splits[f * I + i];
        auto d = rent_train(s.Xtr, s.ytr, rc);
        d.weights.resize(0, 0);
        diags[u] = std::move(d);
    });

    PrestudyResult result;
    result.choices.resize(K * max_s_values.size());
    parallel_for(result.choices.size(), config.jobs, [&](std::size_t u) {
        const auto f = u / max_s_values.size();
        const auto max_s = max_s_values[u % max_s_values.size()];
        std::vector<std::map<std::vector<std::size_t>, double>> cache(I);
        auto inner_rmse = [&](std::size_t i, const std::vector<std::size_t>& S) {
            auto it = cache[i].find(S);
            if (it != cache[i].end()) return it->second;
            const auto& s = splits[f * I + i];
            const auto p = predict_selected(s.Xtr, s.ytr, s.Xva, S, config.knn_k, false);
            const double e = rmse(s.yva, p.linear);
            cache[i].emplace(S, e);
            return e;
        };

        struct Candidate {
            std::size_t c = 0;
            double t1 = 0.0, t2 = 0.0;
            double objective = 0.0, mean_size = 0.0;
            std::size_t max_size = 0;
        };
        std::optional<Candidate> best;
        std::size_t smallest_infeasible = std::numeric_limits<std::size_t>::max();
        std::vector<std::vector<std::size_t>> sets(I);

        auto visit = [&](bool relaxed) {
            for (std::size_t c = 0; c < CL; ++c) {
                for (double t1 : grid.tau1) {
                    for (double t2 : grid.tau2) {
                        std::size_t max_size = 0;
                        double total = 0.0;
                        for (std::size_t i = 0; i < I; ++i) {
                            sets[i] = rent_select(diags[(f * CL + c) * I + i], t1, t2);
                            max_size = std::max(max_size, sets[i].size());
                            total += static_cast<double>(sets[i].size());
                        }
                        if (!relaxed && max_size > max_s) {
                            smallest_infeasible = std::min(smallest_infeasible, max_size);
                            continue;
                        }
                        if (relaxed && max_size != smallest_infeasible) continue;
                        double objective = 0.0;
                        for (std::size_t i = 0; i < I; ++i) objective += inner_rmse(i, sets[i]);
                        Candidate cand{c, t1, t2, objective / static_cast<double>(I), total / static_cast<double>(I),
                                       max_size};
                        if (!best || cand.objective < best->objective ||
                            (cand.objective == best->objective && cand.mean_size < best->mean_size)) {
                            best = cand;
                        }
                    }
                }
            }
        };
        visit(false);
        const bool relaxed = !best;
        if (relaxed) visit(true);

        auto& out = result.choices[u];
        out.fold = f;
        out.max_s = max_s;
        out.C = grid.C[best->c / grid.l1_ratio.size()];
        out.l1_ratio = grid.l1_ratio[best->c % grid.l1_ratio.size()];
        out.tau1 = best->t1;
        out.tau2 = best->t2;
        out.tau3 = grid.tau3;
        out.inner_rmse = best->objective;
        out.mean_size = best->mean_size;
        out.max_size = best->max_size;
        out.relaxed = relaxed;
    });
    return result;
}

std::string SettingReport::label() const
{
    return selector + ":" + parameter + "=" + format_double(value);
}

void summarize(SettingReport& setting, const std::vector<std::string>& universe)
{
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < universe.size(); ++j) index[universe[j]] = j;
    std::vector<std::vector<std::size_t>> sets;
    std::vector<double> reds;
    std::vector<double> percs;
    for (const auto& f : setting.folds) {
        std::vector<std::size_t> s;
        for (const auto& n : f.names) s.push_back(index.at(n));
        sets.push_back(std::move(s));
        if (f.red) reds.push_back(*f.red);
        if (f.perc) percs.push_back(*f.perc);
    }
    setting.stability = sets.size() >= 2 ? stability(sets, universe.size()) : Stability{};
    setting.red = reds.empty() ? std::nullopt : std::optional<double>(mean_of(reds));
    setting.perc = percs.empty() ? std::nullopt : std::optional<double>(mean_of(percs));
}

namespace {

ExperimentReport base_report(const std::string& name, const Prepared& prep, const HarnessConfig& config)
{
    ExperimentReport r;
    r.name = name;
    r.universe = prep.universe;
    r.rows = prep.data.rows();
    r.dropped_rows = prep.dropped_rows;
    r.fold_sizes = prep.plan.sizes();
    for (const auto& f : prep.folds) r.encoded_columns.push_back(f.pipe.train.cols());
    r.leakage_audited = prep.leakage_audited;
    r.leakage_violations = prep.leakage_violations;
    r.outlier_threshold = config.outlier_threshold;
    return r;
}

UBayConfig ubay_config(const HarnessConfig& config, std::size_t fold, std::size_t max_s)
{
    UBayConfig uc;
    uc.models = config.models;
    uc.split_ratio = config.split_ratio;
    uc.max_s = max_s;
    uc.seed = derive_seed(config.seed, {fold, kUbayStream});
    uc.jobs = 1;
    return uc;
}

} // namespace

ExperimentReport run_prestudy(const Prepared& prep, const HarnessConfig& config)
{
    auto report = base_report("prestudy", prep, config);
    report.prestudy = prestudy_grid_search(prep, config, config.max_s_values);
    return report;
}

ExperimentReport run_experiment1(const Prepared& prep, const HarnessConfig& config)
{
    config.check();
    if (!config.elevated.empty()) check_elevated(prep, config.elevated);
    auto report = base_report("exp1", prep, config);
    report.prestudy = prestudy_grid_search(prep, config, config.max_s_values);
    const auto K = prep.folds.size();
    const auto S = config.max_s_values.size();

    // One final RENT fit per fold and distinct (C, l1) among the choices.
    struct RentJob {
        std::size_t fold;
        double C, l1;
        RentDiagnostics diag;
    };
    std::vector<RentJob> rent_jobs;
    for (std::size_t f = 0; f < K; ++f) {
        for (auto s : config.max_s_values) {
            const auto& c = report.prestudy->at(f, s);
            const bool known = std::any_of(rent_jobs.begin(), rent_jobs.end(), [&](const RentJob& j) {
                return j.fold == f && j.C == c.C && j.l1 == c.l1_ratio;
            });
            if (!known) rent_jobs.push_back({f, c.C, c.l1_ratio, {}});
        }
    }
    std::vector<std::vector<std::size_t>> counts(K * S);
    parallel_for(rent_jobs.size() + counts.size(), config.jobs, [&](std::size_t u) {
        if (u < rent_jobs.size()) {
            auto& job = rent_jobs[u];
            const auto& tr = prep.folds[job.fold].pipe.train;
            RentConfig rc;
            rc.models = config.models;
            rc.split_ratio = config.split_ratio;
            rc.net.C = job.C;
            rc.net.l1_ratio = job.l1;
            rc.tau3 = config.grid.tau3;
            rc.seed = derive_seed(config.seed, {job.fold, kRentStream});
            rc.jobs = 1;
            job.diag = rent_train(tr.values, tr.y(), rc);
            return;
        }
        const auto k = u - rent_jobs.size();
        const auto f = k / S;
        const auto& tr = prep.folds[f].pipe.train;
        counts[k] = ubay_counts(tr.values, tr.y(), ubay_config(config, f, config.max_s_values[k % S]));
    });

    for (std::size_t s = 0; s < S; ++s) {
        const auto max_s = config.max_s_values[s];
        SettingReport rent{"rent", "max_s", static_cast<double>(max_s), {}, {}, {}, {}};
        SettingReport ubay{"ubayfs", "max_s", static_cast<double>(max_s), {}, {}, {}, {}};
        rent.folds.resize(K);
        ubay.folds.resize(K);
        parallel_for(K, config.jobs, [&](std::size_t f) {
            const auto& choice = report.prestudy->at(f, max_s);
            const auto job = std::find_if(rent_jobs.begin(), rent_jobs.end(), [&](const RentJob& j) {
                return j.fold == f && j.C == choice.C && j.l1 == choice.l1_ratio;
            });
            rent.folds[f] = evaluate(prep.folds[f], rent_select(job->diag, choice.tau1, choice.tau2), config.elevated, config);
            rent.folds[f].relaxed = choice.relaxed;
            rent.folds[f].skipped_models = job->diag.skipped_models;

            const auto uc = ubay_config(config, f, max_s);
            const auto post = ubay_posterior(counts[f * S + s], config.models, uc);
            ubay.folds[f] = evaluate(prep.folds[f], ubay_select(post, uc), config.elevated, config);
        });
        summarize(rent, report.universe);
        summarize(ubay, report.universe);
        report.settings.push_back(std::move(rent));
        report.settings.push_back(std::move(ubay));
    }
    return report;
}

ExperimentReport run_experiment2(const Prepared& prep, const HarnessConfig& config)
{
    config.check();
    if (config.elevated.empty()) fail(ErrorCode::InvalidConfig, "experiment 2 needs elevated features");
    check_elevated(prep, config.elevated);
    auto report = base_report("exp2", prep, config);
    const auto K = prep.folds.size();

    std::vector<std::vector<std::size_t>> counts(K);
    parallel_for(K, config.jobs, [&](std::size_t f) {
        const auto& tr = prep.folds[f].pipe.train;
        counts[f] = ubay_counts(tr.values, tr.y(), ubay_config(config, f, config.exp2_max_s));
    });

    for (double w : config.w_values) {
        SettingReport setting{"ubayfs", "w", w, {}, {}, {}, {}};
        setting.folds.resize(K);
        parallel_for(K, config.jobs, [&](std::size_t f) {
            const auto& ctx = prep.folds[f];
            const auto names = present_names(ctx.pipe.train.columns, config.elevated);
            const auto uc = set_prior_weights(ubay_config(config, f, config.exp2_max_s), ctx.pipe.train.columns, names, w);
            const auto post = ubay_posterior(counts[f], config.models, uc);
            setting.folds[f] = evaluate(ctx, ubay_select(post, uc), config.elevated, config);
        });
        summarize(setting, report.universe);
        report.settings.push_back(std::move(setting));
    }
    return report;
}

std::string frequency_cell(std::size_t count, Sign sign)
{
    const auto s = to_string(sign);
    return s.empty() ? std::to_string(count) : std::to_string(count) + "(" + s + ")";
}

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
    return out;
}

void write_frequencies(const ExperimentReport& r, const std::filesystem::path& path)
{
    auto out = open_out(path);
    csv::Row header{"feature"};
    for (const auto& s : r.settings) header.push_back(s.label());
    csv::write_row(out, header);
    for (const auto& name : r.universe) {
        csv::Row row{name};
        for (const auto& s : r.settings) {
            std::vector<std::optional<double>> coefs;
            std::size_t count = 0;
            for (const auto& f : s.folds) {
                const auto it = std::find(f.names.begin(), f.names.end(), name);
                if (it == f.names.end()) {
                    coefs.emplace_back();
                } else {
                    ++count;
                    coefs.emplace_back(f.coefficients[it - f.names.begin()]);
                }
            }
            row.push_back(frequency_cell(count, sign_summary(coefs)));
        }
        csv::write_row(out, row);
    }
}

void write_metrics(const ExperimentReport& r, const std::filesystem::path& path)
{
    auto out = open_out(path);
    const auto K = r.fold_sizes.size();
    csv::Row header{"setting", "selector", "parameter", "value"};
    for (const auto* model : {"linear", "knn"}) {
        for (std::size_t f = 0; f < K; ++f) header.push_back(fmt::format("{}_rmse_fold{}", model, f + 1));
        header.push_back(fmt::format("{}_rmse_mean", model));
        header.push_back(fmt::format("{}_rmse_sd", model));
    }
    for (const auto* h : {"stability", "stability_raw", "red", "perc", "mean_size", "relaxed_folds", "skipped_models"}) {
        header.emplace_back(h);
    }
    csv::write_row(out, header);
    for (const auto& s : r.settings) {
        csv::Row row{s.label(), s.selector, s.parameter, format_double(s.value)};
        for (int model = 0; model < 2; ++model) {
            std::vector<double> v;
            for (const auto& f : s.folds) v.push_back(model == 0 ? f.rmse_linear : f.rmse_knn);
            for (double x : v) row.push_back(format_double(x));
            row.push_back(format_double(mean_of(v)));
            row.push_back(format_double(sd_of(v)));
        }
        double size = 0.0;
        std::size_t relaxed = 0;
        std::size_t skipped = 0;
        for (const auto& f : s.folds) {
            size += static_cast<double>(f.selected.size());
            relaxed += f.relaxed ? 1 : 0;
            skipped += f.skipped_models;
        }
        row.push_back(format_double(s.stability.value));
        row.push_back(format_double(s.stability.raw));
        row.push_back(fmt_opt(s.red));
        row.push_back(fmt_opt(s.perc));
        row.push_back(format_double(size / static_cast<double>(s.folds.size())));
        row.push_back(std::to_string(relaxed));
        row.push_back(std::to_string(skipped));
        csv::write_row(out, row);
    }
}

void write_residuals(const ExperimentReport& r, const std::filesystem::path& path)
{
    auto out = open_out(path);
    csv::write_row(out, {"setting", "fold", "row", "model", "true", "predicted", "residual", "outlier"});
    for (const auto& s : r.settings) {
        for (std::size_t f = 0; f < s.folds.size(); ++f) {
            const auto& fo = s.folds[f];
            for (int model = 0; model < 2; ++model) {
                const auto& pred = model == 0 ? fo.linear : fo.knn;
                const auto rep = residual_report(fo.y, pred, r.outlier_threshold);
                std::vector<bool> outlier(fo.test_rows.size(), false);
                for (auto o : rep.outliers) outlier[o] = true;
                for (std::size_t i = 0; i < fo.test_rows.size(); ++i) {
                    const auto e = static_cast<Eigen::Index>(i);
                    csv::write_row(out, {s.label(), std::to_string(f + 1), std::to_string(fo.test_rows[i]),
                                         model == 0 ? "linear" : "knn", format_double(fo.y[e]), format_double(pred[e]),
                                         format_double(rep.residuals[e]), outlier[i] ? "1" : "0"});
                }
            }
        }
    }
}

void write_selections(const ExperimentReport& r, const std::filesystem::path& path)
{
    auto out = open_out(path);
    csv::write_row(out, {"setting", "fold", "feature", "coefficient"});
    for (const auto& s : r.settings) {
        for (std::size_t f = 0; f < s.folds.size(); ++f) {
            const auto& fo = s.folds[f];
            for (std::size_t k = 0; k < fo.names.size(); ++k) {
                csv::write_row(out, {s.label(), std::to_string(f + 1), fo.names[k],
                                     format_double(fo.coefficients[static_cast<Eigen::Index>(k)])});
            }
        }
    }
}

void write_curves(const ExperimentReport& r, const std::filesystem::path& path)
{
    auto out = open_out(path);
    csv::write_row(out, {"selector", "parameter", "value", "metric", "fold", "y"});
    for (const auto& s : r.settings) {
        const auto v = format_double(s.value);
        for (int model = 0; model < 2; ++model) {
            const std::string metric = model == 0 ? "rmse_linear" : "rmse_knn";
            std::vector<double> xs;
            for (std::size_t f = 0; f < s.folds.size(); ++f) {
                const double x = model == 0 ? s.folds[f].rmse_linear : s.folds[f].rmse_knn;
                xs.push_back(x);
                csv::write_row(out, {s.selector, s.parameter, v, metric, std::to_string(f + 1), format_double(x)});
            }
            csv::write_row(out, {s.selector, s.parameter, v, metric, "mean", format_double(mean_of(xs))});
            csv::write_row(out, {s.selector, s.parameter, v, metric, "sd", format_double(sd_of(xs))});
        }
        csv::write_row(out, {s.selector, s.parameter, v, "stability", "all", format_double(s.stability.value)});
        csv::write_row(out, {s.selector, s.parameter, v, "red", "all", fmt_opt(s.red)});
        csv::write_row(out, {s.selector, s.parameter, v, "perc", "all", fmt_opt(s.perc)});
    }
}

void write_prestudy(const PrestudyResult& p, const std::filesystem::path& path)
{
    auto out = open_out(path);
    csv::write_row(out, {"fold", "max_s", "C", "l1_ratio", "tau1", "tau2", "tau3", "inner_rmse", "mean_size",
                         "max_size", "relaxed"});
    for (const auto& c : p.choices) {
        csv::write_row(out, {std::to_string(c.fold + 1), std::to_string(c.max_s), grid_label(c.C), grid_label(c.l1_ratio),
                             grid_label(c.tau1), grid_label(c.tau2), fmt_opt(c.tau3), format_double(c.inner_rmse),
                             format_double(c.mean_size), std::to_string(c.max_size), c.relaxed ? "1" : "0"});
    }
}

void write_summary(const ExperimentReport& r, const std::filesystem::path& path)
{
    YAML::Emitter y;
    y << YAML::BeginMap;
    y << YAML::Key << "experiment" << YAML::Value << r.name;
    y << YAML::Key << "rows" << YAML::Value << r.rows;
    y << YAML::Key << "dropped_rows" << YAML::Value << YAML::Flow << r.dropped_rows;
    y << YAML::Key << "fold_sizes" << YAML::Value << YAML::Flow << r.fold_sizes;
    y << YAML::Key << "encoded_columns" << YAML::Value << YAML::Flow << r.encoded_columns;
    y << YAML::Key << "leakage_audit" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "performed" << YAML::Value << r.leakage_audited;
    y << YAML::Key << "violations" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : r.leakage_violations) y << v;
    y << YAML::EndSeq << YAML::EndMap;
    if (r.prestudy) {
        std::size_t relaxed = 0;
        for (const auto& c : r.prestudy->choices) relaxed += c.relaxed ? 1 : 0;
        y << YAML::Key << "prestudy_relaxed_choices" << YAML::Value << relaxed;
    }
    y << YAML::Key << "settings" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : r.settings) {
        std::vector<double> lin;
        std::vector<double> knn;
        for (const auto& f : s.folds) {
            lin.push_back(f.rmse_linear);
            knn.push_back(f.rmse_knn);
        }
        y << YAML::BeginMap;
        y << YAML::Key << "setting" << YAML::Value << s.label();
        y << YAML::Key << "linear_rmse_mean" << YAML::Value << format_double(mean_of(lin));
        y << YAML::Key << "knn_rmse_mean" << YAML::Value << format_double(mean_of(knn));
        y << YAML::Key << "stability" << YAML::Value << format_double(s.stability.value);
        y << YAML::Key << "red" << YAML::Value << fmt_opt(s.red);
        y << YAML::Key << "perc" << YAML::Value << fmt_opt(s.perc);
        y << YAML::EndMap;
    }
    y << YAML::EndSeq << YAML::EndMap;
    auto out = open_out(path);
    out << y.c_str() << '\n';
}

} // namespace

void write_report(const ExperimentReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    if (!report.settings.empty()) {
        write_frequencies(report, dir / "selection_frequencies.csv");
        write_metrics(report, dir / "metrics.csv");
        write_residuals(report, dir / "residuals.csv");
        write_selections(report, dir / "selections.csv");
        write_curves(report, dir / "curves.csv");
    }
    if (report.prestudy) write_prestudy(*report.prestudy, dir / "prestudy.csv");
    write_summary(report, dir / "summary.yaml");
}

} // namespace efs
