#include "efs/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include <Eigen/Core>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "efs/error.hpp"
#include "efs/random.hpp"

namespace efs {

void SynthSpec::check() const
{
    auto bad = [](const std::string& msg) { fail(ErrorCode::InfeasibleSpec, msg); };
    if (m < 2) bad("at least 2 rows required");
    if (features.empty()) bad("at least one feature required");
    std::set<std::string> names;
    for (const auto& f : features) {
        if (f.name.empty()) bad("feature names must not be empty");
        if (!names.insert(f.name).second) bad("duplicate feature '" + f.name + "'");
        if (f.kind == Kind::numeric && f.levels != 0) bad("numeric feature '" + f.name + "' declares levels");
        if (f.kind != Kind::numeric && f.levels < 2) bad("categorical feature '" + f.name + "' needs at least 2 levels");
    }
    for (const auto& b : bait) {
        if (!names.insert(b.name).second) bad("duplicate feature '" + b.name + "'");
        if (b.kind == BaitKind::duplicate) {
            const bool known = std::any_of(features.begin(), features.end(), [&](const SynthFeature& f) { return f.name == b.source; });
            if (!known) bad("duplicate bait '" + b.name + "' copies unknown feature '" + b.source + "'");
        }
    }
    auto known = [&](const std::string& n) {
        return std::any_of(features.begin(), features.end(), [&](const SynthFeature& f) { return f.name == n; });
    };
    for (const auto& p : planted) {
        if (!known(p.feature)) bad("planted feature '" + p.feature + "' is not generated");
        if (!std::isfinite(p.effect)) bad("planted effects must be finite");
    }
    std::set<std::string> clustered;
    for (const auto& c : clusters) {
        if (!(c.correlation >= 0.0 && c.correlation < 1.0)) bad("cluster correlation must lie in [0, 1)");
        for (const auto& n : c.features) {
            if (!known(n)) bad("cluster member '" + n + "' is not generated");
            if (!clustered.insert(n).second) bad("feature '" + n + "' belongs to two clusters");
        }
    }
    std::set<std::string> seen_nulls;
    std::size_t positives = 0;
    for (const auto& n : nulls) {
        const auto f = std::find_if(features.begin(), features.end(), [&](const SynthFeature& x) { return x.name == n.feature; });
        if (f == features.end()) bad("null feature '" + n.feature + "' is not generated");
        if (f->kind != Kind::numeric) bad("null feature '" + n.feature + "' must be numeric");
        if (!seen_nulls.insert(n.feature).second) bad("null feature '" + n.feature + "' listed twice");
        if (clustered.count(n.feature) > 0) bad("null feature '" + n.feature + "' belongs to a cluster");
        const bool planted_too = std::any_of(planted.begin(), planted.end(), [&](const PlantedEffect& p) { return p.feature == n.feature; });
        if (planted_too) bad("null feature '" + n.feature + "' is planted");
        if (n.positives == 0) bad("null feature '" + n.feature + "' needs at least one positive row");
        positives += n.positives;
    }
    if (positives >= m) bad("null features need fewer than m positive rows in total");
    if (!(noise_sd >= 0.0)) bad("noise_sd must be non-negative");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) bad("missing_rate must lie in [0, 1)");
    if (!(bait_missing_rate >= 0.0 && bait_missing_rate < 1.0)) bad("bait_missing_rate must lie in [0, 1)");
    if (!(censor_rate >= 0.0 && censor_rate <= 1.0)) bad("censor_rate must lie in [0, 1]");
    if (planted.empty() && noise_sd == 0.0) bad("target would be constant");
}

namespace {

std::vector<std::string> level_labels(Kind kind, std::size_t levels)
{
    std::vector<std::string> out;
    for (std::size_t l = 0; l < levels; ++l) {
        if (kind == Kind::ordinal) {
            out.push_back(std::to_string(l));
        } else {
            out.push_back(l < 26 ? std::string(1, static_cast<char>('A' + l)) : fmt::format("L{}", l));
        }
    }
    return out;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

} // namespace

Dataset generate(const SynthSpec& spec)
{
    spec.check();
    const auto rows = spec.m + spec.sparse_rows;
    const auto n = spec.features.size();
    auto rng = make_rng(spec.seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < n; ++j) index[spec.features[j].name] = j;
    std::vector<std::optional<std::size_t>> cluster_of(n);
    for (std::size_t g = 0; g < spec.clusters.size(); ++g) {
        for (const auto& name : spec.clusters[g].features) cluster_of[index.at(name)] = g;
    }

    // Latents drawn row by row in a fixed order.
    Eigen::MatrixXd z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    std::vector<double> factor(spec.clusters.size());
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& f : factor) f = gauss(rng);
        for (std::size_t j = 0; j < n; ++j) {
            const double e = gauss(rng);
            double v = e;
            if (cluster_of[j]) {
                const double rho = spec.clusters[*cluster_of[j]].correlation;
                v = std::sqrt(rho) * factor[*cluster_of[j]] + std::sqrt(1.0 - rho) * e;
            }
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }

    std::vector<double> t(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (const auto& p : spec.planted) t[i] += p.effect * z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index.at(p.feature)));
        t[i] += spec.noise_sd * gauss(rng);
    }
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(rows);
    double ss = 0.0;
    for (double v : t) ss += (v - tm) * (v - tm);
    const double tsd = std::sqrt(ss / static_cast<double>(rows - 1));
    std::vector<Survival> target;
    for (std::size_t i = 0; i < rows; ++i) {
        const double s = tsd > 0.0 ? (t[i] - tm) / tsd : 0.0;
        const double os = std::clamp(round3(12.0 * (3.5 + 1.25 * s)), 1.0, 100.0);
        const bool censored = os > 60.0 && unif(rng) < spec.censor_rate;
        target.push_back({os, censored});
    }

    std::vector<FeatureMeta> meta;
    for (const auto& f : spec.features) meta.push_back({f.name, f.block, f.kind, level_labels(f.kind, f.levels)});
    const boost::math::normal normal;
    std::vector<Cell> base(rows * n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& f = spec.features[j];
        std::vector<double> cuts;
        for (std::size_t l = 1; l < f.levels; ++l) {
            cuts.push_back(boost::math::quantile(normal, static_cast<double>(l) / static_cast<double>(f.levels)));
        }
        for (std::size_t i = 0; i < rows; ++i) {
            const double v = z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            Cell c;
            if (f.kind == Kind::numeric) {
                c = f.skewed ? round3(10.0 * std::exp(0.6 * v)) : round3(50.0 + 10.0 * v);
            } else {
                c = Level{static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin())};
            }
            base[i * n + j] = c;
        }
    }
    if (!spec.nulls.empty()) {
        std::vector<std::size_t> order(spec.m);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> sorted(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(spec.m));
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(spec.m / 2), sorted.end());
        const double median = sorted[spec.m / 2];
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(t[a] - median) < std::abs(t[b] - median);
        });
        std::size_t next = 0; // each null feature takes its own rows
        for (const auto& nf : spec.nulls) {
            const auto j = index.at(nf.feature);
            for (std::size_t i = 0; i < rows; ++i) base[i * n + j] = 0.0;
            for (std::size_t r = 0; r < nf.positives; ++r) base[order[next++] * n + j] = 1.0;
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const bool null_col = std::any_of(spec.nulls.begin(), spec.nulls.end(), [&](const NullIndicator& x) { return index.at(x.feature) == j; });
            if (!null_col && unif(rng) < spec.missing_rate) base[i * n + j] = Missing{};
        }
    }

    // Bait columns, appended after the regular features.
    const auto width = n + spec.bait.size();
    std::vector<Cell> cells(rows * width);
    for (std::size_t i = 0; i < rows; ++i) {
        std::copy_n(base.begin() + static_cast<std::ptrdiff_t>(i * n), n, cells.begin() + static_cast<std::ptrdiff_t>(i * width));
    }
    for (std::size_t b = 0; b < spec.bait.size(); ++b) {
        const auto& bait = spec.bait[b];
        const auto col = n + b;
        switch (bait.kind) {
        case BaitKind::high_missing:
            meta.push_back({bait.name, bait.block, Kind::numeric, {}});
            for (std::size_t i = 0; i < rows; ++i) {
                const double v = round3(50.0 + 10.0 * gauss(rng));
                cells[i * width + col] = unif(rng) < spec.bait_missing_rate ? Cell{Missing{}} : Cell{v};
            }
            break;
        case BaitKind::constant:
            meta.push_back({bait.name, bait.block, Kind::nominal, level_labels(Kind::nominal, 2)});
            for (std::size_t i = 0; i < rows; ++i) cells[i * width + col] = Level{0};
            break;
        case BaitKind::duplicate: {
            const auto src = index.at(bait.source);
            auto copy = meta[src];
            copy.name = bait.name;
            copy.block = bait.block;
            meta.push_back(copy);
            for (std::size_t i = 0; i < rows; ++i) cells[i * width + col] = cells[i * width + src];
            break;
        }
        }
    }

    if (spec.sparse_rows > 0) {
        std::map<Block, std::vector<std::size_t>> blocks;
        for (std::size_t j = 0; j < width; ++j) blocks[meta[j].block].push_back(j);
        const auto largest = std::max_element(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
            return a.second.size() < b.second.size();
        });
        for (std::size_t i = spec.m; i < rows; ++i) {
            for (auto j : largest->second) {
                if (unif(rng) < 0.9) cells[i * width + j] = Missing{};
            }
        }
    }
    return Dataset(std::move(meta), std::move(cells), std::move(target));
}

std::set<std::string> ground_truth(const SynthSpec& spec)
{
    std::set<std::string> out;
    for (const auto& p : spec.planted) out.insert(p.feature);
    return out;
}

namespace {

class ProfileBuilder {
public:
    void add(std::string name, Block block, Kind kind, std::size_t levels = 0, bool skewed = false)
    {
        spec.features.push_back({std::move(name), block, kind, levels, skewed});
    }
    // Generic features named "<block>_<kind><k>".
    void fill(Block block, Kind kind, std::size_t count, std::size_t levels = 0)
    {
        const auto prefix = to_string(block) + "_" + (kind == Kind::numeric ? "num" : kind == Kind::ordinal ? "ord" : "cat");
        for (std::size_t k = 0; k < count; ++k) {
            const auto name = fmt::format("{}{}", prefix, ++counter[prefix]);
            add(name, block, kind, levels, kind == Kind::numeric && counter[prefix] % 3 == 0);
        }
    }
    void bait(Block block, BaitKind kind, std::size_t count, const std::string& source = {})
    {
        for (std::size_t k = 0; k < count; ++k) {
            const auto name = kind == BaitKind::duplicate ? fmt::format("{}_copy{}", source, k + 1)
                                                          : fmt::format("{}_{}{}", to_string(block),
                                                                        kind == BaitKind::constant ? "const" : "sparse",
                                                                        ++counter[to_string(block) + "bait"]);
            spec.bait.push_back({name, block, kind, source});
        }
    }

    SynthSpec spec;

private:
    std::map<std::string, std::size_t> counter;
};

} // namespace

SynthSpec paper_profile(std::uint64_t seed)
{
    ProfileBuilder b;
    using K = Kind;
    // p: 9 numeric, 21 one-hot (37 columns), 5 ordinal (12 columns)
    b.add("age", Block::p, K::numeric);
    b.fill(Block::p, K::numeric, 8);
    for (const auto* name : {"treatment_intention", "bone_metastasis", "radical_surgery", "metastatic_disease", "tnm_stage4"}) {
        b.add(name, Block::p, K::nominal, 2);
    }
    b.fill(Block::p, K::nominal, 9, 2);
    b.fill(Block::p, K::nominal, 4, 3);
    b.fill(Block::p, K::nominal, 2, 4);
    b.add("institution", Block::p, K::nominal, 10);
    b.add("who_ps", Block::p, K::ordinal, 5);
    b.fill(Block::p, K::ordinal, 4, 3);
    // b: 15 numeric, 3 ordinal (6 columns)
    for (const auto* name : {"crp", "albumin", "platelets", "hemoglobin", "ldh", "wbc", "chromogranin_a"}) {
        b.add(name, Block::b, K::numeric, 0, std::string(name) == "crp" || std::string(name) == "chromogranin_a");
    }
    b.fill(Block::b, K::numeric, 8);
    b.add("alp", Block::b, K::ordinal, 3);
    b.fill(Block::b, K::ordinal, 2, 3);
    // h: 3 numeric, 10 one-hot (18 columns), 2 ordinal (5 columns)
    b.add("ki67", Block::h, K::numeric);
    b.fill(Block::h, K::numeric, 2);
    b.add("morphology", Block::h, K::nominal, 2);
    b.add("stroma", Block::h, K::nominal, 2);
    b.fill(Block::h, K::nominal, 4, 2);
    b.fill(Block::h, K::nominal, 3, 3);
    b.add("primary_site", Block::h, K::nominal, 7);
    b.add("architecture", Block::h, K::ordinal, 4);
    b.fill(Block::h, K::ordinal, 1, 3);
    // i: 12 numeric, 1 one-hot (2 columns)
    for (const auto* name : {"suv_max", "suv_mean", "mtv", "tlg"}) b.add(name, Block::i, K::numeric, 0, true);
    b.fill(Block::i, K::numeric, 8);
    b.fill(Block::i, K::nominal, 1, 3);
    // t: 6 numeric, 5 one-hot (9 columns)
    b.add("progression", Block::t, K::nominal, 2);
    b.add("cis_etoposide", Block::t, K::nominal, 2);
    b.add("temozolomide", Block::t, K::nominal, 2);
    b.add("chemo_line", Block::t, K::nominal, 4);
    b.fill(Block::t, K::nominal, 1, 4);
    b.add("courses", Block::t, K::numeric);
    b.fill(Block::t, K::numeric, 3);
    b.add("severe_toxicity", Block::t, K::numeric);
    b.add("dose_delays", Block::t, K::numeric);

    // 45 columns removed by cleaning: 16 p, 1 b, 6 h, 14 i, 8 t.
    b.bait(Block::p, BaitKind::high_missing, 12);
    b.bait(Block::p, BaitKind::constant, 2);
    b.bait(Block::p, BaitKind::duplicate, 2, "p_num2");
    b.bait(Block::b, BaitKind::high_missing, 1);
    b.bait(Block::h, BaitKind::high_missing, 4);
    b.bait(Block::h, BaitKind::constant, 1);
    b.bait(Block::h, BaitKind::duplicate, 1, "stroma");
    b.bait(Block::i, BaitKind::high_missing, 12);
    b.bait(Block::i, BaitKind::duplicate, 2, "i_num1");
    b.bait(Block::t, BaitKind::high_missing, 7);
    b.bait(Block::t, BaitKind::constant, 1);

    auto spec = std::move(b.spec);
    spec.m = 63;
    spec.sparse_rows = 3;
    // Five prognostic clusters carry 20 elevated columns; the two null
    // indicators are elevated as well but carry nothing. who_ps, progression
    // and p_num1 are informative without prior support.
    const std::vector<std::pair<std::vector<std::string>, double>> prognostic = {
        {{"treatment_intention", "bone_metastasis", "radical_surgery", "metastatic_disease", "tnm_stage4"}, -1.0},
        {{"crp", "albumin", "platelets", "alp"}, -0.8},
        {{"ki67", "morphology", "stroma"}, -1.0},
        {{"suv_max", "suv_mean", "mtv", "tlg"}, -0.8},
        {{"courses", "cis_etoposide", "temozolomide"}, 0.8}};
    for (const auto& [members, effect] : prognostic) {
        for (const auto& f : members) spec.planted.push_back({f, effect / static_cast<double>(members.size())});
        spec.clusters.push_back({members, 0.7});
    }
    spec.planted.insert(spec.planted.end(), {{"who_ps", -0.3}, {"progression", -0.3}, {"p_num1", 0.3}});
    spec.clusters.push_back({{"b_num1", "b_num2", "b_num3"}, 0.6});
    spec.nulls = {{"severe_toxicity", 3}, {"dose_delays", 3}};
    spec.clusters.push_back({{"i_num1", "i_num2", "i_num3", "i_num4"}, 0.7});
    spec.noise_sd = 0.7;
    spec.missing_rate = 0.03;
    spec.seed = seed;
    return spec;
}

std::set<std::string> paper_profile_elevated()
{
    return {"treatment_intention", "bone_metastasis", "radical_surgery", "metastatic_disease", "tnm_stage4",
            "crp", "albumin", "platelets", "alp", "ki67", "morphology", "stroma", "suv_max", "suv_mean", "mtv", "tlg",
            "courses", "cis_etoposide", "temozolomide", "severe_toxicity", "dose_delays"};
}

SynthSpec recovery_profile(std::size_t m, std::size_t features, std::size_t planted, double effect, std::uint64_t seed)
{
    if (planted > features) fail(ErrorCode::InfeasibleSpec, "more planted than generated features");
    ProfileBuilder b;
    const Block blocks[] = {Block::p, Block::b, Block::h, Block::i, Block::t};
    for (std::size_t j = 0; j < features; ++j) {
        const auto block = blocks[j % 5];
        if (j < planted || j % 5 < 3) {
            b.fill(block, Kind::numeric, 1);
        } else if (j % 5 == 3) {
            b.fill(block, Kind::ordinal, 1, 4);
        } else {
            b.fill(block, Kind::nominal, 1, 3);
        }
    }
    auto spec = std::move(b.spec);
    for (std::size_t k = 0; k < planted; ++k) {
        spec.planted.push_back({spec.features[k].name, k % 2 == 0 ? effect : -effect});
    }
    spec.m = m;
    spec.noise_sd = 1.0;
    spec.missing_rate = 0.0;
    spec.seed = seed;
    return spec;
}

} // namespace efs
