#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "efs/dataset.hpp"

namespace efs {

struct SynthFeature {
    std::string name;
    Block block = Block::p;
    Kind kind = Kind::numeric;
    std::size_t levels = 0; // categorical only
    bool skewed = false;    // numeric only: log-normal instead of normal
};

// Signed effect of a feature's latent variable on the continuous target.
struct PlantedEffect {
    std::string feature;
    double effect = 1.0;
};

// Members share one latent factor; two numeric members correlate at about
// `correlation`.
struct Cluster {
    std::vector<std::string> features;
    double correlation = 0.5;
};

struct NullIndicator {
    std::string feature;
    std::size_t positives = 3;
};

enum class BaitKind { high_missing, constant, duplicate };

// Extra columns that cleaning is expected to remove.
struct Bait {
    std::string name;
    Block block = Block::p;
    BaitKind kind = BaitKind::high_missing;
    std::string source; // copied feature for duplicates
};

struct SynthSpec {
    std::size_t m = 63;
    std::vector<SynthFeature> features;
    std::vector<PlantedEffect> planted;
    std::vector<Cluster> clusters;
    // Numeric 0/1 features set to 1 on the rows whose target lies closest
    // to the median; neither planted nor clustered.
    std::vector<NullIndicator> nulls;
    double noise_sd = 1.0;
    double missing_rate = 0.05;
    std::vector<Bait> bait;
    double bait_missing_rate = 0.45;
    // Appended rows with most of their largest block missing.
    std::size_t sparse_rows = 0;
    // Share of rows beyond 60 months flagged as censored.
    double censor_rate = 0.5;
    std::uint64_t seed = 0;

    // Throws InfeasibleSpec.
    void check() const;
};

// Latent z_j per feature (shared factor inside clusters), numeric columns
// as affine or log-normal images of z_j, categorical columns by cutting z_j
// at equal-probability normal quantiles. The target t = sum effect * z_j +
// noise is standardized to s and mapped to 12 * (3.5 + 1.25 s) months,
// clipped to [1, 100]. Missing cells are then drawn completely at random.
Dataset generate(const SynthSpec& spec);

// Planted feature names.
std::set<std::string> ground_truth(const SynthSpec& spec);

// 66 x 137 raw table that cleans to 63 x 134 encoded columns with the
// documented block and type profile.
SynthSpec paper_profile(std::uint64_t seed);

// Source features of the paper profile whose encodings give 22 columns.
std::set<std::string> paper_profile_elevated();

// `features` columns spread over the five blocks, mostly numeric with some
// ordinal and nominal ones. The first `planted` are numeric and carry the
// given effect (in units of the noise SD) with alternating signs. No
// missingness.
SynthSpec recovery_profile(std::size_t m, std::size_t features, std::size_t planted, double effect,
                           std::uint64_t seed);

} // namespace efs
