#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace efs {

using Rng = std::mt19937_64;

// Independent generator for (seed, stream); streams are counters such as an
// ensemble-model index, so parallel consumers never share state.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

// Seed for a labelled sub-task, e.g. (fold, purpose); splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels);

// `size` distinct indices from [0, m), sorted ascending.
std::vector<std::size_t> subsample(std::size_t m, std::size_t size, Rng& rng);

// ceil(ratio * m), clamped to [1, m].
std::size_t subsample_size(std::size_t m, double ratio);

} // namespace efs
