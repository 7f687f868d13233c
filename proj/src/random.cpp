#include "efs/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "efs/error.hpp"

namespace efs {

Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32U)};
    return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31U);
    };
    std::uint64_t h = mix(seed);
    for (auto l : labels) h = mix(h ^ mix(l));
    return h;
}

std::vector<std::size_t> subsample(std::size_t m, std::size_t size, Rng& rng)
{
    if (size > m) fail(ErrorCode::InvalidArgument, "subsample larger than the population");
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, m - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(size);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::size_t subsample_size(std::size_t m, double ratio)
{
    const auto size = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(m) - 1e-9));
    return std::clamp<std::size_t>(size, 1, m);
}

} // namespace efs
