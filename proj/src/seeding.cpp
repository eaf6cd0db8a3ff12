#include "cellres/seeding.hpp"

#include <cmath>
#include <numbers>

namespace cellres {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, Stream stream) noexcept
{
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    return mix64(h ^ index);
}

double hashed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept
{
    std::uint64_t h = mix64(seed ^ mix64(a));
    h = mix64(h ^ mix64(b + 0x632be59bd9b4e019ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double hashed_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept
{
    const double u1 = 1.0 - hashed_uniform(seed, a, b); // (0, 1]
    const double u2 = hashed_uniform(mix64(seed), a, b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace cellres
