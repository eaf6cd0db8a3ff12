#pragma once

#include <cstdint>

namespace cellres {

// Labels for independent random streams derived from one scenario seed.
enum class Stream : std::uint64_t {
    users = 1,
    surge = 2,
    los = 3,
    assoc_order = 4,
    failures = 5,
    shadowing = 6,
    coverage = 7,
};

std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based derivation: distinct (seed, index, stream) triples give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, Stream stream) noexcept;

// Uniform in [0, 1) determined only by the arguments.
double hashed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept;

// Standard normal determined only by the arguments (Box-Muller on two hashed uniforms).
double hashed_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept;

} // namespace cellres
