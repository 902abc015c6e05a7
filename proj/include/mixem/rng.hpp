#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mixem::rng {

// Purpose tags for deriving independent streams from one master seed.
// Every (seed, purpose, index) triple maps to its own generator, so work can
// be scheduled across any number of workers without changing the draws.
enum class Purpose : std::uint64_t {
    data = 1,
    init = 2,
    population_step = 3,
    probe = 4,
    reference = 5,
    trial = 6,
    model = 7,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes path elements into the seed one at a time. Order matters; the result
// is a plain function of (seed, path), independent of global state.
inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = seed;
    for (std::uint64_t part : path) {
        std::uint64_t s = h ^ (part + 0x9e3779b97f4a7c15ULL);
        h = splitmix64(s);
    }
    return h;
}

inline std::uint64_t derive(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0) {
    return derive(seed, {static_cast<std::uint64_t>(purpose), index});
}

inline std::mt19937_64 stream(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0) {
    return std::mt19937_64{derive(seed, purpose, index)};
}

}  // namespace mixem::rng
