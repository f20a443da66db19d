#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace rmf {

// Stream tags. Every random quantity in the toolkit is drawn from a stream
// whose seed is derive_seed(master, {tag, index...}), so streams are
// independent by construction and reproducible from one master seed.
namespace stream {
inline constexpr std::uint64_t kV = 1;
inline constexpr std::uint64_t kW = 2;
inline constexpr std::uint64_t kU = 3;
inline constexpr std::uint64_t kVHistory = 4;
inline constexpr std::uint64_t kWHistory = 5;
inline constexpr std::uint64_t kUHistory = 6;
inline constexpr std::uint64_t kXiStationary = 7;
inline constexpr std::uint64_t kReplication = 8;
inline constexpr std::uint64_t kTruth = 9;
inline constexpr std::uint64_t kFilter = 10;
inline constexpr std::uint64_t kParticleV = 11;
inline constexpr std::uint64_t kParticleW = 12;
inline constexpr std::uint64_t kParticleXiHistory = 13;
inline constexpr std::uint64_t kPrior = 14;
inline constexpr std::uint64_t kEnvironment = 15;
inline constexpr std::uint64_t kSharedXi = 16;
inline constexpr std::uint64_t kProbe = 17;
} // namespace stream

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(master);
    for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

// Standard-normal source bound to one stream.
class GaussianStream {
public:
    GaussianStream() : GaussianStream(0) {}
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() { return normal_(engine_); }

    // out[i] = scale * N(0,1)
    void fill(std::span<double> out, double scale = 1.0) {
        for (auto& v : out) v = scale * normal_(engine_);
    }

    double uniform01() {
        return std::generate_canonical<double, 53>(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

} // namespace rmf
