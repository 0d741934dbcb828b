#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace cfdr {

using Engine = std::mt19937_64;

// Splittable seed stream. A stream is a 64-bit key; `derive` hashes the key
// together with child labels so that every (run, purpose, input, subset)
// gets its own engine no matter which thread or in which order it is used.
//
// Derivation used throughout the toolkit:
//   root(seed)
//     .derive("run", r)                      one per benchmark run
//       .derive("data"|"model"|"betas"|...)  instance construction
//       .derive("irt"|"osft", sided)         one procedure invocation
//         .derive(input).derive(subset)      one (input, subset) pair; its
//                                            engine yields the centering draw
//                                            (if any) then the null draws.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    RngStream derive(std::uint64_t label) const { return RngStream(Key{mix(key_ + 0x9e3779b97f4a7c15ULL * (label + 1))}); }
    RngStream derive(std::string_view label) const { return derive(hash(label)); }
    RngStream derive(std::string_view label, std::uint64_t index) const { return derive(label).derive(index); }

    Engine engine() const { return Engine(key_); }
    std::uint64_t key() const { return key_; }

private:
    struct Key {
        std::uint64_t value;
    };
    explicit RngStream(Key k) : key_(k.value) {}

    // SplitMix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // FNV-1a; labels are short literals.
    static std::uint64_t hash(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t key_;
};

}  // namespace cfdr
