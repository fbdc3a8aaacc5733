#include "rsv/random.h"

#include "rsv/error.h"

namespace rsv {

namespace {

std::uint64_t splitmix64(std::uint64_t state) {
    state += 0x9e3779b97f4a7c15ULL;
    state = (state ^ (state >> 30)) * 0xbf58476d1ce4e5b9ULL;
    state = (state ^ (state >> 27)) * 0x94d049bb133111ebULL;
    return state ^ (state >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ substream);
}

std::size_t Rng::categorical(std::span<const double> row) {
    if (row.empty()) throw Error("cannot sample from an empty row");
    const double u = uniform();
    double cumulative = 0.0;
    std::size_t last = row.size();
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] <= 0.0) continue;
        cumulative += row[i];
        last = i;
        if (u < cumulative) return i;
    }
    if (last == row.size()) throw Error("cannot sample from a row without mass");
    // Rounding left the cumulative sum just below u; the last supported entry absorbs it.
    return last;
}

}  // namespace rsv
