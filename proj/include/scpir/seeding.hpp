#pragma once

#include <cstdint>

namespace scpir {

// Bijective 64-bit mixer (splitmix64 finalizer). Used to spread structured
// seed material (seed, chunk ids, trial numbers) into independent-looking
// generator seeds; chaining calls keeps distinct inputs distinct.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace scpir
