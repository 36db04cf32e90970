#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace csal {

// Derive an independent RNG seed from a base seed and a stream tag.
// splitmix64 finalizer; collision-free enough for disjoint replicate streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// FNV-1a over bytes; used to fingerprint canonical problem descriptions.
std::uint64_t fnv1a(std::string_view bytes);

std::string hex64(std::uint64_t v);

// Round-trippable, locale-independent decimal rendering for CSV cells.
std::string format_double(double v);

}  // namespace csal
