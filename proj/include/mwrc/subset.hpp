#pragma once

// Subsets of the user set {1..L} are bit masks: bit i-1 set <=> user i is in
// the subset. Mask 0 is the empty set; full_mask(L) covers everyone.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace mwrc {

using SubsetMask = std::uint32_t;

inline int subset_size(SubsetMask s) { return std::popcount(s); }

inline SubsetMask full_mask(int L) { return (SubsetMask{1} << L) - 1u; }

inline SubsetMask singleton(int user) { return SubsetMask{1} << (user - 1); }

inline bool contains(SubsetMask s, int user) {
  return (s >> (user - 1)) & 1u;
}

inline std::vector<int> subset_members(SubsetMask s) {
  std::vector<int> out;
  for (int i = 1; s; ++i, s >>= 1)
    if (s & 1u) out.push_back(i);
  return out;
}

inline std::string subset_to_string(SubsetMask s) {
  std::string out = "{";
  bool first = true;
  for (int i : subset_members(s)) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

}  // namespace mwrc
