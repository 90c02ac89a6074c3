#pragma once
// Permutation-based isomorphism for small directed graphs.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace semseq::oracle {

using Adjacency = std::vector<std::vector<bool>>;

inline Adjacency from_mask(std::size_t n, std::uint64_t mask, bool loops) {
  Adjacency a(n, std::vector<bool>(n, false));
  std::size_t bit = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v && !loops) continue;
      a[u][v] = (mask >> bit++) & 1;
    }
  }
  return a;
}

inline std::uint64_t to_mask(const Adjacency& a, bool loops) {
  std::uint64_t mask = 0;
  std::size_t bit = 0;
  for (std::size_t u = 0; u < a.size(); ++u) {
    for (std::size_t v = 0; v < a.size(); ++v) {
      if (u == v && !loops) continue;
      if (a[u][v]) mask |= std::uint64_t{1} << bit;
      ++bit;
    }
  }
  return mask;
}

inline Adjacency permute(const Adjacency& a, const std::vector<std::size_t>& p) {
  Adjacency b(a.size(), std::vector<bool>(a.size(), false));
  for (std::size_t u = 0; u < a.size(); ++u) {
    for (std::size_t v = 0; v < a.size(); ++v) b[p[u]][p[v]] = a[u][v];
  }
  return b;
}

inline bool isomorphic(const Adjacency& a, const Adjacency& b) {
  if (a.size() != b.size()) return false;
  std::vector<std::size_t> p(a.size());
  std::iota(p.begin(), p.end(), 0);
  do {
    if (permute(a, p) == b) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

struct OrbitCheck {
  std::size_t graphs = 0;
  std::size_t classes = 0;
  std::size_t keys = 0;
  bool consistent = true;  // equal keys never span two classes
  bool ok() const { return consistent && keys == classes; }
};

// Labels every graph on n nodes with its isomorphism class by walking orbits
// under all node permutations, then compares with the partition induced by
// `key`.
template <class KeyFn>
OrbitCheck check_keys_against_orbits(std::size_t n, bool loops, KeyFn key) {
  const std::size_t bits = loops ? n * n : n * (n - 1);
  const std::uint64_t total = std::uint64_t{1} << bits;
  std::vector<int> cls(total, -1);
  std::vector<std::size_t> perm(n);
  OrbitCheck out;
  out.graphs = total;
  int classes = 0;
  for (std::uint64_t m = 0; m < total; ++m) {
    if (cls[m] >= 0) continue;
    const auto a = from_mask(n, m, loops);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      cls[to_mask(permute(a, perm), loops)] = classes;
    } while (std::next_permutation(perm.begin(), perm.end()));
    ++classes;
  }
  std::map<std::string, int> key_class;
  for (std::uint64_t m = 0; m < total; ++m) {
    auto [it, fresh] = key_class.emplace(key(from_mask(n, m, loops)), cls[m]);
    if (it->second != cls[m]) out.consistent = false;
  }
  out.classes = static_cast<std::size_t>(classes);
  out.keys = key_class.size();
  return out;
}

}  // namespace semseq::oracle
