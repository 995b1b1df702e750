// Copyright 2026 The racqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "racqp/blocks.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace racqp {

namespace {

IndexVector iota_vector(Index n) {
  IndexVector v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(Errc::cap_exceeded, "count overflows 64 bits");
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i at every step
    const std::uint64_t g = std::gcd(r, i);
    r = checked_mul(r / g, (n - k + i) / (i / g));
  }
  return r;
}

struct DisjointSets {
  explicit DisjointSets(Index n) : parent(iota_vector(n)) {}
  Index find(Index a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  IndexVector parent;
};

}  // namespace

void check_partition(const BlockPartition& partition, Index n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Index total = 0;
  for (const auto& g : partition) {
    require(!g.empty(), Errc::invalid_argument, "partition has an empty group");
    for (Index i : g) {
      require(i >= 0 && i < n, Errc::invalid_argument, "partition index out of range");
      require(!seen[i], Errc::invalid_argument, "partition groups overlap");
      seen[i] = 1;
      ++total;
    }
  }
  require(total == n, Errc::invalid_argument, "partition does not cover every index");
}

BlockPartition contiguous_partition(Index n, Index p) {
  require(p >= 1 && p <= n, Errc::invalid_argument, "need 1 <= p <= n");
  BlockPartition out(static_cast<std::size_t>(p));
  const Index base = n / p;
  const Index extra = n % p;
  Index next = 0;
  for (Index g = 0; g < p; ++g) {
    const Index size = base + (g < extra ? 1 : 0);
    for (Index k = 0; k < size; ++k) out[g].push_back(next++);
  }
  return out;
}

BlockPartition random_partition(Index n, Index p, Rng& rng, const SuperVariableSet* supers) {
  require(n >= 1, Errc::invalid_argument, "n must be positive");
  if (supers == nullptr || supers->groups.empty()) {
    require(p >= 1 && p <= n, Errc::invalid_argument,
            "block count " + std::to_string(p) + " exceeds variable count " + std::to_string(n));
    IndexVector perm = iota_vector(n);
    std::shuffle(perm.begin(), perm.end(), rng);
    BlockPartition out = contiguous_partition(n, p);
    for (auto& g : out) {
      for (auto& i : g) i = perm[i];
      std::sort(g.begin(), g.end());
    }
    return out;
  }

  std::vector<IndexVector> atoms;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (const auto& g : supers->groups) {
    require(!g.empty(), Errc::invalid_argument, "empty super-variable");
    for (Index i : g) {
      require(i >= 0 && i < n, Errc::invalid_argument, "super-variable index out of range");
      require(!used[i], Errc::invalid_argument, "super-variables overlap");
      used[i] = 1;
    }
    atoms.push_back(g);
  }
  for (Index i = 0; i < n; ++i) {
    if (!used[i]) atoms.push_back({i});
  }
  require(p >= 1 && p <= static_cast<Index>(atoms.size()), Errc::invalid_argument,
          "block count " + std::to_string(p) + " exceeds atom count " + std::to_string(atoms.size()));
  std::shuffle(atoms.begin(), atoms.end(), rng);
  BlockPartition out(static_cast<std::size_t>(p));
  for (const auto& atom : atoms) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < out.size(); ++g) {
      if (out[g].size() < out[best].size()) best = g;
    }
    out[best].insert(out[best].end(), atom.begin(), atom.end());
  }
  for (auto& g : out) std::sort(g.begin(), g.end());
  return out;
}

UpdateOrder identity_order(Index p) { return iota_vector(p); }

UpdateOrder random_order(Index p, Rng& rng) {
  UpdateOrder o = iota_vector(p);
  std::shuffle(o.begin(), o.end(), rng);
  return o;
}

std::uint64_t count_partitions(Index n, Index p) {
  require(p >= 1 && n >= p, Errc::invalid_argument, "need 1 <= p <= n");
  require(n % p == 0, Errc::invalid_argument,
          "count is only defined for equal block sizes (p must divide n)");
  const Index s = n / p;
  // the group holding the smallest remaining index picks its s - 1 companions
  std::uint64_t count = 1;
  for (Index k = 0; k < p; ++k) {
    count = checked_mul(count, binomial(static_cast<std::uint64_t>(n - k * s - 1), static_cast<std::uint64_t>(s - 1)));
  }
  return count;
}

std::uint64_t count_update_combinations(Index n, Index p) {
  std::uint64_t c = count_partitions(n, p);
  for (Index k = 2; k <= p; ++k) c = checked_mul(c, static_cast<std::uint64_t>(k));
  return c;
}

std::vector<BlockPartition> enumerate_partitions(Index n, Index p, std::uint64_t cap) {
  const std::uint64_t total = count_partitions(n, p);
  if (total > cap) {
    throw Error(Errc::cap_exceeded, std::to_string(total) + " partitions exceed the enumeration cap " +
                                        std::to_string(cap));
  }
  const Index s = n / p;
  std::vector<BlockPartition> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  BlockPartition current;

  // Recursion over groups; each group starts at the smallest free index.
  auto fill_group = [&](auto&& self_group, auto&& self_next, IndexVector& group, Index from) -> void {
    if (static_cast<Index>(group.size()) == s) {
      current.push_back(group);
      self_next(self_next, self_group);
      current.pop_back();
      return;
    }
    for (Index i = from; i < n; ++i) {
      if (taken[i]) continue;
      taken[i] = 1;
      group.push_back(i);
      self_group(self_group, self_next, group, i + 1);
      group.pop_back();
      taken[i] = 0;
    }
  };
  auto next_group = [&](auto&& self_next, auto&& self_group) -> void {
    Index first = 0;
    while (first < n && taken[first]) ++first;
    if (first == n) {
      out.push_back(current);
      return;
    }
    taken[first] = 1;
    IndexVector group{first};
    self_group(self_group, self_next, group, first + 1);
    taken[first] = 0;
  };
  next_group(next_group, fill_group);
  return out;
}

SuperVariableSet detect_structure(const SparseMatrix& A, Index target_groups) {
  require(target_groups >= 1, Errc::invalid_argument, "target group count must be positive");
  require(A.rows() > 0 && A.cols() > 0, Errc::invalid_argument, "structure detection needs a nonempty matrix");
  const Index m = A.rows();
  const Index n = A.cols();

  std::vector<IndexVector> row_cols(static_cast<std::size_t>(m));
  for (Index j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      if (it.value() != 0.0) row_cols[it.row()].push_back(j);
    }
  }
  std::vector<char> active(static_cast<std::size_t>(m), 0);
  for (Index i = 0; i < m; ++i) active[i] = !row_cols[i].empty();

  // component label per column (-1: touched by no active row)
  auto components = [&](IndexVector& label) {
    DisjointSets ds(n);
    std::vector<char> touched(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < m; ++i) {
      if (!active[i]) continue;
      const auto& cols = row_cols[i];
      for (Index c : cols) {
        touched[c] = 1;
        ds.unite(cols.front(), c);
      }
    }
    label.assign(static_cast<std::size_t>(n), -1);
    IndexVector root_label(static_cast<std::size_t>(n), -1);
    Index count = 0;
    for (Index c = 0; c < n; ++c) {
      if (!touched[c]) continue;
      const Index r = ds.find(c);
      if (root_label[r] < 0) root_label[r] = count++;
      label[c] = root_label[r];
    }
    return count;
  };

  IndexVector label;
  Index count = components(label);
  const Index peel_cap = m / 2;
  Index peeled = 0;
  while (count < 2 && peeled < peel_cap) {
    Index densest = -1;
    for (Index i = 0; i < m; ++i) {
      if (!active[i]) continue;
      if (densest < 0 || row_cols[i].size() > row_cols[densest].size()) {
        densest = i;
      }
    }
    if (densest < 0) break;
    active[densest] = 0;
    ++peeled;
    count = components(label);
  }

  SuperVariableSet out;
  if (count < 2 || target_groups < 2) {
    out.degenerate = true;
    out.shared = iota_vector(n);
    out.coupling_rows = iota_vector(m);
    return out;
  }

  std::vector<IndexVector> comps(static_cast<std::size_t>(count));
  for (Index c = 0; c < n; ++c) {
    if (label[c] >= 0) comps[label[c]].push_back(c);
    else out.shared.push_back(c);
  }
  // largest component first into the lightest bin (ties: lowest index)
  IndexVector order = iota_vector(count);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return comps[a].size() > comps[b].size();
  });
  const Index bins = std::min(count, target_groups);
  std::vector<IndexVector> grouped(static_cast<std::size_t>(bins));
  IndexVector comp_bin(static_cast<std::size_t>(count), 0);
  for (Index k : order) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < grouped.size(); ++b) {
      if (grouped[b].size() < grouped[best].size()) best = b;
    }
    const auto& cols = comps[k];
    grouped[best].insert(grouped[best].end(), cols.begin(), cols.end());
    comp_bin[k] = static_cast<Index>(best);
  }
  for (auto& g : grouped) std::sort(g.begin(), g.end());
  IndexVector bin_order = iota_vector(bins);
  std::sort(bin_order.begin(), bin_order.end(), [&](Index a, Index b) {
    return grouped[a].front() < grouped[b].front();
  });
  IndexVector bin_rank(static_cast<std::size_t>(bins));
  for (Index r = 0; r < bins; ++r) bin_rank[bin_order[r]] = r;
  out.groups.resize(static_cast<std::size_t>(bins));
  out.local_rows.resize(static_cast<std::size_t>(bins));
  for (Index b = 0; b < bins; ++b) out.groups[bin_rank[b]] = grouped[b];
  for (Index i = 0; i < m; ++i) {
    if (!active[i]) {
      out.coupling_rows.push_back(i);
      continue;
    }
    const Index comp = label[row_cols[i].front()];
    const Index b = bin_rank[comp_bin[comp]];
    out.local_rows[b].push_back(i);
  }
  return out;
}

}  // namespace racqp
