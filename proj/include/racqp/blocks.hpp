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

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "racqp/types.hpp"

namespace racqp {

using Rng = std::mt19937_64;

/// p disjoint index groups covering {0, ..., n-1}.
using BlockPartition = std::vector<IndexVector>;
/// Permutation of group positions 0..p-1.
using UpdateOrder = IndexVector;

/// Index groups that stay together in every assembled block, plus the free (shared) indices.
struct SuperVariableSet {
  std::vector<IndexVector> groups;
  IndexVector shared;
  /// Constraint rows local to each group (same length as `groups`; may be empty when supplied by hand).
  std::vector<IndexVector> local_rows;
  /// Rows touching more than one group.
  IndexVector coupling_rows;
  /// No usable structure was found; every column is shared.
  bool degenerate = false;
};

/// Uniformly random near-equal partition: shuffle the atoms (super-variables and the remaining
/// singletons), then fill the p groups. Without super-variables group sizes differ by at most one
/// and the first n mod p groups are the larger ones.
BlockPartition random_partition(Index n, Index p, Rng& rng, const SuperVariableSet* supers = nullptr);

UpdateOrder identity_order(Index p);
UpdateOrder random_order(Index p, Rng& rng);

/// Contiguous partition {0..s-1}, {s..2s-1}, ... with the same size rule as random_partition.
BlockPartition contiguous_partition(Index n, Index p);

/// |partitions of n items into p unlabeled groups of size n/p|. Throws when p does not divide n
/// or the count overflows 64 bits.
std::uint64_t count_partitions(Index n, Index p);
/// count_partitions(n, p) * p!.
std::uint64_t count_update_combinations(Index n, Index p);

/// All equal-size partitions in canonical order: groups sorted internally and by first element,
/// partitions in lexicographic order. Throws Error(cap_exceeded) above `cap`.
std::vector<BlockPartition> enumerate_partitions(Index n, Index p, std::uint64_t cap = 10000);

/// Throws unless `partition` is a disjoint cover of {0..n-1} with no empty group.
void check_partition(const BlockPartition& partition, Index n);

/// Row/column graph heuristic for the bordered block form: peel the densest rows into the
/// coupling set until the remaining rows split the columns into several connected components,
/// then merge components into at most `target_groups` groups balanced by column count.
SuperVariableSet detect_structure(const SparseMatrix& A, Index target_groups);

}  // namespace racqp
