#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdrank/rng.hpp"
#include "crowdrank/types.hpp"

namespace crowdrank {

// "CrowdBT" in process names: the active, uncertainty-driven assigner.
enum class AssignmentKind : std::uint8_t { random, greedy, complete, active };

// Ordered microtask batch, most important pair first.  Only Complete may
// repeat a pair within a batch (cyclic padding); Random revisits pairs only
// after every pair reaches the same answer count.
using TaskList = std::vector<std::pair<int, int>>;

// Balance answer counts: every draw picks uniformly among the pairs with the
// current minimum total count, that pair's level rises, and the minimum level
// refills as it equalizes.
TaskList assign_random(const ComparisonMatrix& m, int n_batch, RngStream& rng);

// Rank pairs by the product of scores shifted to s'_i = s_i - min(s) + 1
// (strictly positive, so negative Local scores are safe); ties lexicographic.
TaskList assign_greedy(const ScoreVector& scores, const ComparisonMatrix& m,
                       int n_batch);

// All-pairs clique over the x best objects, x the largest integer with
// x(x-1)/2 <= n_batch (clamped to n); padded cyclically up to n_batch.
TaskList assign_complete(const ScoreVector& scores, int n_batch);

// Uncertainty surrogate: utility(i,j) = Var[Beta(M_ij+1, M_ji+1)] times the
// binary entropy of its mean; prefer contested, little-answered pairs.
TaskList assign_active(const ComparisonMatrix& m, int n_batch);

AssignmentKind parse_assignment(std::string_view name);
std::string_view assignment_name(AssignmentKind kind);

}  // namespace crowdrank
