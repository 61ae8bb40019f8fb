#pragma once

#include <vector>

#include "crowdrank/types.hpp"

namespace crowdrank {

// Normalized Kendall-tau distance between two complete rankings: discordant
// object pairs / (n(n-1)/2).  Symmetric, 0 iff equal, 1 for a full reversal.
double kendall_complete(const RankResult& a, const RankResult& b);

// Top-k variant: discordant pairs / k^2 under the optimistic convention.
// Case rules over an object pair (x, y):
//   (i)  both objects in both lists       -> discordant iff the orders differ
//   (ii) both objects in exactly one list -> 0
//   (iii) one object in both lists, the other in exactly one -> the absent
//        object counts as ranked below everything in the list it misses;
//        discordant iff the implied orders disagree
//   (iv) the objects split across the two lists -> discordant
//   (v)  neither object listed            -> 0
// Any pair involving an object in neither list contributes 0 as well.
// Disjoint lists reach the maximum k^2/k^2 = 1.
double kendall_topk(const RankResult& a, const RankResult& b);

// Dispatch on RankKind; both arguments must share kind, n, and k.
double rank_distance(const RankResult& a, const RankResult& b);

// Fast paths for tight loops: callers precompute position maps once per
// ranking.  For complete rankings pos[x] is the rank of object x; for top-k
// lists pos[x] is the rank within the list or -1 when absent.
double kendall_complete_pos(const int* pos_a, const int* pos_b, int n);
double kendall_topk_pos(const int* pos_a, const int* pos_b, int n, int k);

inline double kendall_complete_pos(const std::vector<int>& pos_a,
                                   const std::vector<int>& pos_b) {
    return kendall_complete_pos(pos_a.data(), pos_b.data(),
                                static_cast<int>(pos_a.size()));
}
inline double kendall_topk_pos(const std::vector<int>& pos_a,
                               const std::vector<int>& pos_b, int k) {
    return kendall_topk_pos(pos_a.data(), pos_b.data(),
                            static_cast<int>(pos_a.size()), k);
}

// pos[x] = rank of object x (or -1 when absent from a top-k list).
std::vector<int> rank_positions(const RankResult& r);

}  // namespace crowdrank
