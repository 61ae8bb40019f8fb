#include "crowdrank/distance.hpp"

namespace crowdrank {

namespace {

void check_comparable(const RankResult& a, const RankResult& b) {
    if (a.kind != b.kind) throw Error("rank distance: mismatched ranking kinds");
    if (a.n != b.n) throw Error("rank distance: mismatched object sets");
    if (a.kind == RankKind::topk && a.k() != b.k())
        throw Error("rank distance: mismatched k");
}

}  // namespace

std::vector<int> rank_positions(const RankResult& r) {
    std::vector<int> pos(static_cast<std::size_t>(r.n), -1);
    for (int i = 0; i < r.k(); ++i) pos[static_cast<std::size_t>(r.order[i])] = i;
    return pos;
}

double kendall_complete_pos(const int* pos_a, const int* pos_b, int n) {
    if (n < 2) return 0.0;
    long long discordant = 0;
    for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
            discordant += (pos_a[x] < pos_a[y]) != (pos_b[x] < pos_b[y]);
        }
    }
    const double pairs = 0.5 * n * (n - 1);
    return static_cast<double>(discordant) / pairs;
}

double kendall_topk_pos(const int* pos_a, const int* pos_b, int n, int k) {
    // Only objects present in at least one list can contribute.
    std::vector<int> members;
    members.reserve(2 * static_cast<std::size_t>(k));
    for (int x = 0; x < n; ++x) {
        if (pos_a[x] >= 0 || pos_b[x] >= 0) members.push_back(x);
    }
    long long discordant = 0;
    for (std::size_t u = 0; u < members.size(); ++u) {
        for (std::size_t v = u + 1; v < members.size(); ++v) {
            const int x = members[u], y = members[v];
            const int ax = pos_a[x], ay = pos_a[y];
            const int bx = pos_b[x], by = pos_b[y];
            const bool in_a_x = ax >= 0, in_a_y = ay >= 0;
            const bool in_b_x = bx >= 0, in_b_y = by >= 0;
            if (in_a_x && in_a_y && in_b_x && in_b_y) {
                discordant += (ax < ay) != (bx < by);                // (i)
            } else if (in_a_x && in_a_y && !in_b_x && !in_b_y) {
                // (ii): whole pair known only on one side, optimistic 0
            } else if (in_b_x && in_b_y && !in_a_x && !in_a_y) {
                // (ii)
            } else if (in_a_x && !in_a_y && !in_b_x && in_b_y) {
                discordant += 1;                                     // (iv)
            } else if (!in_a_x && in_a_y && in_b_x && !in_b_y) {
                discordant += 1;                                     // (iv)
            } else if (in_a_x && in_b_x && (in_a_y || in_b_y)) {
                // (iii): x in both lists, y in exactly one.
                if (in_a_y) discordant += ay < ax;   // b implies x before y
                else discordant += by < bx;          // a implies x before y
            } else if (in_a_y && in_b_y && (in_a_x || in_b_x)) {
                // (iii) with roles swapped: y in both, x in exactly one.
                if (in_a_x) discordant += ax < ay;
                else discordant += bx < by;
            }
            // Pairs touching an object absent from both lists fall through
            // with contribution 0, same optimistic attitude as (v).
        }
    }
    return static_cast<double>(discordant) / (static_cast<double>(k) * k);
}

double kendall_complete(const RankResult& a, const RankResult& b) {
    check_comparable(a, b);
    if (a.kind != RankKind::complete)
        throw Error("kendall_complete: complete rankings required");
    return kendall_complete_pos(rank_positions(a), rank_positions(b));
}

double kendall_topk(const RankResult& a, const RankResult& b) {
    check_comparable(a, b);
    if (a.kind != RankKind::topk)
        throw Error("kendall_topk: top-k lists required");
    return kendall_topk_pos(rank_positions(a), rank_positions(b), a.k());
}

double rank_distance(const RankResult& a, const RankResult& b) {
    check_comparable(a, b);
    return a.kind == RankKind::complete ? kendall_complete(a, b)
                                        : kendall_topk(a, b);
}

}  // namespace crowdrank
