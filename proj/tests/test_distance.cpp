#include <doctest.h>

#include <algorithm>
#include <vector>

#include "crowdrank/distance.hpp"
#include "crowdrank/rng.hpp"

using namespace crowdrank;

namespace {

RankResult complete_of(std::vector<int> order) {
    return RankResult{RankKind::complete, static_cast<int>(order.size()),
                      std::move(order)};
}

RankResult topk_of(int n, std::vector<int> order) {
    return RankResult{RankKind::topk, n, std::move(order)};
}

// Independent inversion counter: positions compared pairwise, no shortcuts.
double brute_force_complete(const RankResult& a, const RankResult& b) {
    int n = a.n;
    std::vector<int> pa(n), pb(n);
    for (int r = 0; r < n; ++r) pa[a.order[r]] = r;
    for (int r = 0; r < n; ++r) pb[b.order[r]] = r;
    int discordant = 0;
    for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
            if ((pa[x] < pa[y]) != (pb[x] < pb[y])) ++discordant;
        }
    }
    if (n < 2) return 0.0;
    return static_cast<double>(discordant) / (0.5 * n * (n - 1));
}

// Independent top-k enumeration, written directly from the optimistic case
// rules rather than reusing any library helper.
double brute_force_topk(const RankResult& a, const RankResult& b) {
    int n = a.n;
    int k = a.k();
    auto pos_in = [](const RankResult& r, int obj) {
        for (int i = 0; i < static_cast<int>(r.order.size()); ++i) {
            if (r.order[i] == obj) return i;
        }
        return -1;
    };
    double discordant = 0;
    for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
            int ax = pos_in(a, x), ay = pos_in(a, y);
            int bx = pos_in(b, x), by = pos_in(b, y);
            bool in_a_x = ax >= 0, in_a_y = ay >= 0;
            bool in_b_x = bx >= 0, in_b_y = by >= 0;
            if (!in_a_x && !in_a_y && !in_b_x && !in_b_y) continue;  // (v)
            if (in_a_x && in_a_y && in_b_x && in_b_y) {              // (i)
                if ((ax < ay) != (bx < by)) discordant += 1;
                continue;
            }
            if ((in_a_x && in_a_y && !in_b_x && !in_b_y) ||
                (!in_a_x && !in_a_y && in_b_x && in_b_y)) {
                continue;  // (ii): both confined to one list, optimistic zero
            }
            bool x_shared = in_a_x && in_b_x;
            bool y_shared = in_a_y && in_b_y;
            if (x_shared || y_shared) {  // (iii): absent side ranks below all
                int eff_ax = in_a_x ? ax : n + 1;
                int eff_ay = in_a_y ? ay : n + 1;
                int eff_bx = in_b_x ? bx : n + 1;
                int eff_by = in_b_y ? by : n + 1;
                if ((eff_ax < eff_ay) != (eff_bx < eff_by)) discordant += 1;
                continue;
            }
            if ((in_a_x && in_b_y) || (in_b_x && in_a_y)) {
                discordant += 1;  // (iv): split across the two lists
            }
            // remaining shapes pair a single present object with one absent
            // from both lists: optimistic zero
        }
    }
    return discordant / (static_cast<double>(k) * k);
}

void all_topk_lists(int n, int k, std::vector<RankResult>& out) {
    std::vector<int> current;
    std::vector<bool> used(n, false);
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(current.size()) == k) {
            out.push_back(topk_of(n, current));
            return;
        }
        for (int obj = 0; obj < n; ++obj) {
            if (used[obj]) continue;
            used[obj] = true;
            current.push_back(obj);
            self(self);
            current.pop_back();
            used[obj] = false;
        }
    };
    rec(rec);
}

}  // namespace

TEST_CASE("complete distance pinned examples") {
    CHECK(kendall_complete(complete_of({0, 1, 2, 3}), complete_of({0, 1, 2, 3})) == 0.0);
    CHECK(kendall_complete(complete_of({0, 1, 2, 3}), complete_of({3, 2, 1, 0})) == 1.0);
    CHECK(kendall_complete(complete_of({0, 1, 2}), complete_of({1, 0, 2})) ==
          doctest::Approx(1.0 / 3.0));
    CHECK(kendall_complete(complete_of({0}), complete_of({0})) == 0.0);
}

TEST_CASE("complete distance matches the brute-force inversion counter") {
    RngStream rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_index(7));  // n in [2, 8]
        std::vector<int> base(n);
        for (int i = 0; i < n; ++i) base[i] = i;
        std::vector<int> oa = base, ob = base;
        rng.shuffle(oa);
        rng.shuffle(ob);
        RankResult a = complete_of(oa), b = complete_of(ob);
        double expected = brute_force_complete(a, b);
        CHECK(kendall_complete(a, b) == expected);
        CHECK(kendall_complete(b, a) == expected);
    }
}

TEST_CASE("top-k distance pinned examples") {
    CHECK(kendall_topk(topk_of(4, {0, 1, 2}), topk_of(4, {0, 1, 2})) == 0.0);
    CHECK(kendall_topk(topk_of(4, {0, 1}), topk_of(4, {2, 3})) == 1.0);
    CHECK(kendall_topk(topk_of(4, {0, 1, 2}), topk_of(4, {0, 2, 3})) ==
          doctest::Approx(2.0 / 9.0));
}

TEST_CASE("top-k distance matches exhaustive case-rule enumeration") {
    for (int n = 2; n <= 6; ++n) {
        for (int k = 1; k <= 3 && k <= n; ++k) {
            std::vector<RankResult> lists;
            all_topk_lists(n, k, lists);
            for (const auto& a : lists) {
                for (const auto& b : lists) {
                    double expected = brute_force_topk(a, b);
                    double got = kendall_topk(a, b);
                    REQUIRE(got == expected);
                    REQUIRE(kendall_topk(b, a) == expected);
                }
            }
        }
    }
}

TEST_CASE("top-k disjointness is monotone under fresh replacements") {
    // Swapping a shared element out for an object absent from both lists can
    // only push the lists further apart.
    for (int n = 3; n <= 6; ++n) {
        for (int k = 1; k <= 3 && k <= n; ++k) {
            std::vector<RankResult> lists;
            all_topk_lists(n, k, lists);
            for (const auto& a : lists) {
                for (const auto& b : lists) {
                    double before = kendall_topk(a, b);
                    for (int slot = 0; slot < k; ++slot) {
                        int shared = b.order[slot];
                        bool in_a = std::find(a.order.begin(), a.order.end(), shared) !=
                                    a.order.end();
                        if (!in_a) continue;
                        for (int fresh = 0; fresh < n; ++fresh) {
                            bool in_either =
                                std::find(a.order.begin(), a.order.end(), fresh) !=
                                    a.order.end() ||
                                std::find(b.order.begin(), b.order.end(), fresh) !=
                                    b.order.end();
                            if (in_either) continue;
                            RankResult mutated = b;
                            mutated.order[slot] = fresh;
                            REQUIRE(kendall_topk(a, mutated) >= before);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("distances reject incomparable inputs") {
    CHECK_THROWS_AS(kendall_complete(complete_of({0, 1}), complete_of({0, 1, 2})),
                    Error);
    CHECK_THROWS_AS(kendall_topk(topk_of(4, {0, 1}), topk_of(4, {0, 1, 2})), Error);
    CHECK_THROWS_AS(rank_distance(complete_of({0, 1}), topk_of(2, {0, 1})), Error);
}

TEST_CASE("rank_distance dispatches on kind") {
    CHECK(rank_distance(complete_of({0, 1, 2}), complete_of({1, 0, 2})) ==
          doctest::Approx(1.0 / 3.0));
    CHECK(rank_distance(topk_of(4, {0, 1}), topk_of(4, {2, 3})) == 1.0);
}
