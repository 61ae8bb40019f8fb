#include "crowdrank/types.hpp"

#include <numeric>

namespace crowdrank {

ComparisonMatrix::ComparisonMatrix(int n) : n_(n) {
    if (n < 0) throw Error("ComparisonMatrix: negative size");
    counts_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
}

std::size_t ComparisonMatrix::index(int i, int j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
        throw Error("ComparisonMatrix: index out of range");
    if (i == j) throw Error("ComparisonMatrix: diagonal access");
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
}

void ComparisonMatrix::add(int winner, int loser, std::int64_t count) {
    if (count < 0) throw Error("ComparisonMatrix: negative count");
    counts_[index(winner, loser)] += count;
}

std::int64_t ComparisonMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

ComparisonMatrix fold_answers(int n, std::span<const Answer> log) {
    ComparisonMatrix m(n);
    for (const Answer& a : log) {
        if (a.left < 0 || a.left >= n || a.right < 0 || a.right >= n ||
            a.left == a.right)
            throw Error("fold_answers: malformed answer (" +
                        std::to_string(a.left) + " vs " +
                        std::to_string(a.right) + ")");
        m.add(a);
    }
    return m;
}

void RankResult::validate() const {
    if (n <= 0) throw Error("RankResult: n must be positive");
    const int len = k();
    if (kind == RankKind::complete && len != n)
        throw Error("RankResult: complete ranking must list all objects");
    if (kind == RankKind::topk && (len < 1 || len > n))
        throw Error("RankResult: top-k length out of range");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int id : order) {
        if (id < 0 || id >= n) throw Error("RankResult: object id out of range");
        if (seen[static_cast<std::size_t>(id)])
            throw Error("RankResult: duplicate object in ranking");
        seen[static_cast<std::size_t>(id)] = 1;
    }
}

}  // namespace crowdrank
