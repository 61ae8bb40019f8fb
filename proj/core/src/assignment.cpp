#include "crowdrank/assignment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>

namespace crowdrank {

namespace {

long long pair_count(int n) { return static_cast<long long>(n) * (n - 1) / 2; }

void check_batch(const ComparisonMatrix& m, int n_batch, bool allow_repeat) {
    if (n_batch < 1) throw Error("assignment: n_batch must be positive");
    if (m.n() < 2) throw Error("assignment: need at least two objects");
    if (!allow_repeat && n_batch > pair_count(m.n()))
        throw Error("assignment: n_batch exceeds the number of distinct pairs");
}

// Sorts pair indices by descending utility, ties by lexicographic pair.
TaskList top_pairs_by_utility(int n, const std::vector<double>& utility,
                              int n_batch) {
    TaskList pairs;
    pairs.reserve(static_cast<std::size_t>(pair_count(n)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<std::size_t> idx(pairs.size());
    for (std::size_t p = 0; p < idx.size(); ++p) idx[p] = p;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (utility[a] != utility[b]) return utility[a] > utility[b];
        return pairs[a] < pairs[b];
    });
    TaskList out;
    out.reserve(static_cast<std::size_t>(n_batch));
    for (int p = 0; p < n_batch; ++p) out.push_back(pairs[idx[static_cast<std::size_t>(p)]]);
    return out;
}

}  // namespace

TaskList assign_random(const ComparisonMatrix& m, int n_batch, RngStream& rng) {
    check_batch(m, n_batch, true);
    const int n = m.n();
    // Buckets keyed by current total count; draws always come from the lowest.
    std::map<std::int64_t, TaskList> buckets;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            buckets[m.pair_total(i, j)].emplace_back(i, j);
    TaskList out;
    out.reserve(static_cast<std::size_t>(n_batch));
    while (static_cast<int>(out.size()) < n_batch) {
        auto lowest = buckets.begin();
        TaskList& level = lowest->second;
        const std::size_t pick =
            static_cast<std::size_t>(rng.uniform_index(level.size()));
        const std::pair<int, int> task = level[pick];
        out.push_back(task);
        level[pick] = level.back();
        level.pop_back();
        buckets[lowest->first + 1].push_back(task);
        if (level.empty()) buckets.erase(lowest);
    }
    return out;
}

TaskList assign_greedy(const ScoreVector& scores, const ComparisonMatrix& m,
                       int n_batch) {
    check_batch(m, n_batch, false);
    const int n = m.n();
    if (static_cast<int>(scores.size()) != n)
        throw Error("assign_greedy: score vector size mismatch");
    const double low = *std::min_element(scores.begin(), scores.end());
    std::vector<double> utility;
    utility.reserve(static_cast<std::size_t>(pair_count(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            utility.push_back((scores[static_cast<std::size_t>(i)] - low + 1.0) *
                              (scores[static_cast<std::size_t>(j)] - low + 1.0));
        }
    }
    return top_pairs_by_utility(n, utility, n_batch);
}

TaskList assign_complete(const ScoreVector& scores, int n_batch) {
    if (n_batch < 1) throw Error("assignment: n_batch must be positive");
    const int n = static_cast<int>(scores.size());
    if (n < 2) throw Error("assignment: need at least two objects");
    int x = 2;
    while (pair_count(x + 1) <= n_batch && x < n) ++x;
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    std::sort(ids.begin(), ids.end(), [&scores](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<int> best(ids.begin(), ids.begin() + x);
    std::sort(best.begin(), best.end());
    TaskList clique;
    clique.reserve(static_cast<std::size_t>(pair_count(x)));
    for (int a = 0; a < x; ++a)
        for (int b = a + 1; b < x; ++b)
            clique.emplace_back(best[static_cast<std::size_t>(a)],
                                best[static_cast<std::size_t>(b)]);
    TaskList out;
    out.reserve(static_cast<std::size_t>(n_batch));
    for (int p = 0; static_cast<int>(out.size()) < n_batch; ++p)
        out.push_back(clique[static_cast<std::size_t>(p) % clique.size()]);
    return out;
}

TaskList assign_active(const ComparisonMatrix& m, int n_batch) {
    check_batch(m, n_batch, false);
    const int n = m.n();
    std::vector<double> utility;
    utility.reserve(static_cast<std::size_t>(pair_count(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double a = static_cast<double>(m.at(i, j)) + 1.0;
            const double b = static_cast<double>(m.at(j, i)) + 1.0;
            const double total = a + b;
            const double mean = a / total;
            const double variance = a * b / (total * total * (total + 1.0));
            const double entropy =
                -mean * std::log(mean) - (1.0 - mean) * std::log(1.0 - mean);
            utility.push_back(variance * entropy);
        }
    }
    return top_pairs_by_utility(n, utility, n_batch);
}

AssignmentKind parse_assignment(std::string_view name) {
    std::string lower(name);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "random") return AssignmentKind::random;
    if (lower == "greedy") return AssignmentKind::greedy;
    if (lower == "complete") return AssignmentKind::complete;
    if (lower == "crowdbt" || lower == "active") return AssignmentKind::active;
    throw ConfigError("unknown assignment module: " + std::string(name));
}

std::string_view assignment_name(AssignmentKind kind) {
    switch (kind) {
        case AssignmentKind::random: return "Random";
        case AssignmentKind::greedy: return "Greedy";
        case AssignmentKind::complete: return "Complete";
        case AssignmentKind::active: return "CrowdBT";
    }
    throw Error("assignment_name: invalid kind");
}

}  // namespace crowdrank
