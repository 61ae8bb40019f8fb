#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdrank {

// Base class for all library errors.  ConfigError marks problems with user
// input (bad config values, malformed files) as opposed to internal misuse.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Which side of a pairwise comparison the worker picked.
enum class Side : std::uint8_t { left, right };

// One crowd answer: worker saw (left, right) and picked a winner.
struct Answer {
    int left = 0;
    int right = 0;
    Side winner = Side::left;
    std::string worker;

    int winner_object() const { return winner == Side::left ? left : right; }
    int loser_object() const { return winner == Side::left ? right : left; }
};

using AnswerLog = std::vector<Answer>;

// Dense n x n win-count matrix: at(i, j) = number of answers where i beat j.
// The diagonal stays zero.
class ComparisonMatrix {
public:
    ComparisonMatrix() = default;
    explicit ComparisonMatrix(int n);

    int n() const { return n_; }

    std::int64_t at(int i, int j) const { return counts_[index(i, j)]; }
    void add(int winner, int loser, std::int64_t count = 1);
    void add(const Answer& a) { add(a.winner_object(), a.loser_object()); }

    // Total answers recorded for the unordered pair {i, j}.
    std::int64_t pair_total(int i, int j) const { return at(i, j) + at(j, i); }
    std::int64_t total() const;

    bool operator==(const ComparisonMatrix& other) const = default;

private:
    std::size_t index(int i, int j) const;

    int n_ = 0;
    std::vector<std::int64_t> counts_;
};

// Folds a log (or any view of one, e.g. a batch prefix) into win counts.
// Malformed answers (out-of-range ids, left == right) are rejected.
ComparisonMatrix fold_answers(int n, std::span<const Answer> log);

enum class RankKind : std::uint8_t { complete, topk };

// An inferred ranking.  order lists object ids best first; complete rankings
// hold all n objects, top-k results hold exactly k of them.
struct RankResult {
    RankKind kind = RankKind::complete;
    int n = 0;
    std::vector<int> order;

    int k() const { return static_cast<int>(order.size()); }

    // Throws Error if order is not a valid (partial) permutation of 0..n-1
    // or the size disagrees with kind.
    void validate() const;
};

using ScoreVector = std::vector<double>;

// What the rank process is asked to produce.
struct Query {
    RankKind kind = RankKind::complete;
    int k = 0;  // meaningful only for top-k
};

}  // namespace crowdrank
