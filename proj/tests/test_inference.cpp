#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "crowdrank/inference.hpp"
#include "crowdrank/rng.hpp"

using namespace crowdrank;

namespace {

ComparisonMatrix random_matrix(int n, RngStream& rng, int max_count = 4) {
    ComparisonMatrix m(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            auto c = rng.uniform_index(static_cast<uint64_t>(max_count) + 1);
            if (c > 0) m.add(i, j, static_cast<long long>(c));
        }
    }
    return m;
}

std::vector<int> naive_order(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

std::vector<double> naive_copeland(const ComparisonMatrix& m) {
    int n = m.n();
    std::vector<double> scores(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            scores[i] += static_cast<double>(m.at(i, j));
            scores[i] -= static_cast<double>(m.at(j, i));
        }
    }
    return scores;
}

std::vector<double> naive_local(const ComparisonMatrix& m) {
    int n = m.n();
    std::vector<std::vector<int>> wins(n), losses(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (m.at(i, j) > m.at(j, i)) {
                wins[i].push_back(j);
                losses[j].push_back(i);
            }
        }
    }
    std::vector<double> scores(n, 0.0);
    for (int i = 0; i < n; ++i) {
        scores[i] = static_cast<double>(wins[i].size()) -
                    static_cast<double>(losses[i].size());
        for (int u : wins[i]) scores[i] += static_cast<double>(wins[u].size());
        for (int u : losses[i]) scores[i] -= static_cast<double>(losses[u].size());
    }
    return scores;
}

// Regularized Bradley-Terry log-likelihood, evaluated from scratch.
double bt_objective(const ComparisonMatrix& m, const ScoreVector& s, double lambda) {
    double obj = 0.0;
    int n = m.n();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || m.at(i, j) == 0) continue;
            double p = 1.0 / (1.0 + std::exp(s[j] - s[i]));
            obj += static_cast<double>(m.at(i, j)) * std::log(p);
        }
        obj -= lambda * s[i] * s[i];
    }
    return obj;
}

}  // namespace

TEST_CASE("copeland pinned examples") {
    ComparisonMatrix zeros(3);
    CHECK(infer_copeland(zeros).order == std::vector<int>{0, 1, 2});

    ComparisonMatrix two(2);
    two.add(0, 1, 3);
    two.add(1, 0, 1);
    CHECK(copeland_scores(two) == ScoreVector{2.0, -2.0});
    CHECK(infer_copeland(two).order == std::vector<int>{0, 1});

    ComparisonMatrix cycle(3);
    cycle.add(0, 1, 2);
    cycle.add(1, 2, 2);
    cycle.add(2, 0, 2);
    CHECK(copeland_scores(cycle) == ScoreVector{0.0, 0.0, 0.0});
    CHECK(infer_copeland(cycle).order == std::vector<int>{0, 1, 2});
}

TEST_CASE("local pinned examples") {
    ComparisonMatrix zeros(4);
    CHECK(infer_local(zeros).order == std::vector<int>{0, 1, 2, 3});

    ComparisonMatrix chain(3);
    chain.add(0, 1);
    chain.add(1, 2);
    CHECK(local_scores(chain) == ScoreVector{2.0, 0.0, -2.0});
    CHECK(infer_local(chain).order == std::vector<int>{0, 1, 2});

    ComparisonMatrix single(3);
    single.add(0, 1);
    CHECK(local_scores(single) == ScoreVector{1.0, -1.0, 0.0});
    CHECK(infer_local(single).order == std::vector<int>{0, 2, 1});
}

TEST_CASE("majority ties produce no edge") {
    ComparisonMatrix tied(2);
    tied.add(0, 1, 3);
    tied.add(1, 0, 3);
    CHECK(local_scores(tied) == ScoreVector{0.0, 0.0});
}

TEST_CASE("copeland and local match naive recomputation on random matrices") {
    RngStream rng(501);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_index(7));
        ComparisonMatrix m = random_matrix(n, rng);
        CHECK(copeland_scores(m) == naive_copeland(m));
        CHECK(infer_copeland(m).order == naive_order(naive_copeland(m)));
        CHECK(local_scores(m) == naive_local(m));
        CHECK(infer_local(m).order == naive_order(naive_local(m)));
    }
}

TEST_CASE("iterative pinned examples") {
    ComparisonMatrix two(2);
    two.add(0, 1, 5);
    RankResult r = infer_iterative(two, 1);
    CHECK(r.kind == RankKind::topk);
    CHECK(r.order == std::vector<int>{0});

    ComparisonMatrix chain(4);
    chain.add(0, 1);
    chain.add(1, 2);
    chain.add(2, 3);
    CHECK(infer_iterative(chain, 2).order == std::vector<int>{0, 1});

    // 8 -> 4 -> 2: the survivors of a fully separated tournament
    ComparisonMatrix tournament(8);
    for (int i = 0; i < 8; ++i) {
        for (int j = i + 1; j < 8; ++j) tournament.add(i, j, 2);
    }
    CHECK(infer_iterative(tournament, 2).order == std::vector<int>{0, 1});

    CHECK_THROWS_AS(infer_iterative(two, 0), Error);
    CHECK_THROWS_AS(infer_iterative(two, 2), Error);
}

TEST_CASE("iterative keeps at least k survivors per round") {
    // n=3, k=2: floor(3/2)=1 discard, straight to 2 survivors.
    ComparisonMatrix m(3);
    m.add(0, 1);
    m.add(1, 2);
    m.add(0, 2);
    CHECK(infer_iterative(m, 2).order == std::vector<int>{0, 1});
}

TEST_CASE("crowdbt pinned examples") {
    ComparisonMatrix zeros(3);
    InferenceResult flat = infer_crowdbt(zeros);
    for (double s : flat.scores) CHECK(s == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(flat.ranking.order == std::vector<int>{0, 1, 2});

    ComparisonMatrix lopsided(2);
    lopsided.add(0, 1, 10);
    InferenceResult lr = infer_crowdbt(lopsided);
    CHECK(lr.scores[0] > lr.scores[1]);
    CHECK(lr.ranking.order == std::vector<int>{0, 1});

    // 3-vs-1 with vanishing regularization recovers the MLE win rate 0.75
    ComparisonMatrix split(2);
    split.add(0, 1, 3);
    split.add(1, 0, 1);
    CrowdBtOptions weak{1e-9, 1e-10, 5000};
    InferenceResult mle = infer_crowdbt(split, weak);
    double p = 1.0 / (1.0 + std::exp(mle.scores[1] - mle.scores[0]));
    CHECK(p == doctest::Approx(0.75).epsilon(1e-3));
}

TEST_CASE("crowdbt finite-difference gradient vanishes at the fit") {
    RngStream rng(777);
    const double lambda = 0.01;
    const double step = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_index(5));
        ComparisonMatrix m = random_matrix(n, rng, 6);
        InferenceResult fit = infer_crowdbt(m);
        for (int i = 0; i < n; ++i) {
            ScoreVector up = fit.scores, down = fit.scores;
            up[i] += step;
            down[i] -= step;
            double grad =
                (bt_objective(m, up, lambda) - bt_objective(m, down, lambda)) /
                (2 * step);
            CHECK(std::abs(grad) < 1e-4);
        }
        double mean = std::accumulate(fit.scores.begin(), fit.scores.end(), 0.0) /
                      static_cast<double>(n);
        CHECK(std::abs(mean) < 1e-6);  // gauge: centered scores
    }
}

TEST_CASE("bt ranking is translation invariant") {
    RngStream rng(901);
    ComparisonMatrix m = random_matrix(5, rng, 5);
    InferenceResult fit = infer_crowdbt(m);
    ScoreVector shifted = fit.scores;
    for (double& s : shifted) s += 3.7;
    CHECK(naive_order(fit.scores) == naive_order(shifted));
}

TEST_CASE("run_inference dispatches and truncates top-k queries") {
    ComparisonMatrix chain(4);
    chain.add(0, 1);
    chain.add(1, 2);
    chain.add(2, 3);

    InferenceResult complete = run_inference(InferenceKind::local, chain, Query{});
    CHECK(complete.ranking.kind == RankKind::complete);
    CHECK(complete.ranking.order.size() == 4);

    Query topk{RankKind::topk, 2};
    InferenceResult truncated = run_inference(InferenceKind::local, chain, topk);
    CHECK(truncated.ranking.kind == RankKind::topk);
    CHECK(truncated.ranking.order ==
          std::vector<int>(complete.ranking.order.begin(),
                           complete.ranking.order.begin() + 2));

    CHECK_THROWS_AS(run_inference(InferenceKind::iterative, chain, Query{}), Error);
    CHECK(run_inference(InferenceKind::iterative, chain, topk).ranking.order ==
          std::vector<int>{0, 1});
}

TEST_CASE("inference names round-trip") {
    for (auto kind : {InferenceKind::copeland, InferenceKind::local,
                      InferenceKind::iterative, InferenceKind::crowdbt}) {
        CHECK(parse_inference(inference_name(kind)) == kind);
    }
    CHECK(parse_inference("crowdbt") == InferenceKind::crowdbt);
    CHECK_THROWS_AS(parse_inference("borda"), ConfigError);
}
