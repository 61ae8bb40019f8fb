#include <doctest.h>

#include <cmath>
#include <vector>

#include "crowdrank/distance.hpp"
#include "crowdrank/earlystop.hpp"
#include "crowdrank/rng.hpp"

using namespace crowdrank;

namespace {

RankResult complete_of(std::vector<int> order) {
    return RankResult{RankKind::complete, static_cast<int>(order.size()),
                      std::move(order)};
}

AnswerLog uniform_log(int n, long long wins_each_way) {
    AnswerLog log;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (long long c = 0; c < wins_each_way; ++c) {
                log.push_back({i, j, Side::left, "w"});
                log.push_back({i, j, Side::right, "w"});
            }
        }
    }
    return log;
}

AnswerLog decided_log(int n, long long copies) {
    AnswerLog log;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (long long c = 0; c < copies; ++c) log.push_back({i, j, Side::left, "w"});
        }
    }
    return log;
}

PredictionContext local_random_ctx() {
    PredictionContext ctx;
    ctx.process = parse_process("Local-Random");
    ctx.rel_strategy = RelStrategy::constant;
    ctx.rel_constant = 1.0;
    return ctx;
}

ProcessConfig config_for(long long budget, int n_batch, double theta,
                         long long override_cap) {
    ProcessConfig cfg;
    cfg.budget = budget;
    cfg.n_batch = n_batch;
    cfg.theta = theta;
    cfg.n_sample_override = override_cap;
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("required_samples matches the closed form") {
    SampleCount big = required_samples(10, 0.05, 0.01);
    CHECK(big.n_sample == 35016);
    CHECK_FALSE(big.weakened);

    SampleCount small = required_samples(1, 0.05, 0.05);
    CHECK(small.n_sample == 600);

    // independent recomputation for a third point
    long long m = 4;
    double expected =
        std::ceil((std::log(m * (m + 1) / 2.0) + std::log(1.0 / 0.1)) /
                  (2 * 0.02 * 0.02));
    CHECK(required_samples(m, 0.1, 0.02).n_sample ==
          static_cast<long long>(expected));
}

TEST_CASE("sample override caps and flags") {
    SampleCount capped = required_samples(10, 0.05, 0.01, 1000);
    CHECK(capped.n_sample == 1000);
    CHECK(capped.weakened);

    SampleCount roomy = required_samples(10, 0.05, 0.01, 50000);
    CHECK(roomy.n_sample == 35016);
    CHECK_FALSE(roomy.weakened);
}

TEST_CASE("required_samples rejects degenerate inputs") {
    CHECK_THROWS_AS(required_samples(0, 0.05, 0.01), Error);
    CHECK_THROWS_AS(required_samples(5, 0.0, 0.01), Error);
    CHECK_THROWS_AS(required_samples(5, 0.05, 0.0), Error);
}

TEST_CASE("distance matrix stores the strict upper triangle") {
    DistanceMatrix d(2);
    CHECK(d.m() == 2);
    d.slot(0, 1) = 0.25;
    d.slot(0, 2) = 0.5;
    d.slot(1, 2) = 0.125;
    CHECK(d.at(0, 1) == 0.25);
    CHECK(d.at(2, 1) == 0.125);  // symmetric access
    CHECK(d.max_entry() == 0.5);
}

TEST_CASE("exhausted budget stops trivially") {
    AnswerLog log = uniform_log(3, 1);  // 6 answers
    auto cfg = config_for(6, 3, 0.1, 0);
    StopReport report =
        monte_carlo(log, 3, local_random_ctx(), cfg, RngStream(1), 1, 2);
    CHECK(report.stop);
    CHECK(report.m == 0);
    CHECK(report.checkpoint == 2);
    CHECK(report.csv_row().find("stop") != std::string::npos);
}

TEST_CASE("monte_carlo rejects logs off the batch grid") {
    AnswerLog log = uniform_log(3, 1);  // 6 answers, n_batch 4
    auto cfg = config_for(12, 4, 0.1, 0);
    CHECK_THROWS_AS(monte_carlo(log, 3, local_random_ctx(), cfg, RngStream(1)),
                    Error);
}

TEST_CASE("near-deterministic logs stop early") {
    AnswerLog log = decided_log(4, 5);  // 30 answers, heavily decided
    auto cfg = config_for(60, 6, 0.1, 200);
    StopReport report =
        monte_carlo(log, 4, local_random_ctx(), cfg, RngStream(7), 1, 5);
    CHECK(report.m == 5);
    CHECK(report.weakened);
    CHECK(report.dbar.max_entry() < 0.05);
    CHECK(report.stop);
}

TEST_CASE("contested pools keep collecting") {
    AnswerLog log = uniform_log(5, 5);  // 100 answers, every pair 5-5
    auto cfg = config_for(200, 20, 0.05, 300);
    StopReport report =
        monte_carlo(log, 5, local_random_ctx(), cfg, RngStream(9), 1, 5);
    CHECK(report.m == 5);
    CHECK_FALSE(report.stop);
    CHECK(report.dbar.max_entry() > cfg.theta - cfg.t);
}

TEST_CASE("thread count never changes the verdict or the matrix") {
    AnswerLog log = uniform_log(5, 5);
    auto cfg = config_for(200, 20, 0.05, 600);  // 3 sample blocks
    StopReport one = monte_carlo(log, 5, local_random_ctx(), cfg, RngStream(13), 1, 5);
    StopReport three =
        monte_carlo(log, 5, local_random_ctx(), cfg, RngStream(13), 3, 5);
    CHECK(one.stop == three.stop);
    for (int i = 0; i <= 5; ++i) {
        for (int j = i + 1; j <= 5; ++j) {
            CHECK(one.dbar.at(i, j) == three.dbar.at(i, j));
        }
    }
    CHECK(one.csv_row() == three.csv_row());
}

TEST_CASE("monte_carlo is deterministic in the stream") {
    AnswerLog log = uniform_log(4, 3);
    auto cfg = config_for(72, 12, 0.05, 300);
    StopReport a = monte_carlo(log, 4, local_random_ctx(), cfg, RngStream(21), 1, 3);
    StopReport b = monte_carlo(log, 4, local_random_ctx(), cfg, RngStream(21), 1, 3);
    CHECK(a.csv_row() == b.csv_row());
    CHECK(a.dbar.max_entry() == b.dbar.max_entry());
}

TEST_CASE("moving averages need more history than the window") {
    std::vector<RankResult> history{complete_of({0, 1, 2, 3})};
    CHECK_FALSE(moving_average(history, 2).has_value());
    history.push_back(complete_of({1, 0, 2, 3}));
    CHECK_FALSE(moving_average(history, 2).has_value());  // 2 rankings = 1 distance
    history.push_back(complete_of({1, 0, 3, 2}));
    auto first = moving_average(history, 2);
    REQUIRE(first.has_value());
    CHECK(*first == doctest::Approx(1.0 / 6.0));  // distances 1/6 and 1/6
}

TEST_CASE("moving average arithmetic") {
    std::vector<RankResult> history{
        complete_of({0, 1, 2, 3}),
        complete_of({1, 0, 2, 3}),  // d1 = 1/6
        complete_of({1, 0, 3, 2}),  // d2 = 1/6
        complete_of({1, 0, 3, 2}),  // d3 = 0
    };
    auto ma = moving_average(history, 2);
    REQUIRE(ma.has_value());
    CHECK(*ma == doctest::Approx((1.0 / 6.0 + 0.0) / 2));

    auto wma = weighted_moving_average(history, 2);
    REQUIRE(wma.has_value());
    // latest distance weighted 2/3, previous 1/3
    CHECK(*wma == doctest::Approx(0.0 * (2.0 / 3.0) + (1.0 / 6.0) * (1.0 / 3.0)));
}

TEST_CASE("stable_state matches brute force on random histories") {
    RngStream rng(404);
    std::vector<std::vector<int>> orders{
        {0, 1, 2, 3, 4}, {1, 0, 2, 3, 4}, {0, 1, 2, 4, 3}, {2, 0, 1, 3, 4}};
    for (int trial = 0; trial < 100; ++trial) {
        int length = 2 + static_cast<int>(rng.uniform_index(7));
        std::vector<RankResult> history;
        for (int i = 0; i < length; ++i) {
            history.push_back(
                complete_of(orders[rng.uniform_index(orders.size())]));
        }
        double theta = 0.05 + 0.15 * rng.uniform();
        int expected = length;
        for (int l = 1; l <= length; ++l) {
            bool ok = true;
            for (int i = l; i <= length && ok; ++i) {
                for (int j = i + 1; j <= length && ok; ++j) {
                    if (rank_distance(history[i - 1], history[j - 1]) > theta) {
                        ok = false;
                    }
                }
            }
            if (ok) {
                expected = l;
                break;
            }
        }
        CHECK(stable_state(history, theta) == expected);
    }
}

TEST_CASE("stable_state pinned cases") {
    std::vector<RankResult> flat(4, complete_of({0, 1, 2}));
    CHECK(stable_state(flat, 0.01) == 1);

    std::vector<RankResult> late{
        complete_of({0, 1, 2}),
        complete_of({0, 1, 2}),
        complete_of({2, 1, 0}),  // upheaval at the end
    };
    CHECK(stable_state(late, 0.1) == 3);
}

TEST_CASE("evaluate reports the three metrics") {
    auto cfg = config_for(100, 10, 0.1, 0);  // 10 checkpoints
    RankResult at_stop = complete_of({1, 0, 2, 3});
    RankResult final = complete_of({0, 1, 2, 3});
    Metrics m = evaluate(7, 5, at_stop, final, cfg);
    CHECK(m.delta_sc == doctest::Approx(0.2));
    CHECK(m.used_budget == doctest::Approx(0.7));
    CHECK(m.actual_error == doctest::Approx(1.0 / 6.0));

    CHECK_THROWS_AS(evaluate(0, 5, at_stop, final, cfg), Error);
    CHECK_THROWS_AS(evaluate(11, 5, at_stop, final, cfg), Error);
}

TEST_CASE("hoeffding sizing actually covers the deviation probability") {
    // For m = 1 the bound guards one mean estimate: with n_sample draws the
    // chance of missing the true mean by more than t must stay below alpha'.
    const double alpha = 0.3, t = 0.08;
    SampleCount sized = required_samples(1, alpha, t);
    RngStream rng(888);
    int busts = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        double sum = 0;
        for (long long s = 0; s < sized.n_sample; ++s) {
            sum += rng.bernoulli(0.5) ? 1.0 : 0.0;
        }
        double mean = sum / static_cast<double>(sized.n_sample);
        if (std::abs(mean - 0.5) > t) ++busts;
    }
    CHECK(static_cast<double>(busts) / trials < alpha);
}
