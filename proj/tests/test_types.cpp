#include <doctest.h>

#include "crowdrank/types.hpp"

using namespace crowdrank;

TEST_CASE("comparison matrix counts wins directionally") {
    ComparisonMatrix m(3);
    m.add(0, 1);
    m.add(0, 1, 2);
    m.add(1, 0);
    CHECK(m.at(0, 1) == 3);
    CHECK(m.at(1, 0) == 1);
    CHECK(m.at(0, 2) == 0);
    CHECK(m.pair_total(0, 1) == 4);
    CHECK(m.pair_total(1, 0) == 4);
    CHECK(m.total() == 4);
}

TEST_CASE("comparison matrix rejects the diagonal and out-of-range ids") {
    ComparisonMatrix m(3);
    CHECK_THROWS_AS(m.add(1, 1), Error);
    CHECK_THROWS_AS(m.at(0, 3), Error);
    CHECK_THROWS_AS(m.add(-1, 0), Error);
}

TEST_CASE("answers know their winner and loser") {
    Answer a{4, 7, Side::right, "w1"};
    CHECK(a.winner_object() == 7);
    CHECK(a.loser_object() == 4);
}

TEST_CASE("fold_answers accumulates and validates") {
    AnswerLog log{
        {0, 1, Side::left, "a"},
        {1, 2, Side::right, "b"},
        {0, 1, Side::left, "c"},
    };
    ComparisonMatrix m = fold_answers(3, log);
    CHECK(m.at(0, 1) == 2);
    CHECK(m.at(2, 1) == 1);
    CHECK(m.total() == 3);

    AnswerLog bad{{0, 0, Side::left, "x"}};
    CHECK_THROWS_AS(fold_answers(3, bad), Error);
    AnswerLog out_of_range{{0, 5, Side::left, "x"}};
    CHECK_THROWS_AS(fold_answers(3, out_of_range), Error);
}

TEST_CASE("folding is prefix-composable") {
    AnswerLog log;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j) log.push_back({i, j, Side::left, "w"});
        }
    }
    ComparisonMatrix whole = fold_answers(3, log);
    ComparisonMatrix parts(3);
    for (const Answer& a : log) parts.add(a);
    CHECK(whole == parts);
}

TEST_CASE("rank results validate shape") {
    RankResult complete{RankKind::complete, 3, {2, 0, 1}};
    CHECK_NOTHROW(complete.validate());

    RankResult topk{RankKind::topk, 5, {4, 0}};
    CHECK_NOTHROW(topk.validate());
    CHECK(topk.k() == 2);

    RankResult short_complete{RankKind::complete, 3, {0, 1}};
    CHECK_THROWS_AS(short_complete.validate(), Error);
    RankResult duplicate{RankKind::complete, 3, {0, 1, 1}};
    CHECK_THROWS_AS(duplicate.validate(), Error);
    RankResult stray{RankKind::topk, 3, {0, 3}};
    CHECK_THROWS_AS(stray.validate(), Error);
    RankResult empty{RankKind::topk, 3, {}};
    CHECK_THROWS_AS(empty.validate(), Error);
}
