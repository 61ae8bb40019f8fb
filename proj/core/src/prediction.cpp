#include "crowdrank/prediction.hpp"

#include <algorithm>
#include <map>

#include "crowdrank/assignment.hpp"
#include "crowdrank/distance.hpp"
#include "crowdrank/inference.hpp"

namespace crowdrank {

PairwiseProbabilities::PairwiseProbabilities(int n) : n_(n) {
    if (n < 0) throw Error("PairwiseProbabilities: negative size");
    table_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.5);
}

std::size_t PairwiseProbabilities::index(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j)
        throw Error("PairwiseProbabilities: bad pair index");
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
}

double PairwiseProbabilities::at(int i, int j) const { return table_[index(i, j)]; }

void PairwiseProbabilities::set(int i, int j, double p) {
    if (p < 0.0 || p > 1.0)
        throw Error("PairwiseProbabilities: probability out of [0, 1]");
    table_[index(i, j)] = p;
}

PairwiseProbabilities estimate_probabilities(const ComparisonMatrix& m) {
    PairwiseProbabilities p(m.n());
    for (int i = 0; i < m.n(); ++i) {
        for (int j = 0; j < m.n(); ++j) {
            if (i == j) continue;
            // each direction divided on its own: the stored double is the
            // correctly rounded value of its posterior-mode rational
            const double wins = static_cast<double>(m.at(i, j));
            const double total = static_cast<double>(m.pair_total(i, j));
            p.set(i, j, (wins + 1.0) / (total + 2.0));
        }
    }
    return p;
}

namespace {

double clamp_rel(double rel) { return std::clamp(rel, 0.5, 1.0); }

bool counts_for_reliability(const Answer& a) {
    return a.worker != kPredictedWorker;
}

}  // namespace

ReliabilityEstimate estimate_reliability(std::span<const Answer> log,
                                         const RankResult& reference,
                                         RelStrategy strategy,
                                         double constant_value) {
    ReliabilityEstimate out;
    out.strategy = strategy;
    if (strategy == RelStrategy::constant) {
        out.rel = clamp_rel(constant_value);
        return out;
    }
    long long agree = 0, counted = 0;
    if (strategy == RelStrategy::majority) {
        // Majority direction per unordered pair, from the real answers only.
        std::map<std::pair<int, int>, std::pair<long long, long long>> tally;
        for (const Answer& a : log) {
            if (!counts_for_reliability(a)) continue;
            const int lo = std::min(a.left, a.right);
            const int hi = std::max(a.left, a.right);
            auto& [lo_wins, hi_wins] = tally[{lo, hi}];
            (a.winner_object() == lo ? lo_wins : hi_wins) += 1;
        }
        for (const Answer& a : log) {
            if (!counts_for_reliability(a)) continue;
            const int lo = std::min(a.left, a.right);
            const int hi = std::max(a.left, a.right);
            const auto& [lo_wins, hi_wins] = tally[{lo, hi}];
            if (lo_wins == hi_wins) continue;  // tied pair, excluded
            ++counted;
            const int majority = lo_wins > hi_wins ? lo : hi;
            agree += a.winner_object() == majority;
        }
    } else {
        if (reference.order.empty())
            throw Error("estimate_reliability: ranking-agreement needs a reference");
        const std::vector<int> pos = rank_positions(reference);
        for (const Answer& a : log) {
            if (!counts_for_reliability(a)) continue;
            const int w = a.winner_object(), l = a.loser_object();
            if (w < 0 || w >= reference.n || l < 0 || l >= reference.n)
                throw Error("estimate_reliability: answer object out of range");
            const int pw = pos[static_cast<std::size_t>(w)];
            const int pl = pos[static_cast<std::size_t>(l)];
            if (pw < 0 && pl < 0) continue;  // neither object ranked
            ++counted;
            // An object missing from a top-k reference counts as below it.
            if (pw >= 0 && pl >= 0) agree += pw < pl;
            else agree += pw >= 0;
        }
    }
    if (counted == 0) {
        out.rel = 0.5;
        out.degenerate = true;
        return out;
    }
    out.rel = clamp_rel(static_cast<double>(agree) / static_cast<double>(counted));
    return out;
}

PairwiseProbabilities adjust_reliability(const PairwiseProbabilities& p,
                                         double rel) {
    PairwiseProbabilities out(p.n());
    for (int i = 0; i < p.n(); ++i) {
        for (int j = 0; j < p.n(); ++j) {
            if (i == j) continue;
            const double v = p.at(i, j);
            out.set(i, j, v * rel + (1.0 - v) * (1.0 - rel));
        }
    }
    return out;
}

PairwiseProbabilities adjust_reliability(const PairwiseProbabilities& p,
                                         const ReliabilityEstimate& rel) {
    return adjust_reliability(p, rel.rel);
}

Answer sample_answer(std::pair<int, int> pair, const PairwiseProbabilities& p,
                     RngStream& rng) {
    if (pair.first == pair.second)
        throw Error("sample_answer: degenerate pair");
    Answer a;
    a.left = pair.first;
    a.right = pair.second;
    a.winner = rng.bernoulli(p.at(pair.first, pair.second)) ? Side::left
                                                            : Side::right;
    a.worker = std::string(kPredictedWorker);
    return a;
}

PredictionContext prediction_context(const ExperimentSpec& spec) {
    PredictionContext ctx;
    ctx.process = spec.process;
    ctx.query = spec.config.query;
    ctx.rel_strategy = spec.rel_strategy;
    ctx.rel_constant = spec.rel_constant;
    ctx.crowdbt.lambda = spec.crowdbt_lambda;
    return ctx;
}

ReliabilityEstimate resolve_reliability(std::span<const Answer> log,
                                        const ComparisonMatrix& fold,
                                        const PredictionContext& ctx) {
    if (ctx.rel_strategy == RelStrategy::constant)
        return estimate_reliability(log, RankResult{}, RelStrategy::constant,
                                    ctx.rel_constant);
    RankResult reference;
    if (ctx.rel_strategy == RelStrategy::ranking)
        reference = run_inference(ctx.process.inference, fold, ctx.query,
                                  ctx.crowdbt)
                        .ranking;
    return estimate_reliability(log, reference, ctx.rel_strategy,
                                ctx.rel_constant);
}

namespace {

TaskList assign_tasks(const RankProcess& process, const ComparisonMatrix& work,
                      const ScoreVector& scores, int n_batch, RngStream& rng) {
    switch (process.assignment) {
        case AssignmentKind::random: return assign_random(work, n_batch, rng);
        case AssignmentKind::greedy: return assign_greedy(scores, work, n_batch);
        case AssignmentKind::complete: return assign_complete(scores, n_batch);
        case AssignmentKind::active: return assign_active(work, n_batch);
    }
    throw Error("assign_tasks: invalid assignment kind");
}

// The shared batch loop.  Each round: assign from the current state, sample
// every task from the pre-batch probability snapshot, fold, infer.  The
// inference result doubles as the checkpoint ranking and the next round's
// assigner scores, so each round costs exactly one inference.
template <class Sink>
void rollout(ComparisonMatrix& work, const PredictionContext& ctx, double rel,
             int m_batches, int n_batch, RngStream& rng,
             std::vector<RankResult>& checkpoints, Sink&& sink) {
    checkpoints.resize(static_cast<std::size_t>(m_batches) + 1);
    InferenceResult inf =
        run_inference(ctx.process.inference, work, ctx.query, ctx.crowdbt);
    checkpoints[0] = std::move(inf.ranking);
    std::vector<char> winners(static_cast<std::size_t>(n_batch));
    for (int j = 1; j <= m_batches; ++j) {
        const TaskList tasks =
            assign_tasks(ctx.process, work, inf.scores, n_batch, rng);
        for (int tsk = 0; tsk < n_batch; ++tsk) {
            const auto [a, b] = tasks[static_cast<std::size_t>(tsk)];
            const double wins = static_cast<double>(work.at(a, b));
            const double total = static_cast<double>(work.pair_total(a, b));
            const double p = (wins + 1.0) / (total + 2.0);
            const bool left = rng.bernoulli(p * rel + (1.0 - p) * (1.0 - rel));
            winners[static_cast<std::size_t>(tsk)] = left;
            sink(tasks[static_cast<std::size_t>(tsk)], left);
        }
        for (int tsk = 0; tsk < n_batch; ++tsk) {
            const auto [a, b] = tasks[static_cast<std::size_t>(tsk)];
            if (winners[static_cast<std::size_t>(tsk)]) work.add(a, b);
            else work.add(b, a);
        }
        inf = run_inference(ctx.process.inference, work, ctx.query, ctx.crowdbt);
        checkpoints[static_cast<std::size_t>(j)] = std::move(inf.ranking);
    }
}

struct NullSink {
    void operator()(std::pair<int, int>, bool) const {}
};

}  // namespace

AnswerLog predict_next_batch(const AnswerLog& log, int n,
                             const PredictionContext& ctx, int n_batch,
                             RngStream& rng) {
    ComparisonMatrix work = fold_answers(n, log);
    const double rel = resolve_reliability(log, work, ctx).rel;
    AnswerLog batch;
    batch.reserve(static_cast<std::size_t>(n_batch));
    std::vector<RankResult> unused;
    rollout(work, ctx, rel, 1, n_batch, rng, unused,
            [&batch](std::pair<int, int> pair, bool left) {
                Answer a;
                a.left = pair.first;
                a.right = pair.second;
                a.winner = left ? Side::left : Side::right;
                a.worker = std::string(kPredictedWorker);
                batch.push_back(std::move(a));
            });
    return batch;
}

PredictedProcess predict_complete(const AnswerLog& log, int n,
                                  const PredictionContext& ctx,
                                  long long budget, int n_batch,
                                  RngStream& rng) {
    if (static_cast<long long>(log.size()) > budget)
        throw Error("predict_complete: log already exceeds the budget");
    const long long remaining = budget - static_cast<long long>(log.size());
    if (n_batch <= 0) throw Error("predict_complete: n_batch must be positive");
    if (remaining % n_batch != 0)
        throw Error("predict_complete: remaining budget is not whole batches");
    const int m = static_cast<int>(remaining / n_batch);
    ComparisonMatrix work = fold_answers(n, log);
    const double rel = resolve_reliability(log, work, ctx).rel;
    PredictedProcess out;
    out.answers = log;
    out.answers.reserve(static_cast<std::size_t>(budget));
    rollout(work, ctx, rel, m, n_batch, rng, out.checkpoints,
            [&out](std::pair<int, int> pair, bool left) {
                Answer a;
                a.left = pair.first;
                a.right = pair.second;
                a.winner = left ? Side::left : Side::right;
                a.worker = std::string(kPredictedWorker);
                out.answers.push_back(std::move(a));
            });
    return out;
}

void predict_rollout(const ComparisonMatrix& m, const PredictionContext& ctx,
                     double rel, int m_batches, int n_batch, RngStream& rng,
                     std::vector<RankResult>& out) {
    ComparisonMatrix work = m;
    rollout(work, ctx, rel, m_batches, n_batch, rng, out, NullSink{});
}

}  // namespace crowdrank
