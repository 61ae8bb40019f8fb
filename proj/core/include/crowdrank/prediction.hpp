#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdrank/config.hpp"
#include "crowdrank/rng.hpp"
#include "crowdrank/types.hpp"

namespace crowdrank {

// Directed pairwise win probabilities.  Both directions of a pair are stored
// and written independently, so each lookup returns exactly the value its
// estimator produced (the two directions of an estimated pair sum to 1 up to
// one rounding step, never by construction).
class PairwiseProbabilities {
public:
    explicit PairwiseProbabilities(int n);

    int n() const { return n_; }
    double at(int i, int j) const;
    void set(int i, int j, double p);

private:
    std::size_t index(int i, int j) const;

    int n_ = 0;
    std::vector<double> table_;
};

// MAP estimate under the Beta(1,1) prior: p[i][j] = (M_ij+1)/(M_ij+M_ji+2).
PairwiseProbabilities estimate_probabilities(const ComparisonMatrix& m);

struct ReliabilityEstimate {
    double rel = 1.0;
    RelStrategy strategy = RelStrategy::constant;
    bool degenerate = false;  // no usable answers; fell back to 0.5
};

// constant(c) passes c through; majority-agreement scores answers against
// their pair's majority direction (tied pairs excluded); ranking-agreement
// scores them against the reference ranking.  Every result is clamped to
// [0.5, 1], and answers carrying the predicted-answer marker never count.
ReliabilityEstimate estimate_reliability(std::span<const Answer> log,
                                         const RankResult& reference,
                                         RelStrategy strategy,
                                         double constant_value = 1.0);

// p'[i][j] = p[i][j] * rel + (1 - p[i][j]) * (1 - rel).
PairwiseProbabilities adjust_reliability(const PairwiseProbabilities& p,
                                         double rel);
PairwiseProbabilities adjust_reliability(const PairwiseProbabilities& p,
                                         const ReliabilityEstimate& rel);

// Worker id stamped on predicted answers so they can never contaminate
// real-log statistics such as reliability estimation.
inline constexpr std::string_view kPredictedWorker = "@mc";

// Bernoulli draw from p'[left][right]; worker id is the predicted marker.
Answer sample_answer(std::pair<int, int> pair, const PairwiseProbabilities& p,
                     RngStream& rng);

// Everything a prediction run needs besides the answers themselves.
struct PredictionContext {
    RankProcess process;
    Query query;
    RelStrategy rel_strategy = RelStrategy::constant;
    double rel_constant = 1.0;
    CrowdBtOptions crowdbt;
};

PredictionContext prediction_context(const ExperimentSpec& spec);

// Resolves the context's reliability strategy against a real log: inference
// on the fold supplies the reference ranking when the strategy needs one.
ReliabilityEstimate resolve_reliability(std::span<const Answer> log,
                                        const ComparisonMatrix& fold,
                                        const PredictionContext& ctx);

// One simulated batch: fold the log, estimate and reliability-adjust the
// pairwise probabilities, ask the assigner for tasks, and sample an answer
// per task.  The input log is not modified.
AnswerLog predict_next_batch(const AnswerLog& log, int n,
                             const PredictionContext& ctx, int n_batch,
                             RngStream& rng);

struct PredictedProcess {
    AnswerLog answers;                    // input log extended to the budget
    std::vector<RankResult> checkpoints;  // sigma[0..m], one per batch folded
};

// Iterates predicted batches until the budget is reached, re-estimating the
// probabilities from the working log before each batch.  Reliability is
// resolved once, from the real input log, and held fixed for the whole run:
// the predicted answers it would otherwise be re-estimated from are excluded
// from reliability statistics by design, and under the constant strategy the
// two readings coincide anyway.
PredictedProcess predict_complete(const AnswerLog& log, int n,
                                  const PredictionContext& ctx,
                                  long long budget, int n_batch,
                                  RngStream& rng);

// Monte-Carlo fast path: identical draw sequence to predict_complete, but the
// working state is a private fold copy and only the checkpoint rankings are
// materialized (into out[0..m], reusing its storage).  rel must already be
// resolved.
void predict_rollout(const ComparisonMatrix& m, const PredictionContext& ctx,
                     double rel, int m_batches, int n_batch, RngStream& rng,
                     std::vector<RankResult>& out);

}  // namespace crowdrank
