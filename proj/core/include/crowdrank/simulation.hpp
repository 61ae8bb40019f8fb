#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crowdrank/earlystop.hpp"

namespace crowdrank {

struct LoadReport {
    int n = 0;
    long long answers = 0;
    int workers = 0;
};

// Answer source for the collection loop.  Replay pools draw recorded answers
// per pair without replacement and fall back to a synthesized answer from a
// worker of average reliability once a pair runs dry; synthetic pools are
// unlimited Bradley-Terry worlds (optionally switching score regimes after a
// fixed number of draws).
class AnswerPool {
public:
    static AnswerPool load_dataset(const std::string& answers_path,
                                   const std::string& truth_path);
    static AnswerPool generate_synthetic(const SyntheticSpec& spec);

    int n() const { return static_cast<int>(truth_.order.size()); }
    const RankResult& ground_truth() const { return truth_; }
    double mean_reliability() const { return mean_rel_; }
    const LoadReport& report() const { return report_; }
    const std::vector<std::string>& labels() const { return labels_; }

    // Restores every cursor (and the regime counter) for a fresh repetition.
    void reset();
    Answer draw(std::pair<int, int> pair, RngStream& rng);

private:
    AnswerPool() = default;

    std::size_t pair_slot(int i, int j) const;
    Answer synthesize(std::pair<int, int> pair, RngStream& rng) const;

    bool synthetic_ = false;
    RankResult truth_;
    std::vector<std::string> labels_;
    LoadReport report_;
    double mean_rel_ = 1.0;

    // replay state: pristine per-pair answer multisets plus working cursors
    std::vector<std::vector<Answer>> pristine_;
    std::vector<std::vector<Answer>> working_;
    std::vector<std::size_t> remaining_;

    // synthetic state
    SyntheticSpec syn_;
    long long draws_ = 0;
};

// One drawn answer per unordered pair (lexicographic order); the batch-0 fill
// folded in before the first assigned batch, counted against the budget.
AnswerLog cold_start(AnswerPool& pool, RngStream& rng);

struct ResultRow {
    std::string process;
    std::string criterion;
    double theta = 0.0;
    std::string rep;  // repetition number, or "avg"
    double p_sc = 0.0;
    double p_optimal = 0.0;
    double delta_sc = 0.0;
    double used_budget = 0.0;
    double actual_error = 0.0;
};

struct CurveRow {
    std::string process;
    int rep = 0;
    int checkpoint = 0;
    double distance_to_final = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;  // per-repetition rows, then per-criterion averages
    std::vector<CurveRow> curve;
};

// The full evaluation protocol: per repetition, cold-start the pool, collect
// to the budget in batches, infer an interim ranking at every n_batch
// answers, score every stopping criterion in shadow mode (first-stop recorded,
// collection never halted), then measure everything against the offline
// stable state.  Deterministic for a fixed spec, including across `threads`.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

}  // namespace crowdrank
