#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdrank/prediction.hpp"

namespace crowdrank {

struct SampleCount {
    long long n_sample = 0;
    bool weakened = false;  // an override capped the exact bound
};

// ceil((ln((m+1)m/2) + ln(1/alpha')) / (2 t^2)), the union-bound Hoeffding
// sample count; an override caps it and marks the guarantee as weakened.
SampleCount required_samples(long long m, double alpha_prime, double t,
                             long long override_cap = 0);

// Mean sampled distances between checkpoint rankings sigma[0..m]; upper
// triangle only.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(int m);

    int m() const { return m_; }
    double at(int i, int j) const;
    double& slot(int i, int j);
    double max_entry() const;  // 0 for an empty matrix

private:
    int m_ = 0;
    std::vector<double> upper_;
};

struct StopReport {
    int checkpoint = 0;  // collection checkpoint the check ran at (1-based)
    long long m = 0;     // remaining batches
    long long n_sample = 0;
    bool weakened = false;
    double theta = 0.0;
    double t = 0.0;
    DistanceMatrix dbar;
    bool stop = false;
    double wall_seconds = 0.0;  // reported in the text record only

    static std::string csv_header();
    std::string csv_row() const;
    std::string text_record() const;
};

// The one-shot stop check on a realized batch-aligned answer prefix: predict
// the remaining m batches n_sample times, average all checkpoint-pair
// distances, stop iff every mean is at most theta - t.  Samples fan out over
// `threads` workers in fixed 256-sample blocks merged in block order, so the
// result is byte-identical for any thread count.
StopReport monte_carlo(std::span<const Answer> log, int n,
                       const PredictionContext& ctx, const ProcessConfig& cfg,
                       const RngStream& rng, int threads = 1,
                       int checkpoint = 0);

// Windowed baselines over the realized interim rankings sigma_1..sigma_i
// (history.size() = i).  Empty result until i > w.
std::optional<double> moving_average(std::span<const RankResult> history,
                                     int w);
std::optional<double> weighted_moving_average(
    std::span<const RankResult> history, int w);

// Offline oracle: the smallest l with distance(sigma_i, sigma_j) <= theta for
// every l <= i < j <= final, over the realized rankings sigma_1..sigma_final.
// Returns a 1-based checkpoint index; l = final holds vacuously.
int stable_state(std::span<const RankResult> rankings, double theta);

struct Metrics {
    double delta_sc = 0.0;
    double used_budget = 0.0;
    double actual_error = 0.0;
};

// delta_sc = |p_optimal - p_sc| / (B/n_batch); used_budget = p_sc/(B/n_batch);
// actual_error = distance(sigma_{p_sc}, sigma_final).
Metrics evaluate(int p_sc, int p_optimal, const RankResult& sigma_psc,
                 const RankResult& sigma_final, const ProcessConfig& cfg);

}  // namespace crowdrank
