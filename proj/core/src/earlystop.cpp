#include "crowdrank/earlystop.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "crowdrank/distance.hpp"
#include "crowdrank/inference.hpp"

namespace crowdrank {

namespace {

constexpr long long kBlock = 256;  // samples per reduction block

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

SampleCount required_samples(long long m, double alpha_prime, double t,
                             long long override_cap) {
    if (m < 1) throw Error("required_samples: m must be >= 1");
    if (alpha_prime <= 0.0 || alpha_prime >= 1.0)
        throw Error("required_samples: alpha_prime must lie in (0, 1)");
    if (t <= 0.0) throw Error("required_samples: t must be positive");
    const double events = 0.5 * static_cast<double>(m + 1) * static_cast<double>(m);
    const double exact =
        std::ceil((std::log(events) + std::log(1.0 / alpha_prime)) / (2.0 * t * t));
    SampleCount out;
    out.n_sample = static_cast<long long>(exact);
    if (override_cap > 0 && override_cap < out.n_sample) {
        out.n_sample = override_cap;
        out.weakened = true;
    }
    return out;
}

DistanceMatrix::DistanceMatrix(int m) : m_(m) {
    if (m < 0) throw Error("DistanceMatrix: negative m");
    upper_.assign(static_cast<std::size_t>(m + 1) * m / 2, 0.0);
}

namespace {

std::size_t tri_index(int m, int i, int j) {
    if (i < 0 || j <= i || j > m) throw Error("DistanceMatrix: bad pair index");
    const std::size_t row = static_cast<std::size_t>(i);
    const std::size_t rows = static_cast<std::size_t>(m) + 1;
    return row * (2 * rows - row - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

}  // namespace

double DistanceMatrix::at(int i, int j) const {
    if (i > j) std::swap(i, j);  // symmetric lookup
    return upper_[tri_index(m_, i, j)];
}
double& DistanceMatrix::slot(int i, int j) { return upper_[tri_index(m_, i, j)]; }

double DistanceMatrix::max_entry() const {
    double best = 0.0;
    for (double v : upper_) best = std::max(best, v);
    return best;
}

std::string StopReport::csv_header() {
    return "checkpoint,m,n_sample,weakened,decision,max_dbar,theta,t";
}

std::string StopReport::csv_row() const {
    std::string row = std::to_string(checkpoint) + "," + std::to_string(m) + "," +
                      std::to_string(n_sample) + "," +
                      (weakened ? "1" : "0") + "," +
                      (stop ? "stop" : "continue") + "," +
                      fmt(dbar.max_entry()) + "," + fmt(theta) + "," + fmt(t);
    return row;
}

std::string StopReport::text_record() const {
    std::string out;
    out += "stop check at checkpoint " + std::to_string(checkpoint) + "\n";
    out += "  remaining batches   m = " + std::to_string(m) + "\n";
    out += "  samples      n_sample = " + std::to_string(n_sample) +
           (weakened ? "  (override cap, weakened confidence)" : "") + "\n";
    out += "  max dbar = " + fmt(dbar.max_entry()) +
           "  vs  theta - t = " + fmt(theta - t) + "\n";
    if (m >= 1 && m <= 12) {
        for (int i = 0; i < dbar.m(); ++i) {
            out += "  dbar[" + std::to_string(i) + "][*]:";
            for (int j = i + 1; j <= dbar.m(); ++j) out += " " + fmt(dbar.at(i, j));
            out += "\n";
        }
    }
    out += "  decision: " + std::string(stop ? "stop" : "continue") + "\n";
    out += "  wall time: " + fmt(wall_seconds) + " s\n";
    return out;
}

StopReport monte_carlo(std::span<const Answer> log, int n,
                       const PredictionContext& ctx, const ProcessConfig& cfg,
                       const RngStream& rng, int threads, int checkpoint) {
    const auto start = std::chrono::steady_clock::now();
    StopReport report;
    report.checkpoint = checkpoint;
    report.theta = cfg.theta;
    report.t = cfg.t;
    const long long len = static_cast<long long>(log.size());
    if (len > cfg.budget) throw Error("monte_carlo: log exceeds the budget");
    if ((cfg.budget - len) % cfg.n_batch != 0)
        throw Error("monte_carlo: log length is not on a batch boundary");
    const long long m = (cfg.budget - len) / cfg.n_batch;
    report.m = m;
    if (m == 0) {  // budget exhausted: nothing left to predict
        report.stop = true;
        report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        return report;
    }
    const SampleCount count =
        required_samples(m, cfg.alpha_prime, cfg.t, cfg.n_sample_override);
    report.n_sample = count.n_sample;
    report.weakened = count.weakened;

    const ComparisonMatrix work = fold_answers(n, log);
    const double rel = resolve_reliability(log, work, ctx).rel;

    const int mi = static_cast<int>(m);
    const std::size_t n_pairs = static_cast<std::size_t>(mi + 1) * mi / 2;
    const long long n_blocks = (count.n_sample + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> partials(static_cast<std::size_t>(n_blocks));
    std::atomic<long long> next_block{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const bool topk = ctx.query.kind == RankKind::topk;
    const int k = ctx.query.k;

    auto worker = [&]() {
        try {
            std::vector<RankResult> ckpts;
            std::vector<int> pos(static_cast<std::size_t>(mi + 1) *
                                 static_cast<std::size_t>(n));
            std::vector<double> local(n_pairs);
            while (true) {
                const long long b = next_block.fetch_add(1);
                if (b >= n_blocks) break;
                std::fill(local.begin(), local.end(), 0.0);
                const long long lo = b * kBlock;
                const long long hi = std::min(count.n_sample, lo + kBlock);
                for (long long s = lo; s < hi; ++s) {
                    RngStream sample_rng =
                        rng.derive("mc", static_cast<std::uint64_t>(s));
                    predict_rollout(work, ctx, rel, mi, cfg.n_batch, sample_rng,
                                    ckpts);
                    for (int c = 0; c <= mi; ++c) {
                        int* slice = pos.data() + static_cast<std::size_t>(c) * n;
                        if (topk) std::fill(slice, slice + n, -1);
                        const RankResult& r = ckpts[static_cast<std::size_t>(c)];
                        for (int rank = 0; rank < r.k(); ++rank)
                            slice[r.order[static_cast<std::size_t>(rank)]] = rank;
                    }
                    std::size_t idx = 0;
                    for (int i = 0; i <= mi; ++i) {
                        const int* pa = pos.data() + static_cast<std::size_t>(i) * n;
                        for (int j = i + 1; j <= mi; ++j) {
                            const int* pb =
                                pos.data() + static_cast<std::size_t>(j) * n;
                            local[idx++] +=
                                topk ? kendall_topk_pos(pa, pb, n, k)
                                     : kendall_complete_pos(pa, pb, n);
                        }
                    }
                }
                partials[static_cast<std::size_t>(b)] = local;
            }
        } catch (...) {
            const std::lock_guard<std::mutex> guard(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    const int n_workers = static_cast<int>(
        std::clamp<long long>(threads, 1, n_blocks));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers) - 1);
        for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
        worker();
        for (std::thread& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Merge partial sums in block order: the reduction sequence, and with it
    // the floating-point result, never depends on the thread count.
    report.dbar = DistanceMatrix(mi);
    std::vector<double> sums(n_pairs, 0.0);
    for (const std::vector<double>& part : partials) {
        if (part.empty()) continue;
        for (std::size_t p = 0; p < n_pairs; ++p) sums[p] += part[p];
    }
    std::size_t idx = 0;
    for (int i = 0; i <= mi; ++i)
        for (int j = i + 1; j <= mi; ++j)
            report.dbar.slot(i, j) =
                sums[idx++] / static_cast<double>(count.n_sample);
    report.stop = report.dbar.max_entry() <= cfg.theta - cfg.t;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

namespace {

double window_distance(std::span<const RankResult> history, int back) {
    const std::size_t i = history.size();
    return rank_distance(history[i - static_cast<std::size_t>(back) - 1],
                         history[i - static_cast<std::size_t>(back)]);
}

}  // namespace

std::optional<double> moving_average(std::span<const RankResult> history,
                                     int w) {
    if (w < 1) throw Error("moving_average: window must be >= 1");
    if (static_cast<int>(history.size()) <= w) return std::nullopt;
    double sum = 0.0;
    for (int j = 1; j <= w; ++j) sum += window_distance(history, j);
    return sum / w;
}

std::optional<double> weighted_moving_average(
    std::span<const RankResult> history, int w) {
    if (w < 1) throw Error("weighted_moving_average: window must be >= 1");
    if (static_cast<int>(history.size()) <= w) return std::nullopt;
    double sum = 0.0;
    for (int j = 1; j <= w; ++j)
        sum += static_cast<double>(w - j + 1) * window_distance(history, j);
    return sum / (0.5 * w * (w + 1));
}

int stable_state(std::span<const RankResult> rankings, double theta) {
    const int final = static_cast<int>(rankings.size());
    if (final == 0) throw Error("stable_state: empty ranking history");
    int best = final;
    double suffix_max = 0.0;
    for (int l = final - 1; l >= 1; --l) {          // 1-based candidate l
        for (int j = l + 1; j <= final; ++j) {
            suffix_max = std::max(
                suffix_max, rank_distance(rankings[static_cast<std::size_t>(l - 1)],
                                          rankings[static_cast<std::size_t>(j - 1)]));
        }
        if (suffix_max <= theta) best = l;
        else break;  // the max only grows as l moves earlier
    }
    return best;
}

Metrics evaluate(int p_sc, int p_optimal, const RankResult& sigma_psc,
                 const RankResult& sigma_final, const ProcessConfig& cfg) {
    const int final = cfg.checkpoints();
    if (p_sc < 1 || p_sc > final || p_optimal < 1 || p_optimal > final)
        throw Error("evaluate: checkpoint outside [1, B/n_batch]");
    Metrics out;
    out.delta_sc = std::fabs(static_cast<double>(p_optimal - p_sc)) / final;
    out.used_budget = static_cast<double>(p_sc) / final;
    out.actual_error = rank_distance(sigma_psc, sigma_final);
    return out;
}

}  // namespace crowdrank
