#include "crowdrank/inference.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <string>

namespace crowdrank {

namespace {

std::vector<int> order_by_scores(const ScoreVector& scores,
                                 const std::vector<int>& candidates) {
    std::vector<int> order = candidates;
    std::sort(order.begin(), order.end(), [&scores](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        return a < b;
    });
    return order;
}

std::vector<int> all_objects(int n) {
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    return ids;
}

RankResult complete_from_scores(const ScoreVector& scores) {
    RankResult r;
    r.kind = RankKind::complete;
    r.n = static_cast<int>(scores.size());
    r.order = order_by_scores(scores, all_objects(r.n));
    return r;
}

// Local scoring restricted to an alive subset; scores of dead objects are
// left at 0 and must be ignored by the caller.  Neighborhoods are bitmasks so
// the 2-hop sums are popcount loops.
ScoreVector local_scores_masked(const ComparisonMatrix& m,
                                const std::vector<char>& alive) {
    const int n = m.n();
    const int words = (n + 63) / 64;
    std::vector<std::uint64_t> win(static_cast<std::size_t>(n) * words, 0);
    std::vector<std::uint64_t> lose(static_cast<std::size_t>(n) * words, 0);
    auto set_bit = [words](std::vector<std::uint64_t>& rows, int row, int col) {
        rows[static_cast<std::size_t>(row) * words + col / 64] |=
            std::uint64_t{1} << (col % 64);
    };
    for (int i = 0; i < n; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!alive[static_cast<std::size_t>(j)]) continue;
            const std::int64_t cij = m.at(i, j), cji = m.at(j, i);
            if (cij > cji) {
                set_bit(win, i, j);
                set_bit(lose, j, i);
            } else if (cji > cij) {
                set_bit(win, j, i);
                set_bit(lose, i, j);
            }
        }
    }
    std::vector<int> wc(static_cast<std::size_t>(n), 0);
    std::vector<int> lc(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        int w = 0, l = 0;
        for (int v = 0; v < words; ++v) {
            w += std::popcount(win[static_cast<std::size_t>(i) * words + v]);
            l += std::popcount(lose[static_cast<std::size_t>(i) * words + v]);
        }
        wc[static_cast<std::size_t>(i)] = w;
        lc[static_cast<std::size_t>(i)] = l;
    }
    ScoreVector scores(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        long long s = wc[static_cast<std::size_t>(i)] - lc[static_cast<std::size_t>(i)];
        for (int v = 0; v < words; ++v) {
            std::uint64_t wbits = win[static_cast<std::size_t>(i) * words + v];
            while (wbits) {
                const int u = v * 64 + std::countr_zero(wbits);
                s += wc[static_cast<std::size_t>(u)];
                wbits &= wbits - 1;
            }
            std::uint64_t lbits = lose[static_cast<std::size_t>(i) * words + v];
            while (lbits) {
                const int u = v * 64 + std::countr_zero(lbits);
                s -= lc[static_cast<std::size_t>(u)];
                lbits &= lbits - 1;
            }
        }
        scores[static_cast<std::size_t>(i)] = static_cast<double>(s);
    }
    return scores;
}

// Regularized Bradley-Terry log-likelihood; pairs with a zero count
// contribute nothing.  softplus keeps the log term stable for large gaps.
double bt_log_likelihood(const ComparisonMatrix& m, const ScoreVector& s,
                         double lambda) {
    const int n = m.n();
    auto softplus = [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); };
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double mij = static_cast<double>(m.at(i, j));
            if (mij == 0.0) continue;
            f -= mij * softplus(s[static_cast<std::size_t>(j)] -
                                s[static_cast<std::size_t>(i)]);
        }
        f -= lambda * s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
    }
    return f;
}

// Solve A x = b for symmetric positive-definite A (row-major, n x n) via
// Cholesky.  Returns false if a pivot degenerates, which for the Bradley-Terry
// polish below cannot happen short of severe roundoff: A is a weighted graph
// Laplacian plus 2*lambda on the diagonal, so its spectrum sits above
// 2*lambda > 0.
bool solve_spd(std::vector<double>& a, std::vector<double>& x, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                sum -= a[static_cast<std::size_t>(i) * n + k] *
                       a[static_cast<std::size_t>(j) * n + k];
            if (i == j) {
                if (sum <= 0.0) return false;
                a[static_cast<std::size_t>(i) * n + j] = std::sqrt(sum);
            } else {
                a[static_cast<std::size_t>(i) * n + j] =
                    sum / a[static_cast<std::size_t>(j) * n + j];
            }
        }
    }
    for (int i = 0; i < n; ++i) {  // forward substitution: L y = b
        double sum = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k)
            sum -= a[static_cast<std::size_t>(i) * n + k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = sum / a[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {  // back substitution: L^T x = y
        double sum = x[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k)
            sum -= a[static_cast<std::size_t>(k) * n + i] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = sum / a[static_cast<std::size_t>(i) * n + i];
    }
    return true;
}

}  // namespace

ScoreVector copeland_scores(const ComparisonMatrix& m) {
    const int n = m.n();
    ScoreVector scores(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            scores[static_cast<std::size_t>(i)] +=
                static_cast<double>(m.at(i, j) - m.at(j, i));
        }
    }
    return scores;
}

RankResult infer_copeland(const ComparisonMatrix& m) {
    return complete_from_scores(copeland_scores(m));
}

ScoreVector local_scores(const ComparisonMatrix& m) {
    return local_scores_masked(m, std::vector<char>(static_cast<std::size_t>(m.n()), 1));
}

RankResult infer_local(const ComparisonMatrix& m) {
    return complete_from_scores(local_scores(m));
}

RankResult infer_iterative(const ComparisonMatrix& m, int k) {
    const int n = m.n();
    if (k < 1 || k >= n) throw Error("infer_iterative: k out of range");
    std::vector<char> alive(static_cast<std::size_t>(n), 1);
    std::vector<int> survivors = all_objects(n);
    while (static_cast<int>(survivors.size()) > k) {
        const int s = static_cast<int>(survivors.size());
        const int drop = std::min(s / 2, s - k);
        const ScoreVector scores = local_scores_masked(m, alive);
        survivors = order_by_scores(scores, survivors);
        for (int d = 0; d < drop; ++d) {
            alive[static_cast<std::size_t>(survivors.back())] = 0;
            survivors.pop_back();
        }
    }
    const ScoreVector scores = local_scores_masked(m, alive);
    RankResult r;
    r.kind = RankKind::topk;
    r.n = n;
    r.order = order_by_scores(scores, survivors);
    return r;
}

InferenceResult infer_crowdbt(const ComparisonMatrix& m,
                              const CrowdBtOptions& opt) {
    const int n = m.n();
    ScoreVector s(static_cast<std::size_t>(n), 0.0);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        double max_change = 0.0;
        for (int i = 0; i < n; ++i) {
            double g = -2.0 * opt.lambda * s[static_cast<std::size_t>(i)];
            double h = -2.0 * opt.lambda;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double pij =
                    1.0 / (1.0 + std::exp(s[static_cast<std::size_t>(j)] -
                                          s[static_cast<std::size_t>(i)]));
                const double mij = static_cast<double>(m.at(i, j));
                const double mji = static_cast<double>(m.at(j, i));
                g += mij * (1.0 - pij) - mji * pij;
                h -= (mij + mji) * pij * (1.0 - pij);
            }
            double step = -g / h;
            step = std::clamp(step, -10.0, 10.0);
            s[static_cast<std::size_t>(i)] += step;
            max_change = std::max(max_change, std::fabs(step));
        }
        // Gauge fix per sweep: the data term is translation invariant and the
        // regularizer alone pulls the common offset in at a crawl (rate
        // 2*lambda against data-sized curvature), so recentering here removes
        // the slowest mode outright instead of sweeping it away.
        double drift = 0.0;
        for (double v : s) drift += v;
        drift /= n;
        for (double& v : s) v -= drift;
        if (max_change < opt.tolerance) break;
    }
    // The coordinate sweeps stall along weakly pinned directions (the data
    // term is translation invariant, so the common offset is held only by the
    // regularizer) and can leave gradient residuals of order 1e-4 even after
    // many iterations.  A few full Newton steps on the exact Hessian finish
    // the fit; the Hessian is a weighted Laplacian plus 2*lambda*I, so the
    // negated system is positive definite and Cholesky always applies.
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    std::vector<double> grad(static_cast<std::size_t>(n));
    for (int polish = 0; polish < 50; ++polish) {
        std::fill(a.begin(), a.end(), 0.0);
        double max_gradient = 0.0;
        for (int i = 0; i < n; ++i) {
            double g = -2.0 * opt.lambda * s[static_cast<std::size_t>(i)];
            double diag = 2.0 * opt.lambda;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double pij =
                    1.0 / (1.0 + std::exp(s[static_cast<std::size_t>(j)] -
                                          s[static_cast<std::size_t>(i)]));
                const double mij = static_cast<double>(m.at(i, j));
                const double mji = static_cast<double>(m.at(j, i));
                const double w = (mij + mji) * pij * (1.0 - pij);
                g += mij * (1.0 - pij) - mji * pij;
                diag += w;
                a[static_cast<std::size_t>(i) * n + j] = -w;
            }
            a[static_cast<std::size_t>(i) * n + i] = diag;
            grad[static_cast<std::size_t>(i)] = g;
            max_gradient = std::max(max_gradient, std::fabs(g));
        }
        if (max_gradient < 1e-8) break;
        std::vector<double> delta = grad;
        if (!solve_spd(a, delta, n)) break;
        double max_delta = 0.0;
        for (double d : delta) max_delta = std::max(max_delta, std::fabs(d));
        if (max_delta > 1.0) {  // stay inside the concave basin
            for (double& d : delta) d /= max_delta;
        }
        const double before = bt_log_likelihood(m, s, opt.lambda);
        double alpha = 1.0;
        ScoreVector trial(static_cast<std::size_t>(n));
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            for (int i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(i)] =
                    s[static_cast<std::size_t>(i)] +
                    alpha * delta[static_cast<std::size_t>(i)];
            if (bt_log_likelihood(m, trial, opt.lambda) >= before) {
                s = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= std::max(n, 1);
    for (double& v : s) v -= mean;
    return InferenceResult{s, complete_from_scores(s)};
}

InferenceResult run_inference(InferenceKind kind, const ComparisonMatrix& m,
                              const Query& query, const CrowdBtOptions& opt) {
    if (query.kind == RankKind::topk && (query.k < 1 || query.k > m.n()))
        throw Error("run_inference: top-k query with k out of range");
    if (kind == InferenceKind::iterative) {
        if (query.kind != RankKind::topk)
            throw Error("run_inference: Iterative supports only top-k queries");
        return InferenceResult{{}, infer_iterative(m, query.k)};
    }
    InferenceResult result;
    switch (kind) {
        case InferenceKind::copeland:
            result.scores = copeland_scores(m);
            result.ranking = complete_from_scores(result.scores);
            break;
        case InferenceKind::local:
            result.scores = local_scores(m);
            result.ranking = complete_from_scores(result.scores);
            break;
        case InferenceKind::crowdbt:
            result = infer_crowdbt(m, opt);
            break;
        case InferenceKind::iterative:
            break;  // handled above
    }
    if (query.kind == RankKind::topk) {
        result.ranking.kind = RankKind::topk;
        result.ranking.order.resize(static_cast<std::size_t>(query.k));
    }
    return result;
}

InferenceKind parse_inference(std::string_view name) {
    std::string lower(name);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "copeland") return InferenceKind::copeland;
    if (lower == "local") return InferenceKind::local;
    if (lower == "iterative") return InferenceKind::iterative;
    if (lower == "crowdbt") return InferenceKind::crowdbt;
    throw ConfigError("unknown inference module: " + std::string(name));
}

std::string_view inference_name(InferenceKind kind) {
    switch (kind) {
        case InferenceKind::copeland: return "Copeland";
        case InferenceKind::local: return "Local";
        case InferenceKind::iterative: return "Iterative";
        case InferenceKind::crowdbt: return "CrowdBT";
    }
    throw Error("inference_name: invalid kind");
}

}  // namespace crowdrank
