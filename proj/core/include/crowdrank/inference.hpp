#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "crowdrank/types.hpp"

namespace crowdrank {

enum class InferenceKind : std::uint8_t { copeland, local, iterative, crowdbt };

struct CrowdBtOptions {
    double lambda = 0.01;     // L2 regularization weight
    // Coordinate sweeps stop once the max per-score change drops below
    // tolerance (or at max_iterations); Newton polishing then drives the
    // gradient itself to zero, well inside the 1e-4 flatness bound.
    double tolerance = 1e-6;
    int max_iterations = 500;
};

struct InferenceResult {
    ScoreVector scores;  // empty for iterative (no global scores exist)
    RankResult ranking;
};

// Copeland: score = wins minus losses over all recorded answers; rank by
// descending score, ties by ascending object index (everywhere below too).
ScoreVector copeland_scores(const ComparisonMatrix& m);
RankResult infer_copeland(const ComparisonMatrix& m);

// Local: majority digraph (edge i->j iff counts[i][j] > counts[j][i]; ties
// give no edge), then score(i) = |W(i)| - |L(i)|
//                              + sum_{u in W(i)} |W(u)| - sum_{u in L(i)} |L(u)|
// where W/L are out/in-neighborhoods (1-hop margin plus wins-of-wins minus
// losses-of-losses).
ScoreVector local_scores(const ComparisonMatrix& m);
RankResult infer_local(const ComparisonMatrix& m);

// Iterative top-k: repeatedly score the survivors with the Local rule
// restricted to answers among them and discard the floor(surviving/2) worst,
// never dropping below k; survivors are finally ordered by their last scores.
RankResult infer_iterative(const ComparisonMatrix& m, int k);

// Bradley-Terry scores by L2-regularized maximum likelihood (coordinate
// Newton); gauge fixed to sum(s) = 0 after convergence.
InferenceResult infer_crowdbt(const ComparisonMatrix& m,
                              const CrowdBtOptions& opt = {});

// Uniform entry point: runs the requested module and shapes the ranking to
// the query (complete, or truncated to top-k).  Iterative accepts only top-k
// queries.
InferenceResult run_inference(InferenceKind kind, const ComparisonMatrix& m,
                              const Query& query,
                              const CrowdBtOptions& opt = {});

InferenceKind parse_inference(std::string_view name);
std::string_view inference_name(InferenceKind kind);

}  // namespace crowdrank
