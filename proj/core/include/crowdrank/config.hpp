#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crowdrank/assignment.hpp"
#include "crowdrank/inference.hpp"
#include "crowdrank/types.hpp"

namespace crowdrank {

// A rank process pairs one inference module with one assignment module, named
// "Inference-Assignment" (e.g. Local-Greedy, CrowdBT-CrowdBT).
struct RankProcess {
    InferenceKind inference = InferenceKind::copeland;
    AssignmentKind assignment = AssignmentKind::random;

    bool operator==(const RankProcess&) const = default;
};

RankProcess parse_process(std::string_view name);
std::string process_name(const RankProcess& process);

enum class CriterionKind : std::uint8_t { es, ma, wma };

// Stopping criterion: ES, or a windowed baseline MA(w) / WMA(w).
struct CriterionSpec {
    CriterionKind kind = CriterionKind::es;
    int window = 0;  // baselines only

    bool operator==(const CriterionSpec&) const = default;
};

CriterionSpec parse_criterion(std::string_view text);
std::string criterion_name(const CriterionSpec& spec);

enum class RelStrategy : std::uint8_t { constant, majority, ranking };

RelStrategy parse_rel_strategy(std::string_view name);
std::string_view rel_strategy_name(RelStrategy strategy);

// Knobs of one rank process run.  validate() fills the t default (theta/10)
// and rejects inconsistent values; call it before use.
struct ProcessConfig {
    long long budget = 0;            // total answers B, cold start included
    int n_batch = 0;                 // answers per batch
    double theta = 0.0;              // accuracy tolerance, in (0,1)
    double alpha_prime = 0.05;       // confidence complement, in (0,1)
    double t = 0.0;                  // Hoeffding margin; 0 = default theta/10
    Query query;
    std::uint64_t seed = 0;
    long long n_sample_override = 0;  // 0 = use the exact bound

    int checkpoints() const { return static_cast<int>(budget / n_batch); }
    void validate();
};

// Virtual pool: answers follow the Bradley-Terry model on the true scores and
// are flipped with probability 1 - accuracy.  A second score set switched in
// after switch_after draws creates the two-regime pools used for oscillation
// experiments.
struct SyntheticSpec {
    int n = 0;
    ScoreVector scores;         // empty = descending ladder built from spread
    double score_spread = 1.0;  // ladder gap when scores is empty
    double accuracy = 1.0;
    ScoreVector scores2;        // optional second regime
    long long switch_after = 0;
};

struct DataSpec {
    enum class Kind : std::uint8_t { synthetic, replay } kind = Kind::synthetic;
    std::string answers_path;  // replay
    std::string truth_path;    // replay
    SyntheticSpec synthetic;
};

struct ExperimentSpec {
    RankProcess process;
    ProcessConfig config;
    std::vector<CriterionSpec> criteria;
    int repetitions = 10;
    DataSpec data;
    RelStrategy rel_strategy = RelStrategy::ranking;
    double rel_constant = 1.0;
    double crowdbt_lambda = 0.01;

    // Static checks; data-dependent ones (k <= n etc.) live in validate_for_n.
    void validate();
    void validate_for_n(int n) const;
};

// key = value text format, one pair per line, '#' comments.  Keys mirror the
// CLI flags; see apply_key for the full list.  Later lines win.
ExperimentSpec parse_experiment_file(const std::string& path);

// Applies one key/value pair (shared by the file parser and CLI overrides).
// Unknown keys raise ConfigError.
void apply_key(ExperimentSpec& spec, std::string_view key,
               std::string_view value);

}  // namespace crowdrank
