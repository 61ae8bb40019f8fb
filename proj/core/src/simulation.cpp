#include "crowdrank/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "crowdrank/assignment.hpp"
#include "crowdrank/distance.hpp"
#include "crowdrank/inference.hpp"
#include "crowdrank/prediction.hpp"

namespace crowdrank {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
    throw Error(path + ":" + std::to_string(line) + ": " + what);
}

bool equals_ci(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

// Reads one CSV file into trimmed field rows, checking the header and a fixed
// field count.  No quoting: fields must not contain commas.
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::string_view header,
                                               std::size_t fields,
                                               const char* kind) {
    std::ifstream in(path);
    if (!in) throw Error(std::string("cannot open ") + kind + " file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim(line);
        if (body.empty()) continue;
        if (lineno == 1) {
            if (!equals_ci(body, header)) {
                parse_fail(path, lineno,
                           std::string("expected header '") + std::string(header) + "'");
            }
            continue;
        }
        auto parts = split_fields(body);
        if (parts.size() != fields) {
            parse_fail(path, lineno,
                       "expected " + std::to_string(fields) + " fields, got " +
                           std::to_string(parts.size()));
        }
        std::vector<std::string> row;
        row.reserve(parts.size());
        for (auto p : parts) row.emplace_back(p);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw Error(std::string(kind) + " file has no data rows: " + path);
    }
    return rows;
}

long long parse_ll(const std::string& path, int line, const std::string& field) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        parse_fail(path, line, "not an integer: '" + field + "'");
    }
}

}  // namespace

std::size_t AnswerPool::pair_slot(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto lo = static_cast<std::size_t>(i);
    auto hi = static_cast<std::size_t>(j);
    auto nn = static_cast<std::size_t>(n());
    return lo * (2 * nn - lo - 1) / 2 + (hi - lo - 1);
}

AnswerPool AnswerPool::load_dataset(const std::string& answers_path,
                                    const std::string& truth_path) {
    AnswerPool pool;

    // Truth file: object labels become dense ids in first-seen order; the
    // rank column (smaller = better) fixes the reference ordering.
    auto truth_rows = read_csv(truth_path, "object,rank", 2, "truth");
    std::map<std::string, int> id_of;
    std::vector<long long> rank_of;
    {
        int lineno = 1;
        std::map<long long, int> seen_rank;
        for (const auto& row : truth_rows) {
            ++lineno;
            const std::string& label = row[0];
            if (label.empty()) parse_fail(truth_path, lineno, "empty object label");
            if (id_of.count(label)) {
                parse_fail(truth_path, lineno, "duplicate object '" + label + "'");
            }
            long long rank = parse_ll(truth_path, lineno, row[1]);
            if (seen_rank.count(rank)) {
                parse_fail(truth_path, lineno,
                           "duplicate rank " + std::to_string(rank));
            }
            int id = static_cast<int>(pool.labels_.size());
            id_of.emplace(label, id);
            seen_rank.emplace(rank, id);
            pool.labels_.push_back(label);
            rank_of.push_back(rank);
        }
        pool.truth_.kind = RankKind::complete;
        pool.truth_.n = static_cast<int>(pool.labels_.size());
        for (const auto& [rank, id] : seen_rank) pool.truth_.order.push_back(id);
    }
    if (pool.n() < 2) throw Error("truth file needs at least two objects: " + truth_path);

    std::vector<int> pos(pool.n());
    for (int r = 0; r < pool.n(); ++r) pos[pool.truth_.order[r]] = r;

    auto answer_rows =
        read_csv(answers_path, "worker_id,left,right,winner", 4, "answers");
    pool.pristine_.assign(static_cast<std::size_t>(pool.n()) * (pool.n() - 1) / 2, {});
    std::map<std::string, std::pair<long long, long long>> worker_tally;
    {
        int lineno = 1;
        for (const auto& row : answer_rows) {
            ++lineno;
            auto lookup = [&](const std::string& label) {
                auto it = id_of.find(label);
                if (it == id_of.end()) {
                    parse_fail(answers_path, lineno, "unknown object '" + label + "'");
                }
                return it->second;
            };
            int left = lookup(row[1]);
            int right = lookup(row[2]);
            if (left == right) {
                parse_fail(answers_path, lineno, "left and right are the same object");
            }
            Side winner;
            if (row[3] == row[1]) {
                winner = Side::left;
            } else if (row[3] == row[2]) {
                winner = Side::right;
            } else {
                parse_fail(answers_path, lineno,
                           "winner '" + row[3] + "' matches neither side");
            }
            Answer a{left, right, winner, row[0]};
            pool.pristine_[pool.pair_slot(left, right)].push_back(a);
            auto& tally = worker_tally[row[0]];
            ++tally.second;
            if (pos[a.winner_object()] < pos[a.loser_object()]) ++tally.first;
        }
    }

    double acc_sum = 0.0;
    for (const auto& [worker, tally] : worker_tally) {
        acc_sum += static_cast<double>(tally.first) / static_cast<double>(tally.second);
    }
    pool.mean_rel_ = worker_tally.empty() ? 1.0
                                          : acc_sum / static_cast<double>(worker_tally.size());

    pool.report_.n = pool.n();
    pool.report_.answers = static_cast<long long>(answer_rows.size());
    pool.report_.workers = static_cast<int>(worker_tally.size());
    pool.reset();
    return pool;
}

AnswerPool AnswerPool::generate_synthetic(const SyntheticSpec& spec) {
    AnswerPool pool;
    pool.synthetic_ = true;
    pool.syn_ = spec;

    int n = spec.n;
    if (n == 0) n = static_cast<int>(spec.scores.size());
    if (n < 2) throw ConfigError("synthetic pool needs at least two objects");
    pool.syn_.n = n;
    if (pool.syn_.scores.empty()) {
        pool.syn_.scores.resize(n);
        for (int i = 0; i < n; ++i) {
            pool.syn_.scores[i] = static_cast<double>(n - 1 - i) * spec.score_spread;
        }
    }
    if (static_cast<int>(pool.syn_.scores.size()) != n) {
        throw ConfigError("synthetic scores do not match synthetic_n");
    }
    if (!pool.syn_.scores2.empty() &&
        static_cast<int>(pool.syn_.scores2.size()) != n) {
        throw ConfigError("synthetic second-regime scores do not match synthetic_n");
    }

    // The reference ordering follows the last active regime's scores.
    const ScoreVector& final_scores =
        pool.syn_.scores2.empty() ? pool.syn_.scores : pool.syn_.scores2;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (final_scores[a] != final_scores[b]) return final_scores[a] > final_scores[b];
        return a < b;
    });
    pool.truth_ = RankResult{RankKind::complete, n, std::move(order)};

    pool.labels_.resize(n);
    for (int i = 0; i < n; ++i) pool.labels_[i] = std::to_string(i);
    pool.mean_rel_ = spec.accuracy;
    pool.report_ = LoadReport{n, 0, 0};
    return pool;
}

void AnswerPool::reset() {
    draws_ = 0;
    if (synthetic_) return;
    working_ = pristine_;
    remaining_.resize(working_.size());
    for (std::size_t s = 0; s < working_.size(); ++s) remaining_[s] = working_[s].size();
}

Answer AnswerPool::synthesize(std::pair<int, int> pair, RngStream& rng) const {
    std::vector<int> pos(static_cast<std::size_t>(n()), 0);
    for (int r = 0; r < n(); ++r) pos[truth_.order[r]] = r;
    bool first_better = pos[pair.first] < pos[pair.second];
    bool correct = rng.bernoulli(mean_rel_);
    Side winner = (first_better == correct) ? Side::left : Side::right;
    return Answer{pair.first, pair.second, winner, "@avg"};
}

Answer AnswerPool::draw(std::pair<int, int> pair, RngStream& rng) {
    if (pair.first == pair.second || pair.first < 0 || pair.second < 0 ||
        pair.first >= n() || pair.second >= n()) {
        throw Error("draw: invalid pair");
    }
    ++draws_;
    if (synthetic_) {
        const ScoreVector& regime =
            (!syn_.scores2.empty() && draws_ - 1 >= syn_.switch_after) ? syn_.scores2
                                                                       : syn_.scores;
        double s_left = regime[pair.first];
        double s_right = regime[pair.second];
        double p_left = 1.0 / (1.0 + std::exp(s_right - s_left));
        double acc = syn_.accuracy;
        double p_eff = acc * p_left + (1.0 - acc) * (1.0 - p_left);
        Side winner = rng.bernoulli(p_eff) ? Side::left : Side::right;
        return Answer{pair.first, pair.second, winner, "@sim"};
    }
    std::size_t slot = pair_slot(pair.first, pair.second);
    if (remaining_[slot] == 0) return synthesize(pair, rng);
    auto& bucket = working_[slot];
    std::size_t idx = static_cast<std::size_t>(rng.uniform_index(remaining_[slot]));
    Answer a = bucket[idx];
    std::swap(bucket[idx], bucket[remaining_[slot] - 1]);
    --remaining_[slot];
    return a;
}

AnswerLog cold_start(AnswerPool& pool, RngStream& rng) {
    int n = pool.n();
    AnswerLog log;
    log.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            log.push_back(pool.draw({i, j}, rng));
        }
    }
    return log;
}

namespace {

bool assigner_needs_scores(AssignmentKind kind) {
    return kind == AssignmentKind::greedy || kind == AssignmentKind::complete;
}

TaskList next_tasks(const RankProcess& process, const ComparisonMatrix& m,
                    const Query& query, const CrowdBtOptions& crowdbt, int n_batch,
                    RngStream& rng) {
    switch (process.assignment) {
        case AssignmentKind::random:
            return assign_random(m, n_batch, rng);
        case AssignmentKind::active:
            return assign_active(m, n_batch);
        case AssignmentKind::greedy:
        case AssignmentKind::complete: {
            ScoreVector scores =
                run_inference(process.inference, m, query, crowdbt).scores;
            if (process.assignment == AssignmentKind::greedy) {
                return assign_greedy(scores, m, n_batch);
            }
            return assign_complete(scores, n_batch);
        }
    }
    throw Error("next_tasks: unknown assignment");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec_in, int threads) {
    ExperimentSpec spec = spec_in;
    spec.validate();

    AnswerPool pool = spec.data.kind == DataSpec::Kind::replay
                          ? AnswerPool::load_dataset(spec.data.answers_path,
                                                     spec.data.truth_path)
                          : AnswerPool::generate_synthetic(spec.data.synthetic);
    spec.validate_for_n(pool.n());

    const int n = pool.n();
    const long long budget = spec.config.budget;
    const int n_batch = spec.config.n_batch;
    const int checkpoints = spec.config.checkpoints();
    const std::string proc = process_name(spec.process);
    const PredictionContext ctx = prediction_context(spec);
    const std::size_t n_crit = spec.criteria.size();

    RngStream master(spec.config.seed);
    ExperimentResult out;
    // running sums for the per-criterion average rows:
    // p_sc, p_optimal, delta_sc, used_budget, actual_error
    std::vector<std::array<double, 5>> sums(n_crit, {0, 0, 0, 0, 0});

    for (int rep = 1; rep <= spec.repetitions; ++rep) {
        RngStream rep_stream = master.derive("run", static_cast<uint64_t>(rep));
        RngStream collect = rep_stream.derive("collect");
        pool.reset();

        AnswerLog log;
        log.reserve(static_cast<std::size_t>(budget));
        ComparisonMatrix m(n);
        std::vector<RankResult> sigmas;
        sigmas.reserve(static_cast<std::size_t>(checkpoints));
        std::vector<int> fired(n_crit, 0);

        auto at_checkpoint = [&]() {
            int index = static_cast<int>(log.size()) / n_batch;
            InferenceResult inf =
                run_inference(spec.process.inference, m, spec.config.query, ctx.crowdbt);
            sigmas.push_back(std::move(inf.ranking));
            for (std::size_t c = 0; c < n_crit; ++c) {
                if (fired[c] != 0) continue;
                const CriterionSpec& crit = spec.criteria[c];
                if (crit.kind == CriterionKind::es) {
                    StopReport report =
                        monte_carlo(log, n, ctx, spec.config,
                                    rep_stream.derive("ckpt", static_cast<uint64_t>(index)),
                                    threads, index);
                    if (report.stop) fired[c] = index;
                } else {
                    auto value = crit.kind == CriterionKind::ma
                                     ? moving_average(sigmas, crit.window)
                                     : weighted_moving_average(sigmas, crit.window);
                    if (value && *value < spec.config.theta) fired[c] = index;
                }
            }
        };
        auto ingest = [&](const Answer& a) {
            log.push_back(a);
            m.add(a);
            if (static_cast<long long>(log.size()) % n_batch == 0) at_checkpoint();
        };

        for (const Answer& a : cold_start(pool, collect)) ingest(a);

        TaskList queue;
        std::size_t next_task = 0;
        while (static_cast<long long>(log.size()) < budget) {
            if (next_task == queue.size()) {
                queue = next_tasks(spec.process, m, spec.config.query, ctx.crowdbt,
                                   n_batch, collect);
                next_task = 0;
            }
            ingest(pool.draw(queue[next_task++], collect));
        }

        const int p_optimal = stable_state(sigmas, spec.config.theta);
        const RankResult& sigma_final = sigmas.back();
        for (int i = 1; i <= checkpoints; ++i) {
            out.curve.push_back(CurveRow{
                proc, rep, i,
                rank_distance(sigmas[static_cast<std::size_t>(i) - 1], sigma_final)});
        }
        for (std::size_t c = 0; c < n_crit; ++c) {
            int p_sc = fired[c] != 0 ? fired[c] : checkpoints;
            Metrics metrics =
                evaluate(p_sc, p_optimal, sigmas[static_cast<std::size_t>(p_sc) - 1],
                         sigma_final, spec.config);
            out.rows.push_back(ResultRow{proc, criterion_name(spec.criteria[c]),
                                         spec.config.theta, std::to_string(rep),
                                         static_cast<double>(p_sc),
                                         static_cast<double>(p_optimal),
                                         metrics.delta_sc, metrics.used_budget,
                                         metrics.actual_error});
            sums[c][0] += p_sc;
            sums[c][1] += p_optimal;
            sums[c][2] += metrics.delta_sc;
            sums[c][3] += metrics.used_budget;
            sums[c][4] += metrics.actual_error;
        }
    }

    const double reps = spec.repetitions;
    for (std::size_t c = 0; c < n_crit; ++c) {
        out.rows.push_back(ResultRow{proc, criterion_name(spec.criteria[c]),
                                     spec.config.theta, "avg", sums[c][0] / reps,
                                     sums[c][1] / reps, sums[c][2] / reps,
                                     sums[c][3] / reps, sums[c][4] / reps});
    }
    return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "process,criterion,theta,rep,p_sc,p_optimal,delta_sc,used_budget,actual_error\n";
    for (const auto& r : rows) {
        out << r.process << ',' << r.criterion << ',' << fmt(r.theta) << ',' << r.rep
            << ',' << fmt(r.p_sc) << ',' << fmt(r.p_optimal) << ',' << fmt(r.delta_sc)
            << ',' << fmt(r.used_budget) << ',' << fmt(r.actual_error) << '\n';
    }
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
    out << "process,rep,checkpoint,distance_to_final\n";
    for (const auto& r : rows) {
        out << r.process << ',' << r.rep << ',' << r.checkpoint << ','
            << fmt(r.distance_to_final) << '\n';
    }
}

}  // namespace crowdrank
