// Command-line front end: binds key = value experiment configs to the
// library, runs rank processes with stopping criteria in shadow mode, and
// emits result tables, distance curves, and one-shot stop decisions.
//
// Subcommands: run, sweep, oracle, check-stop, convert.  Exit status is 0
// when every requested output was written, 2 for config or IO problems, and
// 1 for anything else.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "crowdrank/config.hpp"
#include "crowdrank/earlystop.hpp"
#include "crowdrank/inference.hpp"
#include "crowdrank/prediction.hpp"
#include "crowdrank/simulation.hpp"
#include "crowdrank/types.hpp"

namespace fs = std::filesystem;

using namespace crowdrank;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string_view field = comma == std::string_view::npos
                                           ? line.substr(start)
                                           : line.substr(start, comma - start);
        out.emplace_back(trim(field));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void file_fail(const std::string& path, int line, const std::string& msg) {
    throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

long long parse_int_field(const std::string& path, int line, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        file_fail(path, line, "expected an integer, got: " + v);
    return out;
}

double parse_double_field(const std::string& path, int line, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    file_fail(path, line, "expected a number, got: " + v);
}

// Reads a headered CSV, checks the header (case-insensitive), and returns the
// data rows with exactly the expected field count.
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& header,
                                               const char* kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + kind + " file: " + path);
    const std::vector<std::string> want = split_fields(header);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (!saw_header) {
            if (fields.size() != want.size())
                file_fail(path, line_no, "expected header '" + header + "'");
            for (std::size_t i = 0; i < want.size(); ++i)
                if (lower(fields[i]) != want[i])
                    file_fail(path, line_no, "expected header '" + header + "'");
            saw_header = true;
            continue;
        }
        if (fields.size() != want.size())
            file_fail(path, line_no,
                      "expected " + std::to_string(want.size()) + " fields, got " +
                          std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    if (!saw_header || rows.empty())
        throw ConfigError(std::string(kind) + " file has no data rows: " + path);
    return rows;
}

// ---------------------------------------------------------------------------
// Options: the experiment spec plus the two tool-level knobs (threads and the
// output directory), which share the config-file syntax so every flag keeps a
// config equivalent.

struct Options {
    ExperimentSpec spec;
    int threads = 1;
    std::string out_dir;
};

void apply_tool_key(Options& opt, std::string_view key, std::string_view value) {
    const std::string k = lower(trim(key));
    if (k == "threads") {
        int t = 0;
        const std::string_view v = trim(value);
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), t);
        if (ec != std::errc{} || ptr != v.data() + v.size() || t < 1)
            throw ConfigError("threads must be a positive integer, got: " +
                              std::string(value));
        opt.threads = t;
    } else if (k == "out_dir") {
        opt.out_dir = std::string(trim(value));
    } else {
        apply_key(opt.spec, key, value);
    }
}

// Same file format as parse_experiment_file, with the tool-level keys peeled
// off before the library sees the rest.
void load_tool_config(const std::string& path, Options& opt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = line;
        const std::size_t hash = s.find('#');
        if (hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos)
            file_fail(path, line_no, "expected 'key = value'");
        try {
            apply_tool_key(opt, s.substr(0, eq), s.substr(eq + 1));
        } catch (const ConfigError& e) {
            file_fail(path, line_no, e.what());
        }
    }
}

// Flags shared by the experiment-driving subcommands.  Option pointers let
// the resolver distinguish "absent" from "explicitly the default".
struct CommonFlags {
    std::string config;
    std::string process;
    std::string out;
    std::vector<std::string> sets;
    std::vector<std::string> criteria;
    std::uint64_t seed = 0;
    double theta = 0.0;
    int threads = 0;

    CLI::Option* o_process = nullptr;
    CLI::Option* o_theta = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_threads = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_criterion = nullptr;
};

void add_common_flags(CLI::App* sub, CommonFlags& f, bool config_required) {
    CLI::Option* c = sub->add_option("--config", f.config,
                                     "experiment config file (key = value lines)");
    if (config_required) c->required();
    f.o_process = sub->add_option("--process", f.process,
                                  "rank process name, e.g. Local-Greedy");
    f.o_criterion = sub->add_option(
        "--criterion", f.criteria,
        "stopping criterion, e.g. ES or MA(5); repeatable, replaces the config set");
    f.o_theta = sub->add_option("--theta", f.theta, "accuracy tolerance in (0,1)");
    f.o_seed = sub->add_option("--seed", f.seed, "master random seed");
    f.o_threads = sub->add_option("--threads", f.threads,
                                  "worker cap for Monte-Carlo sampling");
    f.o_out = sub->add_option("--out", f.out,
                              "output directory (default $CROWDRANK_OUT, else .)");
    sub->add_option("--set", f.sets, "extra key=value override; repeatable");
}

// Precedence per field: flag > config file > default; the output directory
// additionally falls back to $CROWDRANK_OUT before the working directory.
Options resolve_options(const CommonFlags& f) {
    Options opt;
    if (!f.config.empty()) load_tool_config(f.config, opt);
    for (const std::string& kv : f.sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got: " + kv);
        apply_tool_key(opt, std::string_view(kv).substr(0, eq),
                       std::string_view(kv).substr(eq + 1));
    }
    if (f.o_process->count()) opt.spec.process = parse_process(f.process);
    if (f.o_criterion->count()) {
        opt.spec.criteria.clear();
        for (const std::string& c : f.criteria)
            opt.spec.criteria.push_back(parse_criterion(c));
    }
    if (f.o_theta->count()) opt.spec.config.theta = f.theta;
    if (f.o_seed->count()) opt.spec.config.seed = f.seed;
    if (f.o_threads->count()) {
        if (f.threads < 1) throw ConfigError("--threads must be >= 1");
        opt.threads = f.threads;
    }
    if (f.o_out->count()) opt.out_dir = f.out;
    if (opt.out_dir.empty())
        if (const char* env = std::getenv("CROWDRANK_OUT")) opt.out_dir = env;
    if (opt.out_dir.empty()) opt.out_dir = ".";
    return opt;
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + dir);
    return fs::path(dir);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    return out;
}

void print_summary_table(const std::vector<ResultRow>& rows) {
    std::printf("%-18s %-8s %8s %9s %10s %9s %12s %13s\n", "process", "criterion",
                "theta", "p_sc", "p_optimal", "delta_sc", "used_budget",
                "actual_error");
    for (const ResultRow& r : rows) {
        if (r.rep != "avg") continue;
        std::printf("%-18s %-8s %8.4f %9.3f %10.3f %9.4f %12.4f %13.6f\n",
                    r.process.c_str(), r.criterion.c_str(), r.theta, r.p_sc,
                    r.p_optimal, r.delta_sc, r.used_budget, r.actual_error);
    }
}

// ---------------------------------------------------------------------------
// Answer-log and truth readers for the log-driven subcommands.  The tool maps
// labels through a truth file when one is given; otherwise labels must be the
// dense integer ids the simulator writes.

struct TruthFile {
    std::vector<std::string> labels;       // first-seen order = object ids
    std::map<std::string, int> ids;
    std::vector<std::pair<long long, int>> by_rank;  // (rank, id), ascending
};

TruthFile read_truth_file(const std::string& path) {
    TruthFile t;
    std::map<long long, int> rank_seen;
    int line_no = 1;  // header is line 1; rows follow in file order
    for (const auto& row : read_csv(path, "object,rank", "truth")) {
        ++line_no;
        const std::string& label = row[0];
        if (t.ids.count(label)) file_fail(path, line_no, "duplicate object: " + label);
        const long long rank = parse_int_field(path, line_no, row[1]);
        if (rank_seen.count(rank))
            file_fail(path, line_no, "duplicate rank: " + row[1]);
        const int id = static_cast<int>(t.labels.size());
        t.ids.emplace(label, id);
        t.labels.push_back(label);
        rank_seen.emplace(rank, id);
        t.by_rank.emplace_back(rank, id);
    }
    std::sort(t.by_rank.begin(), t.by_rank.end());
    return t;
}

int resolve_object(const std::string& path, int line, const std::string& label,
                   const TruthFile* truth, int* max_id) {
    if (truth) {
        const auto it = truth->ids.find(label);
        if (it == truth->ids.end()) file_fail(path, line, "unknown object: " + label);
        return it->second;
    }
    const long long id = parse_int_field(path, line, label);
    if (id < 0) file_fail(path, line, "object ids must be >= 0, got: " + label);
    *max_id = std::max(*max_id, static_cast<int>(id));
    return static_cast<int>(id);
}

// Reads a canonical answer log.  With no truth file the labels themselves
// must be integer ids; *n_out then becomes max id + 1 unless the caller
// already fixed it.
AnswerLog read_answer_log(const std::string& path, const TruthFile* truth,
                          int* n_out) {
    AnswerLog log;
    int max_id = -1;
    int line_no = 1;
    for (const auto& row : read_csv(path, "worker_id,left,right,winner", "answers")) {
        ++line_no;
        Answer a;
        a.worker = row[0];
        a.left = resolve_object(path, line_no, row[1], truth, &max_id);
        a.right = resolve_object(path, line_no, row[2], truth, &max_id);
        if (a.left == a.right)
            file_fail(path, line_no, "answer pairs an object with itself");
        if (row[3] == row[1]) a.winner = Side::left;
        else if (row[3] == row[2]) a.winner = Side::right;
        else file_fail(path, line_no, "winner '" + row[3] + "' matches neither side");
        log.push_back(std::move(a));
    }
    if (truth) {
        *n_out = static_cast<int>(truth->labels.size());
    } else if (*n_out == 0) {
        *n_out = max_id + 1;
    } else if (max_id >= *n_out) {
        throw ConfigError(path + ": object id " + std::to_string(max_id) +
                          " outside --n " + std::to_string(*n_out));
    }
    return log;
}

// Validation for the log-driven subcommands reuses the spec checks by
// standing in a synthetic pool of the resolved size; no pool is ever built.
void validate_against_n(ExperimentSpec& spec, int n) {
    spec.data.kind = DataSpec::Kind::synthetic;
    spec.data.synthetic.n = n;
    spec.validate();
    spec.validate_for_n(n);
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const CommonFlags& flags) {
    Options opt = resolve_options(flags);
    opt.spec.validate();
    const ExperimentResult result = run_experiment(opt.spec, opt.threads);

    const fs::path dir = prepare_out_dir(opt.out_dir);
    const fs::path results_path = dir / "results.csv";
    const fs::path curve_path = dir / "curve.csv";
    {
        std::ofstream out = open_output(results_path);
        write_results_csv(out, result.rows);
    }
    {
        std::ofstream out = open_output(curve_path);
        write_curve_csv(out, result.curve);
    }
    print_summary_table(result.rows);
    std::fprintf(stderr, "wrote %s\n", results_path.string().c_str());
    std::fprintf(stderr, "wrote %s\n", curve_path.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags {
    std::string axis;
    std::string values;
};

const char* axis_config_key(const std::string& axis) {
    const std::string a = lower(trim(axis));
    if (a == "k") return "k";
    if (a == "n_batch") return "n_batch";
    if (a == "b") return "budget";
    if (a == "theta") return "theta";
    throw ConfigError("sweep axis must be one of k, n_batch, B, theta; got: " + axis);
}

int cmd_sweep(const CommonFlags& flags, const SweepFlags& sweep) {
    const Options base = resolve_options(flags);
    const char* key = axis_config_key(sweep.axis);

    std::vector<std::string> items;
    for (const std::string& item : split_fields(sweep.values))
        if (!item.empty()) items.push_back(item);
    if (items.empty()) throw ConfigError("sweep needs at least one value");

    std::ostringstream body;
    std::vector<std::pair<std::string, std::string>> skipped;  // value, reason
    for (const std::string& item : items) {
        ExperimentSpec spec = base.spec;
        ExperimentResult result;
        try {
            apply_key(spec, key, item);
            spec.validate();
            result = run_experiment(spec, base.threads);
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "warning: skipping %s = %s: %s\n", key,
                         item.c_str(), e.what());
            skipped.emplace_back(item, e.what());
            continue;
        }
        char num[64];
        for (const ResultRow& r : result.rows) {
            body << key << ',' << item << ',' << r.process << ',' << r.criterion;
            std::snprintf(num, sizeof num, ",%.6f,", r.theta);
            body << num << r.rep;
            std::snprintf(num, sizeof num, ",%.6f,%.6f,%.6f,%.6f,%.6f", r.p_sc,
                          r.p_optimal, r.delta_sc, r.used_budget, r.actual_error);
            body << num << '\n';
        }
        std::printf("== %s = %s ==\n", key, item.c_str());
        print_summary_table(result.rows);
    }

    const fs::path dir = prepare_out_dir(base.out_dir);
    const fs::path sweep_path = dir / "sweep.csv";
    const fs::path skipped_path = dir / "sweep_skipped.csv";
    {
        std::ofstream out = open_output(sweep_path);
        out << "axis,value,process,criterion,theta,rep,p_sc,p_optimal,delta_sc,"
               "used_budget,actual_error\n"
            << body.str();
    }
    {
        // Reasons may contain commas; the sidecar swaps them for ';' to stay
        // a plain three-column CSV.
        std::ofstream out = open_output(skipped_path);
        out << "axis,value,reason\n";
        for (auto& [value, reason] : skipped) {
            std::string clean = reason;
            std::replace(clean.begin(), clean.end(), ',', ';');
            out << key << ',' << value << ',' << clean << '\n';
        }
    }
    std::fprintf(stderr, "wrote %s\n", sweep_path.string().c_str());
    std::fprintf(stderr, "wrote %s\n", skipped_path.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleFlags {
    std::string curve;
    std::string log;
    std::string truth;
    int n = 0;
};

void print_oracle_line(const std::string& process, int rep, int p_optimal,
                       int checkpoints) {
    const double savings =
        100.0 * (1.0 - static_cast<double>(p_optimal) / checkpoints);
    std::printf("%s rep %d: p_optimal = %d / %d, savings = %.1f%%\n",
                process.c_str(), rep, p_optimal, checkpoints, savings);
}

// Stable state read off a distance-to-final curve: the smallest checkpoint l
// with every later value (l included) at most theta.  The final checkpoint is
// distance zero by construction, so l is always well defined.
int stable_from_curve(const std::vector<double>& values, double theta) {
    int l = 1;
    for (int j = static_cast<int>(values.size()); j >= 1; --j) {
        if (values[static_cast<std::size_t>(j) - 1] > theta) {
            l = j + 1;
            break;
        }
    }
    return std::min(l, static_cast<int>(values.size()));
}

int cmd_oracle_curve(const std::string& path, double theta) {
    struct Group {
        std::string process;
        int rep = 0;
        std::vector<std::pair<int, double>> points;
    };
    std::vector<Group> groups;
    std::map<std::pair<std::string, int>, std::size_t> index;
    int line_no = 1;
    for (const auto& row : read_csv(path, "process,rep,checkpoint,distance_to_final",
                                    "curve")) {
        ++line_no;
        const int rep = static_cast<int>(parse_int_field(path, line_no, row[1]));
        const int ckpt = static_cast<int>(parse_int_field(path, line_no, row[2]));
        const double dist = parse_double_field(path, line_no, row[3]);
        const auto key = std::make_pair(row[0], rep);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, groups.size()).first;
            groups.push_back(Group{row[0], rep, {}});
        }
        groups[it->second].points.emplace_back(ckpt, dist);
    }

    std::string current;
    double savings_sum = 0.0;
    int reps = 0;
    auto flush_mean = [&]() {
        if (reps > 0)
            std::printf("%s mean savings = %.1f%% over %d repetitions\n",
                        current.c_str(), savings_sum / reps, reps);
        savings_sum = 0.0;
        reps = 0;
    };
    for (Group& g : groups) {
        std::sort(g.points.begin(), g.points.end());
        std::vector<double> values;
        values.reserve(g.points.size());
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            if (g.points[i].first != static_cast<int>(i) + 1)
                throw ConfigError("incomplete curve for " + g.process + " rep " +
                                  std::to_string(g.rep) + " in " + path +
                                  ": checkpoints must run 1..N");
            values.push_back(g.points[i].second);
        }
        if (g.process != current) {
            flush_mean();
            current = g.process;
        }
        const int l = stable_from_curve(values, theta);
        print_oracle_line(g.process, g.rep, l, static_cast<int>(values.size()));
        savings_sum += 100.0 * (1.0 - static_cast<double>(l) / values.size());
        ++reps;
    }
    flush_mean();
    return 0;
}

int cmd_oracle_log(const CommonFlags& flags, const OracleFlags& oracle) {
    Options opt = resolve_options(flags);
    if (flags.config.empty())
        throw ConfigError("oracle over an answer log needs --config");

    TruthFile truth;
    const TruthFile* truth_ptr = nullptr;
    if (!oracle.truth.empty()) {
        truth = read_truth_file(oracle.truth);
        truth_ptr = &truth;
    }
    int n = oracle.n;
    const AnswerLog log = read_answer_log(oracle.log, truth_ptr, &n);
    validate_against_n(opt.spec, n);

    const ProcessConfig& cfg = opt.spec.config;
    if (static_cast<long long>(log.size()) != cfg.budget)
        throw ConfigError("answer log holds " + std::to_string(log.size()) +
                          " answers but the config budget is " +
                          std::to_string(cfg.budget) +
                          "; the oracle needs a completed process");

    const PredictionContext ctx = prediction_context(opt.spec);
    ComparisonMatrix m(n);
    std::vector<RankResult> sigmas;
    for (std::size_t i = 0; i < log.size(); ++i) {
        m.add(log[i]);
        if ((i + 1) % static_cast<std::size_t>(cfg.n_batch) == 0)
            sigmas.push_back(
                run_inference(opt.spec.process.inference, m, cfg.query, ctx.crowdbt)
                    .ranking);
    }
    const int p_optimal = stable_state(sigmas, cfg.theta);
    print_oracle_line(process_name(opt.spec.process), 1, p_optimal,
                      cfg.checkpoints());
    return 0;
}

// ---------------------------------------------------------------------------
// check-stop

int cmd_check_stop(const CommonFlags& flags, const OracleFlags& input) {
    Options opt = resolve_options(flags);

    TruthFile truth;
    const TruthFile* truth_ptr = nullptr;
    if (!input.truth.empty()) {
        truth = read_truth_file(input.truth);
        truth_ptr = &truth;
    }
    int n = input.n;
    const AnswerLog log = read_answer_log(input.log, truth_ptr, &n);
    validate_against_n(opt.spec, n);

    const ProcessConfig& cfg = opt.spec.config;
    if (static_cast<long long>(log.size()) > cfg.budget)
        throw ConfigError("answer log holds " + std::to_string(log.size()) +
                          " answers, more than the budget " +
                          std::to_string(cfg.budget));
    if (static_cast<long long>(log.size()) % cfg.n_batch != 0)
        throw ConfigError("answer log holds " + std::to_string(log.size()) +
                          " answers, not a multiple of n_batch " +
                          std::to_string(cfg.n_batch));

    const int checkpoint = static_cast<int>(log.size()) / cfg.n_batch;
    const StopReport report =
        monte_carlo(log, n, prediction_context(opt.spec), cfg,
                    RngStream(cfg.seed).derive("check-stop"), opt.threads,
                    checkpoint);
    std::fputs(report.text_record().c_str(), stdout);
    return 0;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertFlags {
    std::string answers;
    std::string truth;
    std::string out;
};

// Normalizes loose input files onto the canonical schemas: winners given as
// 'left'/'right' keywords become object labels, ranks keep their values but
// rows are re-emitted in rank order, and everything is validated against the
// truth file before writing.
int cmd_convert(const ConvertFlags& flags) {
    std::string out_dir = flags.out;
    if (out_dir.empty())
        if (const char* env = std::getenv("CROWDRANK_OUT")) out_dir = env;
    if (out_dir.empty()) out_dir = ".";

    const TruthFile truth = read_truth_file(flags.truth);

    struct Row {
        std::string worker, left, right, winner;
    };
    std::vector<Row> rows;
    int line_no = 1;
    for (const auto& row :
         read_csv(flags.answers, "worker_id,left,right,winner", "answers")) {
        ++line_no;
        Row r{row[0], row[1], row[2], row[3]};
        if (!truth.ids.count(r.left))
            file_fail(flags.answers, line_no, "unknown object: " + r.left);
        if (!truth.ids.count(r.right))
            file_fail(flags.answers, line_no, "unknown object: " + r.right);
        if (r.left == r.right)
            file_fail(flags.answers, line_no, "answer pairs an object with itself");
        const std::string w = lower(r.winner);
        if (w == "left" || w == "l") r.winner = r.left;
        else if (w == "right" || w == "r") r.winner = r.right;
        else if (r.winner != r.left && r.winner != r.right)
            file_fail(flags.answers, line_no,
                      "winner '" + r.winner + "' matches neither side");
        rows.push_back(std::move(r));
    }

    const fs::path dir = prepare_out_dir(out_dir);
    const fs::path answers_path = dir / "answers.csv";
    const fs::path truth_path = dir / "truth.csv";
    std::error_code ec;
    if (fs::equivalent(answers_path, fs::path(flags.answers), ec) ||
        fs::equivalent(truth_path, fs::path(flags.truth), ec))
        throw ConfigError("output directory would overwrite an input file: " +
                          dir.string());

    {
        std::ofstream out = open_output(truth_path);
        out << "object,rank\n";
        for (const auto& [rank, id] : truth.by_rank)
            out << truth.labels[static_cast<std::size_t>(id)] << ',' << rank << '\n';
    }
    {
        std::ofstream out = open_output(answers_path);
        out << "worker_id,left,right,winner\n";
        for (const Row& r : rows)
            out << r.worker << ',' << r.left << ',' << r.right << ',' << r.winner
                << '\n';
    }

    // Round-trip through the library loader to prove the output is canonical.
    const AnswerPool pool =
        AnswerPool::load_dataset(answers_path.string(), truth_path.string());
    const LoadReport& report = pool.report();
    std::printf("converted: n = %d objects, %lld answers, %d workers, "
                "mean reliability = %.4f\n",
                report.n, report.answers, report.workers,
                pool.mean_reliability());
    std::fprintf(stderr, "wrote %s\n", answers_path.string().c_str());
    std::fprintf(stderr, "wrote %s\n", truth_path.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crowdsourced pairwise ranking experiments with early stopping"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run_sub = app.add_subcommand(
        "run", "run one experiment and write results.csv + curve.csv");
    add_common_flags(run_sub, run_flags, true);

    CommonFlags sweep_common;
    SweepFlags sweep_flags;
    CLI::App* sweep_sub = app.add_subcommand(
        "sweep", "repeat an experiment along one parameter axis");
    add_common_flags(sweep_sub, sweep_common, true);
    sweep_sub->add_option("--axis", sweep_flags.axis, "k, n_batch, B, or theta")
        ->required();
    sweep_sub
        ->add_option("--values", sweep_flags.values, "comma-separated axis values")
        ->required();

    CommonFlags oracle_common;
    OracleFlags oracle_flags;
    CLI::App* oracle_sub = app.add_subcommand(
        "oracle", "offline stable state and savings from a curve or answer log");
    add_common_flags(oracle_sub, oracle_common, false);
    CLI::Option* o_curve = oracle_sub->add_option(
        "--curve", oracle_flags.curve, "distance curve CSV from a finished run");
    CLI::Option* o_log = oracle_sub->add_option(
        "--log", oracle_flags.log, "completed answer log (needs --config)");
    oracle_sub->add_option("--truth", oracle_flags.truth,
                           "truth CSV mapping labels to object ids");
    oracle_sub->add_option("--n", oracle_flags.n, "object count for integer labels");
    o_curve->excludes(o_log);

    CommonFlags check_common;
    OracleFlags check_input;
    CLI::App* check_sub = app.add_subcommand(
        "check-stop", "one-shot stop decision on a partial answer log");
    add_common_flags(check_sub, check_common, true);
    check_sub->add_option("--log", check_input.log, "batch-aligned answer log")
        ->required();
    check_sub->add_option("--truth", check_input.truth,
                          "truth CSV mapping labels to object ids");
    check_sub->add_option("--n", check_input.n, "object count for integer labels");

    ConvertFlags convert_flags;
    CLI::App* convert_sub = app.add_subcommand(
        "convert", "normalize loose answer/truth files onto the canonical schemas");
    convert_sub->add_option("--answers", convert_flags.answers, "answers CSV")
        ->required();
    convert_sub->add_option("--truth", convert_flags.truth, "truth CSV")->required();
    convert_sub->add_option("--out", convert_flags.out,
                            "output directory (default $CROWDRANK_OUT, else .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad flags are user errors
    }

    try {
        if (run_sub->parsed()) return cmd_run(run_flags);
        if (sweep_sub->parsed()) return cmd_sweep(sweep_common, sweep_flags);
        if (oracle_sub->parsed()) {
            if (!oracle_flags.curve.empty()) {
                if (!oracle_common.o_theta->count())
                    throw ConfigError("oracle over a curve needs --theta");
                return cmd_oracle_curve(oracle_flags.curve, oracle_common.theta);
            }
            if (!oracle_flags.log.empty())
                return cmd_oracle_log(oracle_common, oracle_flags);
            throw ConfigError("oracle needs --curve or --log");
        }
        if (check_sub->parsed()) return cmd_check_stop(check_common, check_input);
        if (convert_sub->parsed()) return cmd_convert(convert_flags);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
