#include "crowdrank/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

namespace crowdrank {

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

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    const std::string_view v = trim(value);
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("config: bad value for '" + std::string(key) +
                          "': " + std::string(value));
    return out;
}

ScoreVector parse_scores(std::string_view key, std::string_view value) {
    ScoreVector out;
    std::string_view rest = value;
    while (!rest.empty()) {
        const std::size_t comma = rest.find(',');
        const std::string_view item =
            comma == std::string_view::npos ? rest : rest.substr(0, comma);
        out.push_back(parse_number<double>(key, item));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty())
        throw ConfigError("config: empty score list for '" + std::string(key) + "'");
    return out;
}

Query parse_query(std::string_view value) {
    const std::string v = lower(trim(value));
    if (v == "complete" || v == "complete-ranking")
        return Query{RankKind::complete, 0};
    if (v == "top-k" || v == "topk") return Query{RankKind::topk, 0};
    throw ConfigError("config: query must be 'complete' or 'top-k', got: " +
                      std::string(value));
}

}  // namespace

RankProcess parse_process(std::string_view name) {
    const std::string_view v = trim(name);
    const std::size_t dash = v.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 >= v.size())
        throw ConfigError(
            "process name must look like 'Inference-Assignment', got: " +
            std::string(name));
    return RankProcess{parse_inference(v.substr(0, dash)),
                       parse_assignment(v.substr(dash + 1))};
}

std::string process_name(const RankProcess& process) {
    return std::string(inference_name(process.inference)) + "-" +
           std::string(assignment_name(process.assignment));
}

CriterionSpec parse_criterion(std::string_view text) {
    const std::string_view v = trim(text);
    const std::size_t open = v.find('(');
    const std::string name = lower(open == std::string_view::npos ? v : v.substr(0, open));
    if (name == "es") {
        if (open != std::string_view::npos)
            throw ConfigError("criterion ES takes no window");
        return CriterionSpec{CriterionKind::es, 0};
    }
    if (name != "ma" && name != "wma")
        throw ConfigError("unknown criterion: " + std::string(text));
    if (open == std::string_view::npos || v.back() != ')')
        throw ConfigError("criterion " + name + " requires a window, e.g. MA(5)");
    const int window = parse_number<int>(
        "criterion window", v.substr(open + 1, v.size() - open - 2));
    if (window < 1) throw ConfigError("criterion window must be >= 1");
    return CriterionSpec{name == "ma" ? CriterionKind::ma : CriterionKind::wma,
                         window};
}

std::string criterion_name(const CriterionSpec& spec) {
    switch (spec.kind) {
        case CriterionKind::es: return "ES";
        case CriterionKind::ma: return "MA(" + std::to_string(spec.window) + ")";
        case CriterionKind::wma: return "WMA(" + std::to_string(spec.window) + ")";
    }
    throw Error("criterion_name: invalid kind");
}

RelStrategy parse_rel_strategy(std::string_view name) {
    const std::string v = lower(trim(name));
    if (v == "constant") return RelStrategy::constant;
    if (v == "majority" || v == "majority-agreement") return RelStrategy::majority;
    if (v == "ranking" || v == "ranking-agreement") return RelStrategy::ranking;
    throw ConfigError("unknown rel strategy: " + std::string(name));
}

std::string_view rel_strategy_name(RelStrategy strategy) {
    switch (strategy) {
        case RelStrategy::constant: return "constant";
        case RelStrategy::majority: return "majority-agreement";
        case RelStrategy::ranking: return "ranking-agreement";
    }
    throw Error("rel_strategy_name: invalid strategy");
}

void ProcessConfig::validate() {
    if (budget <= 0) throw ConfigError("budget must be positive");
    if (n_batch <= 0) throw ConfigError("n_batch must be positive");
    if (budget % n_batch != 0)
        throw ConfigError("budget " + std::to_string(budget) +
                          " is not divisible by n_batch " + std::to_string(n_batch));
    if (theta <= 0.0 || theta >= 1.0)
        throw ConfigError("theta must lie in (0, 1)");
    if (alpha_prime <= 0.0 || alpha_prime >= 1.0)
        throw ConfigError("alpha_prime must lie in (0, 1)");
    if (t == 0.0) t = theta / 10.0;
    if (t <= 0.0 || t >= theta)
        throw ConfigError("t must lie in (0, theta)");
    if (query.kind == RankKind::topk && query.k < 2)
        throw ConfigError("top-k query needs k >= 2");
    if (n_sample_override < 0)
        throw ConfigError("n_sample_override must be >= 0");
}

void ExperimentSpec::validate() {
    config.validate();
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    for (std::size_t a = 0; a < criteria.size(); ++a)
        for (std::size_t b = a + 1; b < criteria.size(); ++b)
            if (criteria[a] == criteria[b])
                throw ConfigError("duplicate criterion: " + criterion_name(criteria[a]));
    if (rel_constant < 0.5 || rel_constant > 1.0)
        throw ConfigError("rel_constant must lie in [0.5, 1]");
    if (crowdbt_lambda <= 0.0)
        throw ConfigError("crowdbt_lambda must be positive");
    if (config.query.kind == RankKind::complete) {
        if (process.inference == InferenceKind::iterative)
            throw ConfigError("Iterative inference requires a top-k query");
        if (process.assignment == AssignmentKind::complete)
            throw ConfigError("Complete assignment requires a top-k query");
    }
    if (process.inference == InferenceKind::iterative &&
        (process.assignment == AssignmentKind::greedy ||
         process.assignment == AssignmentKind::complete))
        throw ConfigError(
            "Iterative inference provides no scores for the " +
            std::string(assignment_name(process.assignment)) + " assigner");
    if (data.kind == DataSpec::Kind::synthetic) {
        SyntheticSpec& syn = data.synthetic;
        if (!syn.scores.empty()) {
            if (syn.n == 0) syn.n = static_cast<int>(syn.scores.size());
            if (syn.n != static_cast<int>(syn.scores.size()))
                throw ConfigError("synthetic_n disagrees with synthetic_scores size");
        }
        if (syn.n < 2) throw ConfigError("synthetic pool needs n >= 2");
        if (syn.scores.empty() && syn.score_spread <= 0.0)
            throw ConfigError("synthetic_score_spread must be positive");
        if (syn.accuracy < 0.0 || syn.accuracy > 1.0)
            throw ConfigError("synthetic_accuracy must lie in [0, 1]");
        if (!syn.scores2.empty()) {
            if (static_cast<int>(syn.scores2.size()) != syn.n)
                throw ConfigError("synthetic_scores2 size disagrees with n");
            if (syn.switch_after < 1)
                throw ConfigError("synthetic_switch_after must be >= 1 with a second regime");
        }
    } else {
        if (data.answers_path.empty() || data.truth_path.empty())
            throw ConfigError("replay data needs both answers and truth paths");
    }
}

void ExperimentSpec::validate_for_n(int n) const {
    if (n < 2) throw ConfigError("need at least two objects");
    if (config.query.kind == RankKind::topk && config.query.k > n)
        throw ConfigError("top-k query with k = " + std::to_string(config.query.k) +
                          " but only " + std::to_string(n) + " objects");
    const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
    if (pairs > config.budget)
        throw ConfigError("budget " + std::to_string(config.budget) +
                          " cannot cover the cold start of " +
                          std::to_string(pairs) + " answers");
    if ((process.assignment == AssignmentKind::greedy ||
         process.assignment == AssignmentKind::active) &&
        config.n_batch > pairs)
        throw ConfigError("n_batch exceeds the number of distinct pairs");
}

void apply_key(ExperimentSpec& spec, std::string_view key,
               std::string_view value) {
    const std::string k = lower(trim(key));
    const std::string_view v = trim(value);
    if (k == "process") {
        spec.process = parse_process(v);
    } else if (k == "query") {
        const int keep = spec.config.query.k;
        spec.config.query = parse_query(v);
        spec.config.query.k = keep;
    } else if (k == "k") {
        spec.config.query.k = parse_number<int>(k, v);
    } else if (k == "budget") {
        spec.config.budget = parse_number<long long>(k, v);
    } else if (k == "n_batch") {
        spec.config.n_batch = parse_number<int>(k, v);
    } else if (k == "theta") {
        spec.config.theta = parse_number<double>(k, v);
    } else if (k == "alpha_prime") {
        spec.config.alpha_prime = parse_number<double>(k, v);
    } else if (k == "t") {
        spec.config.t = parse_number<double>(k, v);
    } else if (k == "seed") {
        spec.config.seed = parse_number<std::uint64_t>(k, v);
    } else if (k == "n_sample_override") {
        spec.config.n_sample_override = parse_number<long long>(k, v);
    } else if (k == "criteria") {
        spec.criteria.clear();
        std::string_view rest = v;
        while (!rest.empty()) {
            const std::size_t comma = rest.find(',');
            const std::string_view item =
                comma == std::string_view::npos ? rest : rest.substr(0, comma);
            if (!trim(item).empty()) spec.criteria.push_back(parse_criterion(item));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    } else if (k == "repetitions") {
        spec.repetitions = parse_number<int>(k, v);
    } else if (k == "rel_strategy") {
        spec.rel_strategy = parse_rel_strategy(v);
    } else if (k == "rel_constant") {
        spec.rel_constant = parse_number<double>(k, v);
    } else if (k == "crowdbt_lambda") {
        spec.crowdbt_lambda = parse_number<double>(k, v);
    } else if (k == "data") {
        const std::string kind = lower(v);
        if (kind == "synthetic") spec.data.kind = DataSpec::Kind::synthetic;
        else if (kind == "replay") spec.data.kind = DataSpec::Kind::replay;
        else throw ConfigError("data must be 'synthetic' or 'replay'");
    } else if (k == "answers") {
        spec.data.answers_path = std::string(v);
    } else if (k == "truth") {
        spec.data.truth_path = std::string(v);
    } else if (k == "synthetic_n") {
        spec.data.synthetic.n = parse_number<int>(k, v);
    } else if (k == "synthetic_scores") {
        spec.data.synthetic.scores = parse_scores(k, v);
    } else if (k == "synthetic_score_spread") {
        spec.data.synthetic.score_spread = parse_number<double>(k, v);
    } else if (k == "synthetic_accuracy") {
        spec.data.synthetic.accuracy = parse_number<double>(k, v);
    } else if (k == "synthetic_scores2") {
        spec.data.synthetic.scores2 = parse_scores(k, v);
    } else if (k == "synthetic_switch_after") {
        spec.data.synthetic.switch_after = parse_number<long long>(k, v);
    } else {
        throw ConfigError("unknown config key: " + std::string(key));
    }
}

ExperimentSpec parse_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentSpec spec;
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
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        try {
            apply_key(spec, s.substr(0, eq), s.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return spec;
}

}  // namespace crowdrank
