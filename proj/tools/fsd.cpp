// fsd: streaming first-story / novelty detection over JSON-lines streams.
//
//   fsd synth     generate a labeled synthetic stream
//   fsd score     stream -> one score record per document
//   fsd evaluate  score records + stream ground truth -> costs and DET curve
//   fsd sweep     run a config grid, write the cost CSV
//   fsd bench     per-document timing table

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "firststory/stream.hpp"

namespace {

using namespace fsd;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

// Writes either to a file or stdout ("-").
struct OutputTarget {
    explicit OutputTarget(const std::string& path) {
        if (path != "-") file_ = open_output(path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    std::optional<std::ofstream> file_;
};

Stoplist resolve_stoplist(const std::string& source) {
    if (source.empty()) return default_stoplist();
    if (source == "none") return {};
    auto in = open_input(source);
    return read_stoplist(in);
}

std::unordered_set<std::string> read_id_set(const std::string& path) {
    std::unordered_set<std::string> ids;
    if (path.empty()) return ids;
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        ids.insert(line);
    }
    return ids;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> items;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) items.push_back(item);
    return items;
}

bool parse_bool(const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw ConfigError("bad boolean value '" + value + "'");
}

// Everything a run needs; config-file keys map onto these fields and
// override whatever the flags said.
struct Options {
    std::string input;
    std::string output = "-";
    std::string scores_path;
    std::string stream_path;
    std::string det_path;
    std::string excluded_clusters_path;
    std::string stopwords;
    std::string config_path;
    std::string save_index;
    std::string load_index;

    std::string scorer = "ns";
    std::string scheme;
    std::string field = "title_snippet";
    std::string decay = "sigmoid";
    std::size_t window = 100;
    double alpha = 35.0;
    double lambda = 0.9;
    double k1 = 1.2;
    double b = 0.75;
    std::size_t warmup = 0;
    int folds = 5;
    bool shuffle = false;
    std::uint64_t fold_seed = 0;
    bool include_empty = false;
    bool timing = false;

    double c_miss = 1.0;
    double c_fa = 1.0;
    double p_target = 0.5;

    // grid / bench lists
    std::string scorers_csv = "ns";
    std::string schemes_csv;
    std::string windows_csv = "100";
    std::string decays_csv = "sigmoid";
    std::string alphas_csv = "35";
    int jobs = 0;
    int reps = 1;

    SynthConfig synth;

    RunConfig run_config() const {
        RunConfig config;
        config.scorer = parse_scorer(scorer);
        config.scheme = scheme;
        config.window = window;
        config.decay = parse_decay(decay);
        config.alpha = alpha;
        config.lambda = lambda;
        config.k1 = k1;
        config.b = b;
        config.field = parse_field(field);
        config.warmup = warmup;
        config.folds = folds;
        config.shuffle_folds = shuffle;
        config.fold_seed = fold_seed;
        config.exclude_empty = !include_empty;
        config.validate();
        return config;
    }

    CostConfig cost_config() const { return CostConfig{c_miss, c_fa, p_target}; }
};

// key=value lines, '#' comments. Config values override flags.
void apply_config_file(Options& opts) {
    if (opts.config_path.empty()) return;
    auto in = open_input(opts.config_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(opts.config_path + ":" + std::to_string(line_no) +
                              ": expected key=value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "scorer") opts.scorer = value;
        else if (key == "scheme") opts.scheme = value;
        else if (key == "field") opts.field = value;
        else if (key == "decay") opts.decay = value;
        else if (key == "N" || key == "window") opts.window = std::stoull(value);
        else if (key == "alpha") opts.alpha = std::stod(value);
        else if (key == "lambda") opts.lambda = std::stod(value);
        else if (key == "k1") opts.k1 = std::stod(value);
        else if (key == "b") opts.b = std::stod(value);
        else if (key == "warmup") opts.warmup = std::stoull(value);
        else if (key == "folds") opts.folds = std::stoi(value);
        else if (key == "shuffle") opts.shuffle = parse_bool(value);
        else if (key == "fold_seed") opts.fold_seed = std::stoull(value);
        else if (key == "include_empty") opts.include_empty = parse_bool(value);
        else if (key == "timing") opts.timing = parse_bool(value);
        else if (key == "stopwords") opts.stopwords = value;
        else if (key == "c_miss") opts.c_miss = std::stod(value);
        else if (key == "c_fa") opts.c_fa = std::stod(value);
        else if (key == "p_target") opts.p_target = std::stod(value);
        else if (key == "scorers") opts.scorers_csv = value;
        else if (key == "schemes") opts.schemes_csv = value;
        else if (key == "windows" || key == "Ns") opts.windows_csv = value;
        else if (key == "decays") opts.decays_csv = value;
        else if (key == "alphas") opts.alphas_csv = value;
        else if (key == "jobs") opts.jobs = std::stoi(value);
        else if (key == "reps") opts.reps = std::stoi(value);
        else
            throw ConfigError(opts.config_path + ":" + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
    }
}

std::vector<StreamRecord> load_stream(const std::string& path, bool report = true) {
    auto in = open_input(path);
    IngestStats stats;
    auto stream = read_jsonl(in, &stats);
    if (report && (stats.skipped > 0 || stats.order_violations > 0))
        std::cerr << "warning: skipped " << stats.skipped << " malformed line(s), "
                  << stats.order_violations << " timestamp order violation(s)\n";
    return stream;
}

// Ground truth for an evaluation: cluster-derived labels minus mixed
// clusters, warmup documents and (by default) documents that came out of
// preprocessing empty.
GroundTruth evaluation_truth(const std::vector<StreamRecord>& stream, const Options& opts,
                             const std::vector<Document>& docs) {
    GroundTruth truth = derive_labels(stream, read_id_set(opts.excluded_clusters_path));
    for (std::size_t i = 0; i < stream.size() && i < opts.warmup; ++i)
        truth.exclude(stream[i].id);
    if (!opts.include_empty)
        for (const auto& doc : docs)
            if (doc.zero_length) truth.exclude(doc.id);
    return truth;
}

int cmd_synth(const Options& opts) {
    auto stream = generate_synthetic(opts.synth);
    OutputTarget out(opts.output);
    for (const auto& record : stream) {
        nlohmann::json j;
        j["id"] = record.id;
        j["timestamp"] = record.timestamp;
        j["text"] = record.text;
        j["cluster_id"] = record.cluster_id;
        out.stream() << j.dump() << '\n';
    }
    std::cerr << "generated " << stream.size() << " documents in " << opts.synth.n_clusters
              << " clusters\n";
    return 0;
}

int cmd_score(const Options& opts) {
    RunConfig config = opts.run_config();
    auto stream = load_stream(opts.input);
    Stoplist stoplist = resolve_stoplist(opts.stopwords);

    NoveltyEngine engine(config);
    if (!opts.load_index.empty()) {
        auto in = open_input(opts.load_index);
        engine.restore_tdf(TdfIndex::load(in));
    }
    RunResult result = run_stream(stream, config, stoplist, &engine);
    if (!opts.save_index.empty()) {
        if (engine.tdf() == nullptr)
            throw ConfigError("--save-index only applies to the ns_t scorer");
        auto out = open_output(opts.save_index);
        engine.tdf()->save(out);
    }

    OutputTarget out(opts.output);
    write_score_tsv(out.stream(), result.records, config.scheme_or_default(), config.window,
                    opts.timing);
    std::cerr << "scored " << result.records.size() << " documents ("
              << result.empty_documents << " empty), peak stored documents "
              << result.peak_stored_documents << "\n";
    return 0;
}

int cmd_evaluate(const Options& opts) {
    auto scores_in = open_input(opts.scores_path);
    auto file_records = read_score_tsv(scores_in);
    auto stream = load_stream(opts.stream_path);

    // Evaluation follows stream order regardless of score file order.
    std::unordered_map<std::string, const ScoreRecord*> by_id;
    for (const auto& record : file_records) by_id[record.doc_id] = &record;
    std::vector<ScoreRecord> records;
    records.reserve(stream.size());
    for (const auto& rec : stream) {
        auto it = by_id.find(rec.id);
        if (it != by_id.end()) records.push_back(*it->second);
    }
    if (records.size() != file_records.size())
        std::cerr << "warning: " << (file_records.size() - records.size())
                  << " score record(s) have no matching stream document\n";

    std::vector<Document> docs;
    if (!opts.include_empty)
        docs = build_documents(stream, parse_field(opts.field), resolve_stoplist(opts.stopwords));
    GroundTruth truth = evaluation_truth(stream, opts, docs);

    CostConfig cost = opts.cost_config();
    SweepResult swept = sweep(records, truth, cost);
    auto cv = cross_validate(records, truth, opts.folds, cost, opts.shuffle, opts.fold_seed);

    std::size_t labeled = 0;
    for (const auto& record : records)
        if (truth.label_of(record.doc_id) != Label::excluded) labeled++;
    std::cout << "documents: " << records.size() << " scored, " << labeled << " in evaluation, "
              << truth.novel_count << " novel\n";
    std::cout << "minC_Det: " << swept.best_cost << " at threshold " << swept.best_threshold
              << " (p_miss " << swept.best_point.p_miss << ", p_fa " << swept.best_point.p_fa
              << ")\n";
    std::cout << "avgC_Det (" << opts.folds << "-fold): " << cv.avg_cost << "\n";
    for (std::size_t i = 0; i < cv.fold_costs.size(); ++i)
        std::cout << "  fold " << i + 1 << ": threshold " << cv.fold_thresholds[i] << ", C_Det "
                  << cv.fold_costs[i] << "\n";

    if (!opts.det_path.empty()) {
        auto det = open_output(opts.det_path);
        write_det_tsv(det, swept.points);
    }
    return 0;
}

int cmd_sweep(const Options& opts) {
    auto stream = load_stream(opts.input);
    Stoplist stoplist = resolve_stoplist(opts.stopwords);
    TextField field = parse_field(opts.field);
    auto docs = build_documents(stream, field, stoplist);
    GroundTruth truth = evaluation_truth(stream, opts, docs);

    std::vector<RunConfig> grid;
    for (const auto& scorer_name_str : split_list(opts.scorers_csv)) {
        ScorerKind scorer = parse_scorer(scorer_name_str);
        std::vector<std::string> schemes = split_list(opts.schemes_csv);
        if (schemes.empty()) schemes.push_back("");  // per-scorer default
        for (const auto& scheme : schemes) {
            for (const auto& window_str : split_list(opts.windows_csv)) {
                RunConfig base = opts.run_config();
                base.scorer = scorer;
                base.scheme = scheme;
                base.window = std::stoull(window_str);
                if (scorer == ScorerKind::ns_t) {
                    for (const auto& decay : split_list(opts.decays_csv)) {
                        for (const auto& alpha : split_list(opts.alphas_csv)) {
                            RunConfig config = base;
                            config.decay = parse_decay(decay);
                            config.alpha = std::stod(alpha);
                            config.validate();
                            grid.push_back(config);
                        }
                    }
                } else {
                    base.validate();
                    grid.push_back(base);
                }
            }
        }
    }

    if (grid.empty()) throw ConfigError("sweep grid is empty; check --scorers/--Ns");

    std::vector<CostGridRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    unsigned n_threads = opts.jobs > 0 ? static_cast<unsigned>(opts.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(grid.size()));

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= grid.size() || failed.load()) break;
            try {
                const RunConfig& config = grid[i];
                RunResult result = run_documents(docs, config);
                auto cv = cross_validate(result.records, truth, config.folds, opts.cost_config(),
                                         config.shuffle_folds, config.fold_seed);
                CostGridRow row;
                row.scorer = scorer_name(config.scorer);
                row.scheme = config.scheme_or_default();
                row.window = config.window;
                row.decay = config.scorer == ScorerKind::ns_t ? decay_name(config.decay) : "none";
                row.alpha = config.scorer == ScorerKind::ns_t ? config.alpha : 0.0;
                row.avg_cost = cv.avg_cost;
                rows[i] = std::move(row);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("sweep failed: " + error_message);

    OutputTarget out(opts.output);
    write_cost_grid_csv(out.stream(), rows);
    std::cerr << "swept " << rows.size() << " configurations over " << docs.size()
              << " documents\n";
    return 0;
}

int cmd_bench(const Options& opts) {
    auto stream = load_stream(opts.input);
    Stoplist stoplist = resolve_stoplist(opts.stopwords);
    auto docs = build_documents(stream, parse_field(opts.field), stoplist);

    std::vector<ScorerKind> scorers;
    for (const auto& name : split_list(opts.scorers_csv)) scorers.push_back(parse_scorer(name));
    std::vector<std::size_t> windows;
    for (const auto& window : split_list(opts.windows_csv)) windows.push_back(std::stoull(window));
    if (scorers.empty() || windows.empty()) throw ConfigError("bench needs scorers and windows");

    RunConfig base = opts.run_config();
    auto rows = bench(docs, scorers, windows, opts.reps, base);
    OutputTarget out(opts.output);
    write_bench_tsv(out.stream(), rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming first-story (novelty) detection"};
    app.require_subcommand(1);
    Options opts;

    auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--scorer", opts.scorer, "ns, ns_t, max_cs, mean_cs, min_kl, agg_cs");
        cmd->add_option("--scheme", opts.scheme,
                        "SMART triplet (default: nsd for ns/ns_t, kbn for baselines)");
        cmd->add_option("-N,--window", opts.window, "sliding window length");
        cmd->add_option("--decay", opts.decay, "linear, exp1, exp2, sigmoid (ns_t)");
        cmd->add_option("--alpha", opts.alpha, "decay rate (ns_t)");
        cmd->add_option("--lambda", opts.lambda, "LM smoothing (min_kl)");
        cmd->add_option("--k1", opts.k1, "BM25 k1");
        cmd->add_option("--b", opts.b, "BM25 slope");
        cmd->add_option("--field", opts.field, "title_snippet or content");
        cmd->add_option("--stopwords", opts.stopwords, "stopword file, or 'none'");
        cmd->add_option("--config", opts.config_path, "key=value file; overrides flags");
    };
    auto add_eval_flags = [&](CLI::App* cmd) {
        cmd->add_option("--folds", opts.folds, "cross-validation folds");
        cmd->add_flag("--shuffle", opts.shuffle, "shuffle before folding");
        cmd->add_option("--fold-seed", opts.fold_seed, "shuffle seed");
        cmd->add_option("--warmup", opts.warmup, "exclude the first n documents from evaluation");
        cmd->add_flag("--include-empty", opts.include_empty,
                      "keep zero-length documents in the evaluation");
        cmd->add_option("--excluded-clusters", opts.excluded_clusters_path,
                        "file of mixed cluster ids to exclude");
        cmd->add_option("--c-miss", opts.c_miss, "missed detection cost");
        cmd->add_option("--c-fa", opts.c_fa, "false alarm cost");
        cmd->add_option("--p-target", opts.p_target, "a priori target probability");
    };

    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic stream");
    synth->add_option("--seed", opts.synth.seed, "RNG seed");
    synth->add_option("--clusters", opts.synth.n_clusters, "number of clusters");
    synth->add_option("--min-size", opts.synth.min_cluster_size, "min cluster size");
    synth->add_option("--max-size", opts.synth.max_cluster_size, "max cluster size");
    synth->add_option("--topic-vocab", opts.synth.topic_vocab, "distinct terms per cluster");
    synth->add_option("--background-vocab", opts.synth.background_vocab,
                      "shared background vocabulary size");
    synth->add_option("--background-ratio", opts.synth.background_ratio,
                      "fraction of tokens from the background vocabulary");
    synth->add_option("--min-len", opts.synth.min_len, "min document length");
    synth->add_option("--max-len", opts.synth.max_len, "max document length");
    synth->add_option("--overlap", opts.synth.overlap, "cluster interleaving in [0, 1]");
    synth->add_option("-o,--output", opts.output, "output JSONL ('-' for stdout)");

    auto* score = app.add_subcommand("score", "score a stream, one record per document");
    score->add_option("-i,--input", opts.input, "JSONL stream")->required();
    score->add_option("-o,--output", opts.output, "score TSV ('-' for stdout)");
    score->add_flag("--timing", opts.timing,
                    "emit measured elapsed_ns (off keeps reruns byte-identical)");
    score->add_option("--save-index", opts.save_index, "write the tdf snapshot after the run");
    score->add_option("--load-index", opts.load_index, "restore a tdf snapshot before the run");
    add_model_flags(score);

    auto* evaluate = app.add_subcommand("evaluate", "detection costs and DET curve");
    evaluate->add_option("--scores", opts.scores_path, "score TSV from 'fsd score'")->required();
    evaluate->add_option("--stream", opts.stream_path, "JSONL stream with cluster ids")
        ->required();
    evaluate->add_option("--det", opts.det_path, "write DET points TSV here");
    evaluate->add_option("--field", opts.field, "surface used when re-deriving empty documents");
    evaluate->add_option("--stopwords", opts.stopwords, "stopword file, or 'none'");
    evaluate->add_option("--config", opts.config_path, "key=value file; overrides flags");
    add_eval_flags(evaluate);

    auto* sweep_cmd = app.add_subcommand("sweep", "config grid -> cost CSV");
    sweep_cmd->add_option("-i,--input", opts.input, "JSONL stream")->required();
    sweep_cmd->add_option("-o,--output", opts.output, "cost grid CSV ('-' for stdout)");
    sweep_cmd->add_option("--scorers", opts.scorers_csv, "comma-separated scorers");
    sweep_cmd->add_option("--schemes", opts.schemes_csv,
                          "comma-separated SMART triplets (empty: per-scorer default)");
    sweep_cmd->add_option("--windows,--Ns", opts.windows_csv, "comma-separated window lengths");
    sweep_cmd->add_option("--decays", opts.decays_csv, "comma-separated decays (ns_t)");
    sweep_cmd->add_option("--alphas", opts.alphas_csv, "comma-separated alphas (ns_t)");
    sweep_cmd->add_option("--jobs", opts.jobs, "parallel workers (0 = hardware)");
    sweep_cmd->add_option("--field", opts.field, "title_snippet or content");
    sweep_cmd->add_option("--stopwords", opts.stopwords, "stopword file, or 'none'");
    sweep_cmd->add_option("--lambda", opts.lambda, "LM smoothing (min_kl)");
    sweep_cmd->add_option("--k1", opts.k1, "BM25 k1");
    sweep_cmd->add_option("--b", opts.b, "BM25 slope");
    sweep_cmd->add_option("--config", opts.config_path, "key=value file; overrides flags");
    add_eval_flags(sweep_cmd);

    auto* bench_cmd = app.add_subcommand("bench", "per-document timing table");
    bench_cmd->add_option("-i,--input", opts.input, "JSONL stream")->required();
    bench_cmd->add_option("-o,--output", opts.output, "timing TSV ('-' for stdout)");
    bench_cmd->add_option("--scorers", opts.scorers_csv, "comma-separated scorers");
    bench_cmd->add_option("--windows,--Ns", opts.windows_csv, "comma-separated window lengths");
    bench_cmd->add_option("--reps", opts.reps, "measured passes after the warm-up pass");
    add_model_flags(bench_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        apply_config_file(opts);
        if (synth->parsed()) return cmd_synth(opts);
        if (score->parsed()) return cmd_score(opts);
        if (evaluate->parsed()) return cmd_evaluate(opts);
        if (sweep_cmd->parsed()) return cmd_sweep(opts);
        if (bench_cmd->parsed()) return cmd_bench(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
