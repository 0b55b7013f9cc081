#pragma once

// Stream ingestion (JSON lines), run configuration, the sequential scoring
// engine, the synthetic stream generator and the timing benchmark.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "firststory/errors.hpp"
#include "firststory/evaluation.hpp"
#include "firststory/scorers.hpp"
#include "firststory/stream_record.hpp"
#include "firststory/tdf_index.hpp"
#include "firststory/text.hpp"
#include "firststory/weighting.hpp"
#include "firststory/window_index.hpp"

namespace fsd {

enum class TextField { title_snippet, content };

inline TextField parse_field(std::string_view name) {
    if (name == "title_snippet") return TextField::title_snippet;
    if (name == "content") return TextField::content;
    throw ConfigError("unknown field '" + std::string(name) +
                      "' (expected title_snippet or content)");
}

// Surface to score: title + snippet text, or the article content (falls back
// to the snippet when a record carries no content).
inline std::string record_text(const StreamRecord& record, TextField field) {
    if (field == TextField::content && !record.content.empty()) return record.content;
    if (field == TextField::content) return record.text;
    if (record.title.empty()) return record.text;
    return record.title + " " + record.text;
}

struct RunConfig {
    ScorerKind scorer = ScorerKind::ns;
    std::string scheme;  // empty: nsd for ns/ns_t, kbn for the baselines
    std::size_t window = 100;
    DecayKind decay = DecayKind::sigmoid;
    double alpha = 35.0;
    double lambda = 0.9;  // MinKL interpolation smoothing
    double k1 = 1.2;
    double b = 0.75;
    TextField field = TextField::title_snippet;
    std::size_t warmup = 0;  // stream docs excluded from evaluation only
    int folds = 5;
    bool shuffle_folds = false;
    std::uint64_t fold_seed = 0;
    bool exclude_empty = true;

    std::string scheme_or_default() const {
        if (!scheme.empty()) return scheme;
        return (scorer == ScorerKind::ns || scorer == ScorerKind::ns_t) ? "nsd" : "kbn";
    }

    WeightingScheme weighting() const {
        return WeightingScheme::parse(scheme_or_default(), k1, b);
    }

    DecayConfig decay_config() const {
        return DecayConfig{decay, static_cast<std::int64_t>(window), alpha};
    }

    void validate() const {
        if (window == 0) throw ConfigError("window size N must be positive");
        WeightingScheme ws = weighting();
        if (scorer == ScorerKind::ns_t) {
            decay_config().validate();
            if (ws.idf != IdfVariant::smoothed && ws.idf != IdfVariant::bm25)
                throw ConfigError("ns_t needs a smoothed idf variant (s or b); '" + ws.name() +
                                  "' degenerates on unseen terms");
            if ((ws.tf == TfVariant::bm25 && ws.b > 0) || ws.norm == NormVariant::pivot)
                throw ConfigError("ns_t cannot use avdl-based components (scheme '" + ws.name() +
                                  "')");
        }
        if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0, 1]");
        if (folds < 2) throw ConfigError("folds must be >= 2");
    }
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

// Sequential per-stream scorer: score the incoming document against the
// current index state, then fold the document in. NS^t mode keeps no window
// at all; stored_documents() stays 0 for the whole run.
class NoveltyEngine {
public:
    explicit NoveltyEngine(const RunConfig& config)
        : config_(config), scheme_(config.weighting()) {
        config_.validate();
        if (config_.scorer == ScorerKind::ns_t)
            tdf_.emplace(config_.decay_config());
        else
            window_.emplace(config_.window);
    }

    double score(const Document& doc) const {
        if (doc.empty()) return 0.0;  // no formula covers empty documents
        switch (config_.scorer) {
            case ScorerKind::ns:
                return ns(doc, window_->stats(), scheme_);
            case ScorerKind::ns_t:
                return ns_t(doc, *tdf_, scheme_);
            case ScorerKind::max_cs:
                return max_cs(doc, *window_, scheme_);
            case ScorerKind::mean_cs:
                return mean_cs(doc, *window_, scheme_);
            case ScorerKind::min_kl:
                return min_kl(doc, *window_, config_.lambda);
            case ScorerKind::agg_cs:
                return agg_cs(doc, *window_, scheme_);
        }
        return 0.0;
    }

    void update(Document doc) {
        if (tdf_)
            tdf_->observe(doc);
        else
            window_->push(std::move(doc));
    }

    std::size_t stored_documents() const { return window_ ? window_->size() : 0; }
    const WindowIndex* window() const { return window_ ? &*window_ : nullptr; }
    const TdfIndex* tdf() const { return tdf_ ? &*tdf_ : nullptr; }
    const WeightingScheme& scheme() const { return scheme_; }

    // Restores a previously saved tdf snapshot (ns_t mode only).
    void restore_tdf(TdfIndex index) {
        if (!tdf_) throw ConfigError("tdf snapshot only applies to the ns_t scorer");
        tdf_ = std::move(index);
    }

private:
    RunConfig config_;
    WeightingScheme scheme_;
    std::optional<WindowIndex> window_;
    std::optional<TdfIndex> tdf_;
};

struct RunResult {
    std::vector<ScoreRecord> records;
    std::size_t peak_stored_documents = 0;
    std::size_t empty_documents = 0;
};

// Strict per-document sequence: score against the current state, record,
// then update the index.
inline RunResult run_documents(const std::vector<Document>& docs, const RunConfig& config,
                               NoveltyEngine* engine_out = nullptr) {
    NoveltyEngine local_engine(config);
    NoveltyEngine& engine = engine_out ? *engine_out : local_engine;
    RunResult result;
    result.records.reserve(docs.size());
    const Orientation orientation = orientation_of(config.scorer);
    for (const Document& doc : docs) {
        auto start = std::chrono::steady_clock::now();
        double score = engine.score(doc);
        auto stop = std::chrono::steady_clock::now();

        ScoreRecord record;
        record.doc_id = doc.id;
        record.raw_score = score;
        record.orientation = orientation;
        record.scorer = scorer_name(config.scorer);
        record.elapsed_ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
        record.zero_length = doc.zero_length;
        if (doc.zero_length) result.empty_documents++;
        result.records.push_back(std::move(record));

        engine.update(doc);
        result.peak_stored_documents =
            std::max(result.peak_stored_documents, engine.stored_documents());
    }
    return result;
}

inline std::vector<Document> build_documents(const std::vector<StreamRecord>& stream,
                                             TextField field,
                                             const Stoplist& stoplist = default_stoplist()) {
    std::vector<Document> docs;
    docs.reserve(stream.size());
    for (const auto& record : stream)
        docs.push_back(build_document(record.id, record.timestamp, record_text(record, field),
                                      stoplist));
    return docs;
}

inline RunResult run_stream(const std::vector<StreamRecord>& stream, const RunConfig& config,
                            const Stoplist& stoplist = default_stoplist(),
                            NoveltyEngine* engine_out = nullptr) {
    return run_documents(build_documents(stream, config.field, stoplist), config, engine_out);
}

// ---------------------------------------------------------------------------
// Score record files
// ---------------------------------------------------------------------------

// One tab-separated record per document: doc_id, scorer, scheme, N,
// raw_score, elapsed_ns. Timing is optional so reruns stay byte-identical.
inline void write_score_tsv(std::ostream& out, const std::vector<ScoreRecord>& records,
                            const std::string& scheme, std::size_t window,
                            bool with_timing = false) {
    char buf[64];
    for (const auto& record : records) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), record.raw_score,
                                       std::chars_format::general, 17);
        out << record.doc_id << '\t' << record.scorer << '\t' << scheme << '\t' << window << '\t'
            << std::string_view(buf, end) << '\t' << (with_timing ? record.elapsed_ns : 0)
            << '\n';
    }
}

inline std::vector<ScoreRecord> read_score_tsv(std::istream& in) {
    std::vector<ScoreRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string scheme, window;
        ScoreRecord record;
        if (!std::getline(ls, record.doc_id, '\t') || !std::getline(ls, record.scorer, '\t') ||
            !std::getline(ls, scheme, '\t') || !std::getline(ls, window, '\t'))
            throw ConfigError("bad score record line: " + line);
        std::string score, elapsed;
        if (!std::getline(ls, score, '\t')) throw ConfigError("bad score record line: " + line);
        std::getline(ls, elapsed, '\t');
        record.raw_score = std::stod(score);
        record.elapsed_ns = elapsed.empty() ? 0 : std::stoll(elapsed);
        record.orientation = orientation_of(parse_scorer(record.scorer));
        records.push_back(std::move(record));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Synthetic streams
// ---------------------------------------------------------------------------

// Desk-scale stand-in for an annotated news stream: per-cluster topic
// vocabularies (disjoint by construction) mixed with a shared background
// vocabulary. The first document of each cluster is the novel one.
struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t n_clusters = 40;
    std::size_t min_cluster_size = 4;
    std::size_t max_cluster_size = 12;
    std::size_t topic_vocab = 40;       // per-cluster distinct terms
    std::size_t background_vocab = 150; // shared distinct terms
    double background_ratio = 0.3;      // fraction of tokens drawn from it
    std::size_t min_len = 20;
    std::size_t max_len = 60;
    // 0 -> clusters are contiguous runs; 1 -> all clusters interleave.
    // Number of concurrently active clusters = 1 + round(overlap*(n-1)).
    double overlap = 0.3;
};

inline std::vector<StreamRecord> generate_synthetic(const SynthConfig& config) {
    if (config.n_clusters == 0 || config.min_cluster_size == 0 ||
        config.max_cluster_size < config.min_cluster_size || config.min_len == 0 ||
        config.max_len < config.min_len || config.topic_vocab == 0)
        throw ConfigError("bad synthetic stream parameters");
    std::mt19937_64 rng(config.seed);
    auto uniform = [&rng](std::size_t lo, std::size_t hi) {  // inclusive
        return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    };
    auto coin = [&rng](double p) {
        return (static_cast<double>(rng() >> 11) * 0x1.0p-53) < p;
    };

    std::vector<std::size_t> remaining(config.n_clusters);
    for (auto& size : remaining) size = uniform(config.min_cluster_size, config.max_cluster_size);

    std::size_t max_active =
        1 + static_cast<std::size_t>(std::llround(config.overlap *
                                                  static_cast<double>(config.n_clusters - 1)));
    std::vector<std::size_t> active;
    std::size_t next_cluster = 0;
    auto refill = [&] {
        while (active.size() < max_active && next_cluster < config.n_clusters)
            active.push_back(next_cluster++);
    };
    refill();

    std::vector<StreamRecord> stream;
    std::size_t position = 0;
    while (!active.empty()) {
        std::size_t slot = active.size() == 1 ? 0 : uniform(0, active.size() - 1);
        std::size_t cluster = active[slot];

        std::size_t length = uniform(config.min_len, config.max_len);
        std::string text;
        text.reserve(length * 8);
        for (std::size_t i = 0; i < length; ++i) {
            if (!text.empty()) text.push_back(' ');
            if (config.background_vocab > 0 && coin(config.background_ratio)) {
                text += "bg" + std::to_string(uniform(0, config.background_vocab - 1));
            } else {
                text += "c" + std::to_string(cluster) + "w" +
                        std::to_string(uniform(0, config.topic_vocab - 1));
            }
        }

        StreamRecord record;
        record.id = "d" + std::to_string(position);
        record.timestamp = static_cast<std::int64_t>(position);
        record.text = std::move(text);
        record.cluster_id = "c" + std::to_string(cluster);
        stream.push_back(std::move(record));
        position++;

        if (--remaining[cluster] == 0) {
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(slot));
            refill();
        }
    }
    return stream;
}

inline GroundTruth derive_labels(const std::vector<StreamRecord>& stream,
                                 const std::unordered_set<std::string>& excluded_clusters = {}) {
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(stream.size());
    for (const auto& record : stream) docs.emplace_back(record.id, record.cluster_id);
    return derive_labels(docs, excluded_clusters);
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct BenchRow {
    std::string scorer;
    std::size_t window = 0;
    std::size_t docs = 0;
    double mean_score_us = 0.0;
    double p95_score_us = 0.0;
    double mean_update_us = 0.0;  // reported separately, not part of scoring
};

// Mean and p95 per-document scoring time over pre-built documents. Each
// (scorer, N) pair gets one discarded warm-up pass, then `reps` measured
// passes on a fresh engine.
inline std::vector<BenchRow> bench(const std::vector<Document>& docs,
                                   const std::vector<ScorerKind>& scorers,
                                   const std::vector<std::size_t>& windows, int reps,
                                   const RunConfig& base) {
    using clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;
    for (ScorerKind scorer : scorers) {
        for (std::size_t window : windows) {
            RunConfig config = base;
            config.scorer = scorer;
            config.window = window;
            config.scheme = base.scheme;  // empty -> per-scorer default

            {
                NoveltyEngine warm(config);
                for (const auto& doc : docs) {
                    volatile double sink = warm.score(doc);
                    (void)sink;
                    warm.update(doc);
                }
            }

            std::vector<double> score_us;
            score_us.reserve(docs.size() * static_cast<std::size_t>(reps));
            double update_total_us = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                NoveltyEngine engine(config);
                for (const auto& doc : docs) {
                    auto t0 = clock::now();
                    volatile double sink = engine.score(doc);
                    (void)sink;
                    auto t1 = clock::now();
                    engine.update(doc);
                    auto t2 = clock::now();
                    score_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
                    update_total_us += std::chrono::duration<double, std::micro>(t2 - t1).count();
                }
            }

            BenchRow row;
            row.scorer = scorer_name(scorer);
            row.window = window;
            row.docs = docs.size();
            row.mean_score_us =
                std::accumulate(score_us.begin(), score_us.end(), 0.0) /
                static_cast<double>(score_us.size());
            std::size_t p95_idx = (score_us.size() * 95) / 100;
            if (p95_idx >= score_us.size()) p95_idx = score_us.size() - 1;
            std::nth_element(score_us.begin(),
                             score_us.begin() + static_cast<std::ptrdiff_t>(p95_idx),
                             score_us.end());
            row.p95_score_us = score_us[p95_idx];
            row.mean_update_us = update_total_us / static_cast<double>(docs.size() * reps);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "scorer\tN\tdocs\tmean_score_us\tp95_score_us\tmean_update_us\n";
    for (const auto& row : rows) {
        out << row.scorer << '\t' << row.window << '\t' << row.docs << '\t' << row.mean_score_us
            << '\t' << row.p95_score_us << '\t' << row.mean_update_us << '\n';
    }
}

}  // namespace fsd
