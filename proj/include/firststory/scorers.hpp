#pragma once

// The six novelty scorers. NS aggregates TF x IDF over the incoming document
// alone (O(|d|), independent of the window size); NS^t swaps window DF for
// the temporal document frequency. MaxCS / MeanCS / MinKL / AggCS are the
// literature baselines, scored against the stored window.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "firststory/errors.hpp"
#include "firststory/tdf_index.hpp"
#include "firststory/text.hpp"
#include "firststory/weighting.hpp"
#include "firststory/window_index.hpp"

namespace fsd {

// Which side of the threshold means "novel". Keeps every formula as
// published while the evaluator sweeps thresholds in one canonical direction.
enum class Orientation { higher_is_novel, lower_is_novel };

enum class ScorerKind { ns, ns_t, max_cs, mean_cs, min_kl, agg_cs };

inline Orientation orientation_of(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::ns:
        case ScorerKind::ns_t:
        case ScorerKind::min_kl:
            return Orientation::higher_is_novel;
        case ScorerKind::max_cs:
        case ScorerKind::mean_cs:
        case ScorerKind::agg_cs:
            return Orientation::lower_is_novel;
    }
    return Orientation::higher_is_novel;
}

inline const char* scorer_name(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::ns: return "ns";
        case ScorerKind::ns_t: return "ns_t";
        case ScorerKind::max_cs: return "max_cs";
        case ScorerKind::mean_cs: return "mean_cs";
        case ScorerKind::min_kl: return "min_kl";
        case ScorerKind::agg_cs: return "agg_cs";
    }
    return "?";
}

inline ScorerKind parse_scorer(std::string_view name) {
    if (name == "ns") return ScorerKind::ns;
    if (name == "ns_t") return ScorerKind::ns_t;
    if (name == "max_cs") return ScorerKind::max_cs;
    if (name == "mean_cs") return ScorerKind::mean_cs;
    if (name == "min_kl") return ScorerKind::min_kl;
    if (name == "agg_cs") return ScorerKind::agg_cs;
    throw ConfigError("unknown scorer '" + std::string(name) +
                      "' (expected ns, ns_t, max_cs, mean_cs, min_kl or agg_cs)");
}

// One scored document. elapsed_ns covers scoring only, not the index update.
struct ScoreRecord {
    std::string doc_id;
    double raw_score = 0.0;
    Orientation orientation = Orientation::higher_is_novel;
    std::string scorer;
    std::int64_t elapsed_ns = 0;
    bool zero_length = false;
};

// Strict inequality both ways; a score equal to the threshold is not novel.
inline bool is_novel(const ScoreRecord& record, double threshold) {
    return record.orientation == Orientation::higher_is_novel ? record.raw_score > threshold
                                                              : record.raw_score < threshold;
}

// ---------------------------------------------------------------------------
// Vector-space scorers
// ---------------------------------------------------------------------------

// tf x idf term weights under one scheme against the current stats.
// Normalization is not applied here; cosine normalizes itself. The stats df
// view must outlive the weigher.
struct TermWeigher {
    WeightingScheme scheme;
    CollectionStats stats;

    double weight(const std::string& term, double tf, double dl) const {
        return tf_component(scheme, tf, dl, stats.avdl) *
               idf_component(scheme, stats.df_of(term), static_cast<double>(stats.n_docs));
    }
};

// Precomputed weight vector for the incoming document, reused across all
// window comparisons.
struct WeightedDoc {
    std::unordered_map<std::string, double> weights;
    double norm = 0.0;

    static WeightedDoc build(const Document& doc, const TermWeigher& weigher) {
        WeightedDoc out;
        out.weights.reserve(doc.tf.size());
        double sum_sq = 0.0;
        for (const auto& [term, tf] : doc.tf) {
            double w = weigher.weight(term, static_cast<double>(tf),
                                      static_cast<double>(doc.dl));
            out.weights.emplace(term, w);
            sum_sq += w * w;
        }
        out.norm = std::sqrt(sum_sq);
        return out;
    }
};

inline double cosine(const WeightedDoc& a, const Document& b, const TermWeigher& weigher) {
    if (a.norm == 0.0 || b.empty()) return 0.0;
    double dot = 0.0;
    double sum_sq_b = 0.0;
    for (const auto& [term, tf] : b.tf) {
        double w = weigher.weight(term, static_cast<double>(tf), static_cast<double>(b.dl));
        sum_sq_b += w * w;
        auto it = a.weights.find(term);
        if (it != a.weights.end()) dot += it->second * w;
    }
    if (sum_sq_b == 0.0) return 0.0;
    return dot / (a.norm * std::sqrt(sum_sq_b));
}

// Dot product over common terms divided by the product of the full Euclidean
// norms; 0 if either vector is all-zero.
inline double cosine(const Document& a, const Document& b, const TermWeigher& weigher) {
    return cosine(WeightedDoc::build(a, weigher), b, weigher);
}

inline double max_cs(const Document& doc, const WindowIndex& window,
                     const WeightingScheme& scheme) {
    if (window.size() == 0) return 0.0;  // empty memory: maximally novel
    CollectionStats stats = window.stats();
    TermWeigher weigher{scheme, stats};
    WeightedDoc weighted = WeightedDoc::build(doc, weigher);
    double best = 0.0;
    for (const Document& stored : window.documents())
        best = std::max(best, cosine(weighted, stored, weigher));
    return best;
}

inline double mean_cs(const Document& doc, const WindowIndex& window,
                      const WeightingScheme& scheme) {
    if (window.size() == 0) return 0.0;
    CollectionStats stats = window.stats();
    TermWeigher weigher{scheme, stats};
    WeightedDoc weighted = WeightedDoc::build(doc, weigher);
    double sum = 0.0;
    for (const Document& stored : window.documents()) sum += cosine(weighted, stored, weigher);
    return sum / static_cast<double>(window.size());
}

// Cosine against the concatenated summary pseudo-document.
inline double agg_cs(const Document& doc, const WindowIndex& window,
                     const WeightingScheme& scheme) {
    if (window.size() == 0) return 0.0;
    CollectionStats stats = window.stats();
    TermWeigher weigher{scheme, stats};
    return cosine(doc, window.summary_document(), weigher);
}

// ---------------------------------------------------------------------------
// Language-model scorer
// ---------------------------------------------------------------------------

// Corpus term distribution used for interpolation smoothing.
struct CorpusView {
    const TermCounts* counts = nullptr;
    std::int64_t total = 0;

    double prob(const std::string& term) const {
        if (counts == nullptr || total <= 0) return 0.0;
        auto it = counts->find(term);
        return it == counts->end() ? 0.0
                                   : static_cast<double>(it->second) / static_cast<double>(total);
    }
};

// Unigram model with linear interpolation smoothing against a corpus:
//   p(q) = lambda * tf_d(q)/dl + (1 - lambda) * corpus(q)
// over the union vocabulary of corpus and document. Terms outside the
// document fall back to the corpus part lazily instead of materializing the
// union. An empty document degrades to the corpus distribution and an empty
// corpus to the document distribution, keeping the model a proper
// distribution; both empty is an error.
class LanguageModel {
public:
    static LanguageModel from_document(const Document& doc, CorpusView corpus, double lambda) {
        if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0, 1]");
        bool doc_empty = doc.empty();
        bool corpus_empty = corpus.counts == nullptr || corpus.total <= 0;
        if (doc_empty && corpus_empty)
            throw EmptyModel("language model over an empty document and empty corpus");
        LanguageModel lm;
        lm.lambda_ = doc_empty ? 0.0 : (corpus_empty ? 1.0 : lambda);
        lm.corpus_ = corpus;
        lm.doc_probs_.reserve(doc.tf.size());
        const double dl = static_cast<double>(doc.dl);
        for (const auto& [term, tf] : doc.tf)
            lm.doc_probs_.emplace(term, lm.lambda_ * static_cast<double>(tf) / dl +
                                            (1.0 - lm.lambda_) * corpus.prob(term));
        return lm;
    }

    // Fully specified model, mostly for tests and hand-built distributions.
    static LanguageModel from_probs(std::unordered_map<std::string, double> probs,
                                    double lambda = 1.0) {
        LanguageModel lm;
        lm.doc_probs_ = std::move(probs);
        lm.lambda_ = lambda;
        return lm;
    }

    double prob(const std::string& term) const {
        auto it = doc_probs_.find(term);
        if (it != doc_probs_.end()) return it->second;
        return (1.0 - lambda_) * corpus_.prob(term);
    }

    const std::unordered_map<std::string, double>& doc_probs() const { return doc_probs_; }
    double lambda() const { return lambda_; }

private:
    std::unordered_map<std::string, double> doc_probs_;
    CorpusView corpus_;
    double lambda_ = 1.0;
};

// KL(theta_d || theta_other) summed over the terms of d only, exactly as the
// divergence is written for this task. With the restricted support the sum
// can go negative; it is non-negative when both restrictions are proper
// distributions over the same support.
inline double kl_div(const LanguageModel& doc_lm, const LanguageModel& other_lm) {
    double sum = 0.0;
    for (const auto& [term, p] : doc_lm.doc_probs()) {
        if (p <= 0.0) continue;  // 0 log 0 convention
        double q = other_lm.prob(term);
        if (q <= 0.0)
            throw ZeroProbability("zero probability for term '" + term +
                                  "' in reference model; smoothing was bypassed");
        sum += p * std::log(p / q);
    }
    return sum;
}

// Score given to an incoming document over an empty window: no divergence is
// defined, so the +infinity sentinel maps to this serializable constant. Any
// finite threshold marks such documents novel.
inline constexpr double kMinKlEmptyWindow = 1e12;

// Minimum KL divergence against every stored document. The smoothing corpus
// is the window concatenation plus the incoming document itself, so smoothed
// reference models have full support over d even for first-occurrence terms.
inline double min_kl(const Document& doc, const WindowIndex& window, double lambda) {
    if (window.size() == 0) return kMinKlEmptyWindow;
    TermCounts corpus_counts = window.summary_counts();
    std::int64_t corpus_total = window.total_length();
    for (const auto& [term, tf] : doc.tf) corpus_counts[term] += tf;
    corpus_total += doc.dl;
    CorpusView corpus{&corpus_counts, corpus_total};

    LanguageModel doc_lm = LanguageModel::from_document(doc, corpus, lambda);
    double best = std::numeric_limits<double>::infinity();
    for (const Document& stored : window.documents()) {
        LanguageModel stored_lm = LanguageModel::from_document(stored, corpus, lambda);
        best = std::min(best, kl_div(doc_lm, stored_lm));
    }
    return best;
}

// ---------------------------------------------------------------------------
// IDF-aggregation scorers
// ---------------------------------------------------------------------------

// NS(d, C) = (1 / norm(d)) * sum over distinct q in d of tf(q, d) * idf(q, C).
// O(|d|) term lookups; the window is consulted only through df/avdl.
// Stats must be taken before the document is inserted.
inline double ns(const Document& doc, const CollectionStats& stats,
                 const WeightingScheme& scheme) {
    if (doc.empty()) return 0.0;
    const double n_docs = static_cast<double>(stats.n_docs);
    const double dl = static_cast<double>(doc.dl);
    double sum = 0.0;
    for (const auto& [term, tf] : doc.tf) {
        sum += tf_component(scheme, static_cast<double>(tf), dl, stats.avdl) *
               idf_component(scheme, stats.df_of(term), n_docs);
    }
    return sum / norm_component(scheme, doc, stats.avdl);
}

// NS^t: same aggregation with itdf in place of idf. The index must not yet
// have observed the document. Components that need an average document
// length are rejected: the document-free index keeps no length statistics.
inline double ns_t(const Document& doc, const TdfIndex& index, const WeightingScheme& scheme) {
    if ((scheme.tf == TfVariant::bm25 && scheme.b > 0) || scheme.norm == NormVariant::pivot)
        throw ConfigError("scheme '" + scheme.name() +
                          "' needs avdl, which the tdf index does not track");
    if (doc.empty()) return 0.0;
    const double dl = static_cast<double>(doc.dl);
    const double avdl = 1.0;  // unreachable by the components allowed above
    double sum = 0.0;
    for (const auto& [term, tf] : doc.tf)
        sum += tf_component(scheme, static_cast<double>(tf), dl, avdl) *
               index.itdf(term, scheme);
    return sum / norm_component(scheme, doc, avdl);
}

}  // namespace fsd
