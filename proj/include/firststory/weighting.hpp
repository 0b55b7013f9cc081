#pragma once

// SMART component grid: TF variants, IDF variants, normalization variants,
// named by three-letter strings ("nsd", "kbn", ...). Natural log throughout.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "firststory/errors.hpp"
#include "firststory/text.hpp"

namespace fsd {

enum class TfVariant : char {
    boolean = 'b',      // 1 if tf > 0
    natural = 'n',      // tf
    logarithmic = 'l',  // 1 + log tf
    bm25 = 'k',         // saturated, length-normalized for b > 0
};

enum class IdfVariant : char {
    plain = 't',          // log(N / df)
    smoothed = 's',       // log((N + 1) / (df + 0.5))
    probabilistic = 'p',  // log((N - df) / df)
    bm25 = 'b',           // log((N - df + 0.5) / (df + 0.5))
};

enum class NormVariant : char {
    none = 'n',
    unique = 'u',  // # distinct terms
    length = 'd',  // L1 length
    l2 = 'c',      // sqrt(sum tf^2)
    pivot = 'p',   // 1 - b + b * dl / avdl
};

struct WeightingScheme {
    TfVariant tf = TfVariant::natural;
    IdfVariant idf = IdfVariant::smoothed;
    NormVariant norm = NormVariant::length;
    double k1 = 1.2;  // BM25 saturation
    double b = 0.75;  // BM25 slope, in [0, 1]

    std::string name() const {
        return {static_cast<char>(tf), static_cast<char>(idf), static_cast<char>(norm)};
    }

    // Parse a SMART triplet and validate the combination. The k TF variant
    // already normalizes by length when b > 0, so pairing it with any
    // explicit normalization is rejected as double normalization.
    static WeightingScheme parse(std::string_view smart, double k1 = 1.2, double b = 0.75) {
        if (smart.size() != 3)
            throw ConfigError("weighting scheme must be a three-letter SMART string, got '" +
                              std::string(smart) + "'");
        WeightingScheme scheme;
        scheme.k1 = k1;
        scheme.b = b;
        switch (smart[0]) {
            case 'b': scheme.tf = TfVariant::boolean; break;
            case 'n': scheme.tf = TfVariant::natural; break;
            case 'l': scheme.tf = TfVariant::logarithmic; break;
            case 'k': scheme.tf = TfVariant::bm25; break;
            default: throw ConfigError("unknown TF variant '" + std::string(1, smart[0]) + "'");
        }
        switch (smart[1]) {
            case 't': scheme.idf = IdfVariant::plain; break;
            case 's': scheme.idf = IdfVariant::smoothed; break;
            case 'p': scheme.idf = IdfVariant::probabilistic; break;
            case 'b': scheme.idf = IdfVariant::bm25; break;
            default: throw ConfigError("unknown IDF variant '" + std::string(1, smart[1]) + "'");
        }
        switch (smart[2]) {
            case 'n': scheme.norm = NormVariant::none; break;
            case 'u': scheme.norm = NormVariant::unique; break;
            case 'd': scheme.norm = NormVariant::length; break;
            case 'c': scheme.norm = NormVariant::l2; break;
            case 'p': scheme.norm = NormVariant::pivot; break;
            default:
                throw ConfigError("unknown normalization variant '" + std::string(1, smart[2]) +
                                  "'");
        }
        if (scheme.k1 <= 0) throw ConfigError("k1 must be positive");
        if (scheme.b < 0 || scheme.b > 1) throw ConfigError("b must be in [0, 1]");
        if (scheme.tf == TfVariant::bm25 && scheme.b > 0 && scheme.norm != NormVariant::none)
            throw ConfigError("scheme '" + std::string(smart) +
                              "' normalizes twice: k TF with b > 0 already includes length "
                              "normalization");
        return scheme;
    }
};

// Snapshot of the collection the weights are computed against. The df map is
// a view into the index and stays valid until the next index update.
struct CollectionStats {
    std::size_t n_docs = 0;
    double avdl = 1.0;
    const TermCounts* df = nullptr;

    double df_of(const std::string& term) const {
        if (df == nullptr) return 0.0;
        auto it = df->find(term);
        return it == df->end() ? 0.0 : static_cast<double>(it->second);
    }
};

inline double tf_component(const WeightingScheme& scheme, double tf, double dl, double avdl) {
    switch (scheme.tf) {
        case TfVariant::boolean:
            return tf > 0 ? 1.0 : 0.0;
        case TfVariant::natural:
            return tf;
        case TfVariant::logarithmic:
            return tf > 0 ? 1.0 + std::log(tf) : 0.0;
        case TfVariant::bm25:
            return ((scheme.k1 + 1.0) * tf) /
                   (scheme.k1 * (1.0 - scheme.b + scheme.b * dl / avdl) + tf);
    }
    return 0.0;
}

// df is real-valued so the temporal variant can feed decayed frequencies
// through the same formulas.
inline double idf_component(const WeightingScheme& scheme, double df, double n_docs) {
    switch (scheme.idf) {
        case IdfVariant::plain:
            if (df <= 0)
                throw DegenerateFrequency("idf variant t undefined at df = 0; use a smoothed "
                                          "variant (s or b) on streams");
            return std::log(n_docs / df);
        case IdfVariant::smoothed:
            return std::log((n_docs + 1.0) / (df + 0.5));
        case IdfVariant::probabilistic:
            if (df <= 0 || df >= n_docs)
                throw DegenerateFrequency("idf variant p undefined at df = 0 or df = N; use a "
                                          "smoothed variant (s or b) on streams");
            return std::log((n_docs - df) / df);
        case IdfVariant::bm25:
            return std::log((n_docs - df + 0.5) / (df + 0.5));
    }
    return 0.0;
}

inline double norm_component(const WeightingScheme& scheme, const Document& doc, double avdl) {
    if (scheme.norm == NormVariant::none) return 1.0;
    if (doc.empty())
        throw ZeroNorm("cannot normalize an empty document under variant '" +
                       std::string(1, static_cast<char>(scheme.norm)) + "'");
    switch (scheme.norm) {
        case NormVariant::unique:
            return static_cast<double>(doc.uniq);
        case NormVariant::length:
            return static_cast<double>(doc.dl);
        case NormVariant::l2: {
            double sum = 0.0;
            for (const auto& [term, tf] : doc.tf) sum += static_cast<double>(tf) * tf;
            return std::sqrt(sum);
        }
        case NormVariant::pivot:
            return 1.0 - scheme.b + scheme.b * static_cast<double>(doc.dl) / avdl;
        case NormVariant::none:
            break;
    }
    return 1.0;
}

}  // namespace fsd
