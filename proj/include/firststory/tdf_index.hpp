#pragma once

// Temporal document frequency: a per-term value that stands in for window DF
// without storing any documents. On each occurrence the old value is scaled
// by a decay of the gap since the last occurrence, then incremented:
//
//   tdf(q, t) = tdf(q, t_old) * f(t - t_old) + 1, first occurrence -> 1
//
// Time is the document counter (one tick per document). Entries whose gap
// reaches the window length N are gone: updates reset them to 1, reads
// return 0, and compact() reclaims them.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "firststory/errors.hpp"
#include "firststory/text.hpp"
#include "firststory/weighting.hpp"

namespace fsd {

enum class DecayKind { linear, exp1, exp2, sigmoid };

inline const char* decay_name(DecayKind kind) {
    switch (kind) {
        case DecayKind::linear: return "linear";
        case DecayKind::exp1: return "exp1";
        case DecayKind::exp2: return "exp2";
        case DecayKind::sigmoid: return "sigmoid";
    }
    return "?";
}

inline DecayKind parse_decay(std::string_view name) {
    if (name == "linear") return DecayKind::linear;
    if (name == "exp1") return DecayKind::exp1;
    if (name == "exp2") return DecayKind::exp2;
    if (name == "sigmoid") return DecayKind::sigmoid;
    throw ConfigError("unknown decay function '" + std::string(name) +
                      "' (expected linear, exp1, exp2 or sigmoid)");
}

struct DecayConfig {
    DecayKind kind = DecayKind::sigmoid;
    std::int64_t window = 100;  // N the decay is anchored to
    double alpha = 35.0;        // decay rate; unused for linear

    void validate() const {
        if (window <= 0) throw ConfigError("decay window N must be positive");
        if (kind != DecayKind::linear && alpha <= 0)
            throw ConfigError("decay alpha must be positive for exp1/exp2/sigmoid");
    }
};

// f(delta) for delta in [1, N]. exp1 and sigmoid are defined piecewise with
// f(N) = 0; exp2 vanishes at N by construction; linear reaches 1/N.
inline double decay_factor(const DecayConfig& config, std::int64_t delta) {
    const double n = static_cast<double>(config.window);
    const double d = static_cast<double>(delta);
    if (delta < 1 || delta > config.window)
        throw DeltaOutOfRange("decay delta " + std::to_string(delta) + " outside [1, " +
                              std::to_string(config.window) + "]");
    switch (config.kind) {
        case DecayKind::linear:
            return 1.0 - (d - 1.0) / n;
        case DecayKind::exp1:
            return delta == config.window ? 0.0 : std::exp(-(d - 1.0) / config.alpha);
        case DecayKind::exp2:
            return 1.0 - std::exp((d - n) / config.alpha);
        case DecayKind::sigmoid:
            return delta == config.window ? 0.0
                                          : 1.0 / (1.0 + std::exp((d - n / 2.0) / config.alpha));
    }
    return 0.0;
}

class TdfIndex {
public:
    explicit TdfIndex(DecayConfig decay) : decay_(decay) { decay_.validate(); }

    // Advance the clock and bump every distinct term of the document.
    // Multiplicity inside the document is ignored (document frequency
    // semantics). An amortized sweep keeps the entry count bounded by the
    // vocabulary of the last 2N documents.
    void observe(const Document& doc) {
        ++now_;
        for (const auto& [term, tf] : doc.tf) {
            auto [it, inserted] = entries_.try_emplace(term, Entry{1.0, now_});
            if (!inserted) {
                std::int64_t delta = now_ - it->second.last_seen;
                it->second.value = delta < decay_.window
                                       ? it->second.value * decay_factor(decay_, delta) + 1.0
                                       : 1.0;
                it->second.last_seen = now_;
            }
        }
        if (now_ % decay_.window == 0) compact();
    }

    // Lazily decayed read; does not mutate the entry. A term observed this
    // tick returns its stored value; a gap of N or more reads as 0.
    double query(const std::string& term) const {
        auto it = entries_.find(term);
        if (it == entries_.end()) return 0.0;
        std::int64_t delta = now_ - it->second.last_seen;
        if (delta == 0) return it->second.value;
        if (delta >= decay_.window) return 0.0;
        return it->second.value * decay_factor(decay_, delta);
    }

    // IDF with tdf in place of df and the window length in place of the
    // collection size. tdf is clamped to N first: dense terms grow past N
    // (the recurrence adds 1 per occurrence) and would otherwise drive the
    // smoothed IDF arbitrarily negative.
    double itdf(const std::string& term, const WeightingScheme& scheme) const {
        const double n = static_cast<double>(decay_.window);
        return idf_component(scheme, std::min(query(term), n), n);
    }

    std::int64_t now() const { return now_; }
    const DecayConfig& decay() const { return decay_; }
    std::size_t entry_count() const { return entries_.size(); }

    // Drop entries that can no longer influence any read. Safe at any time.
    void compact() {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (now_ - it->second.last_seen >= decay_.window)
                it = entries_.erase(it);
            else
                ++it;
        }
    }

    // Snapshot: a header with clock and decay config, then one
    // term<TAB>value<TAB>last_seen line per entry. Restores a run without any
    // documents.
    void save(std::ostream& out) const {
        out << "#tdf now=" << now_ << " decay=" << decay_name(decay_.kind)
            << " N=" << decay_.window << " alpha=" << decay_.alpha << "\n";
        char buf[32];
        for (const auto& [term, entry] : entries_) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), entry.value,
                                           std::chars_format::general, 17);
            out << term << '\t' << std::string_view(buf, end) << '\t' << entry.last_seen << '\n';
        }
    }

    static TdfIndex load(std::istream& in) {
        std::string header;
        if (!std::getline(in, header) || header.rfind("#tdf ", 0) != 0)
            throw ConfigError("bad tdf snapshot: missing '#tdf' header");
        DecayConfig decay;
        std::int64_t now = 0;
        std::istringstream hs(header.substr(5));
        std::string field;
        while (hs >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) throw ConfigError("bad tdf header field: " + field);
            std::string key = field.substr(0, eq), value = field.substr(eq + 1);
            if (key == "now")
                now = std::stoll(value);
            else if (key == "decay")
                decay.kind = parse_decay(value);
            else if (key == "N")
                decay.window = std::stoll(value);
            else if (key == "alpha")
                decay.alpha = std::stod(value);
            else
                throw ConfigError("unknown tdf header field: " + key);
        }
        TdfIndex index(decay);
        index.now_ = now;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto tab1 = line.find('\t');
            auto tab2 = line.find('\t', tab1 + 1);
            if (tab1 == std::string::npos || tab2 == std::string::npos)
                throw ConfigError("bad tdf snapshot line: " + line);
            Entry entry;
            try {
                entry.value = std::stod(line.substr(tab1 + 1, tab2 - tab1 - 1));
                entry.last_seen = std::stoll(line.substr(tab2 + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad tdf snapshot line: " + line);
            }
            if (entry.last_seen > now) throw ConfigError("tdf entry newer than snapshot clock");
            index.entries_.emplace(line.substr(0, tab1), entry);
        }
        return index;
    }

private:
    struct Entry {
        double value = 0.0;
        std::int64_t last_seen = 0;
    };

    DecayConfig decay_;
    std::int64_t now_ = 0;
    std::unordered_map<std::string, Entry> entries_;
};

}  // namespace fsd
