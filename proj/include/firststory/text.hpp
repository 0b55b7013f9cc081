#pragma once

// Raw text -> bag-of-words pipeline: tokenize, stopword filter, stem, count.

#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "firststory/porter.hpp"

namespace fsd {

using TermCounts = std::unordered_map<std::string, std::int64_t>;
using Stoplist = std::unordered_set<std::string>;

// Timestamped bag of words. dl is the post-filter token count (L1 length),
// uniq the number of distinct terms.
struct Document {
    std::string id;
    std::int64_t timestamp = 0;
    TermCounts tf;
    std::int64_t dl = 0;
    std::int64_t uniq = 0;
    bool zero_length = false;  // nothing survived preprocessing

    bool empty() const { return dl == 0; }
};

// Lowercased alphanumeric runs; everything else is a delimiter. Bytes above
// 0x7f are kept as word characters so UTF-8 words survive intact, but only
// ASCII letters are case-folded.
inline std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : raw) {
        bool word_char = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                         (c >= '0' && c <= '9') || c >= 0x80;
        if (word_char) {
            if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
            current.push_back(static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Order-preserving filter.
inline std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                                 const Stoplist& stoplist) {
    if (stoplist.empty()) return tokens;
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (auto& t : tokens)
        if (!stoplist.contains(t)) kept.push_back(std::move(t));
    return kept;
}

// tokenize -> stopword filter -> stem -> count. Stopwords are matched on
// surface forms, so filtering runs before stemming.
inline Document build_document(std::string id, std::int64_t timestamp, std::string_view raw,
                               const Stoplist& stoplist) {
    Document doc;
    doc.id = std::move(id);
    doc.timestamp = timestamp;
    auto tokens = remove_stopwords(tokenize(raw), stoplist);
    for (const auto& token : tokens) {
        doc.tf[porter_stem(token)] += 1;
    }
    doc.dl = static_cast<std::int64_t>(tokens.size());
    doc.uniq = static_cast<std::int64_t>(doc.tf.size());
    doc.zero_length = doc.dl == 0;
    return doc;
}

// Stopword file: one token per line, '#' starts a comment line, blank lines
// ignored. Entries are lowercased.
inline Stoplist read_stoplist(std::istream& in) {
    Stoplist stoplist;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::size_t end = line.find_last_not_of(" \t");
        std::string word = line.substr(start, end - start + 1);
        for (auto& c : word)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        stoplist.insert(std::move(word));
    }
    return stoplist;
}

inline Stoplist parse_stoplist(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_stoplist(in);
}

// Default English stopword list (common function words).
inline const Stoplist& default_stoplist() {
    static const Stoplist list = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
        "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "cannot", "could", "did", "do", "does",
        "doing", "don", "down", "during", "each", "few", "for", "from", "further", "had",
        "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself",
        "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself", "just",
        "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on",
        "once", "only", "or", "other", "ought", "our", "ours", "ourselves", "out", "over",
        "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
        "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
        "those", "through", "to", "too", "under", "until", "up", "very", "was", "we",
        "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
        "with", "won", "would", "you", "your", "yours", "yourself", "yourselves",
    };
    return list;
}

}  // namespace fsd
