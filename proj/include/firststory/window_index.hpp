#pragma once

// Last-N document memory: FIFO store with incrementally maintained document
// frequencies, total length, and the concatenated summary pseudo-document.

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>

#include "firststory/errors.hpp"
#include "firststory/text.hpp"
#include "firststory/weighting.hpp"

namespace fsd {

class WindowIndex {
public:
    explicit WindowIndex(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ConfigError("window capacity must be positive");
    }

    // Append a document, evicting (and returning) the oldest one when the
    // window is full. df counts documents containing a term, not occurrences.
    std::optional<Document> push(Document doc) {
        std::optional<Document> evicted;
        if (docs_.size() == capacity_) {
            evicted = std::move(docs_.front());
            docs_.pop_front();
            remove_stats(*evicted);
        }
        add_stats(doc);
        docs_.push_back(std::move(doc));
        return evicted;
    }

    // View over the current state; valid until the next push. avdl falls back
    // to 1 when the window is empty (or holds only empty documents) so pivot
    // and BM25 formulas stay total.
    CollectionStats stats() const {
        CollectionStats s;
        s.n_docs = docs_.size();
        s.avdl = sum_dl_ > 0 ? static_cast<double>(sum_dl_) / static_cast<double>(docs_.size())
                             : 1.0;
        s.df = &df_;
        return s;
    }

    // Concatenation of every stored document into one pseudo-document.
    Document summary_document() const {
        Document summary;
        summary.id = "<summary>";
        summary.tf = summary_tf_;
        summary.dl = sum_dl_;
        summary.uniq = static_cast<std::int64_t>(summary_tf_.size());
        summary.zero_length = summary.dl == 0;
        return summary;
    }

    std::size_t size() const { return docs_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<Document>& documents() const { return docs_; }
    const TermCounts& document_frequencies() const { return df_; }
    const TermCounts& summary_counts() const { return summary_tf_; }
    std::int64_t total_length() const { return sum_dl_; }

private:
    void add_stats(const Document& doc) {
        for (const auto& [term, tf] : doc.tf) {
            df_[term] += 1;
            summary_tf_[term] += tf;
        }
        sum_dl_ += doc.dl;
    }

    void remove_stats(const Document& doc) {
        for (const auto& [term, tf] : doc.tf) {
            auto it = df_.find(term);
            if (--it->second == 0) df_.erase(it);
            auto st = summary_tf_.find(term);
            st->second -= tf;
            if (st->second == 0) summary_tf_.erase(st);
        }
        sum_dl_ -= doc.dl;
    }

    std::size_t capacity_;
    std::deque<Document> docs_;
    TermCounts df_;
    TermCounts summary_tf_;
    std::int64_t sum_dl_ = 0;
};

}  // namespace fsd
