#pragma once

// JSON-lines stream ingestion. One record per line:
//   {"id": "...", "timestamp": 1342080000, "title": "...", "text": "...",
//    "content": "...", "cluster_id": "..."}
// id and at least one of text/content are required; the rest is optional.
// timestamp may be an integer (epoch or position) or an ISO-8601 string.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <istream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace fsd {

struct StreamRecord {
    std::string id;
    std::int64_t timestamp = 0;
    std::string title;
    std::string text;       // snippet-level surface
    std::string content;    // full-article surface, optional
    std::string cluster_id;
};

struct IngestStats {
    std::size_t parsed = 0;
    std::size_t skipped = 0;            // malformed lines
    std::size_t order_violations = 0;   // decreasing timestamps (order kept)
};

namespace ingest_detail {

// "2012-07-12T08:30:00" (optional trailing Z / offset ignored) -> epoch secs.
inline bool parse_iso8601(const std::string& text, std::int64_t& out) {
    std::tm tm = {};
    int year, month, day, hour = 0, minute = 0, second = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &year, &month, &day, &hour, &minute,
                        &second);
    if (n != 3 && n != 6) return false;
    tm.tm_year = year - 1900;
    tm.tm_mon = month - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = minute;
    tm.tm_sec = second;
    std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1)) return false;
    out = static_cast<std::int64_t>(t);
    return true;
}

}  // namespace ingest_detail

// Records are consumed in file order; order is authoritative even when
// timestamps run backwards (counted as violations).
inline std::vector<StreamRecord> read_jsonl(std::istream& in, IngestStats* stats = nullptr) {
    std::vector<StreamRecord> stream;
    IngestStats local;
    std::string line;
    std::size_t line_no = 0;
    std::int64_t last_ts = std::numeric_limits<std::int64_t>::min();
    while (std::getline(in, line)) {
        line_no++;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            local.skipped++;
            continue;
        }
        StreamRecord record;
        if (parsed.contains("id")) {
            const auto& id = parsed["id"];
            if (id.is_string())
                record.id = id.get<std::string>();
            else if (id.is_number_integer())
                record.id = std::to_string(id.get<std::int64_t>());
        }
        if (parsed.contains("title") && parsed["title"].is_string())
            record.title = parsed["title"].get<std::string>();
        if (parsed.contains("text") && parsed["text"].is_string())
            record.text = parsed["text"].get<std::string>();
        if (parsed.contains("content") && parsed["content"].is_string())
            record.content = parsed["content"].get<std::string>();
        if (parsed.contains("cluster_id")) {
            const auto& cluster = parsed["cluster_id"];
            if (cluster.is_string())
                record.cluster_id = cluster.get<std::string>();
            else if (cluster.is_number_integer())
                record.cluster_id = std::to_string(cluster.get<std::int64_t>());
        }
        if (record.id.empty() || (record.text.empty() && record.content.empty())) {
            local.skipped++;
            continue;
        }
        if (parsed.contains("timestamp")) {
            const auto& ts = parsed["timestamp"];
            if (ts.is_number_integer()) {
                record.timestamp = ts.get<std::int64_t>();
            } else if (ts.is_number()) {
                record.timestamp = static_cast<std::int64_t>(ts.get<double>());
            } else if (ts.is_string()) {
                std::int64_t value = 0;
                const std::string text = ts.get<std::string>();
                try {
                    std::size_t pos = 0;
                    value = std::stoll(text, &pos);
                    if (pos != text.size() && !ingest_detail::parse_iso8601(text, value)) {
                        local.skipped++;
                        continue;
                    }
                } catch (const std::exception&) {
                    if (!ingest_detail::parse_iso8601(text, value)) {
                        local.skipped++;
                        continue;
                    }
                }
                record.timestamp = value;
            }
        } else {
            record.timestamp = static_cast<std::int64_t>(line_no - 1);
        }
        if (record.timestamp < last_ts) local.order_violations++;
        last_ts = record.timestamp;
        local.parsed++;
        stream.push_back(std::move(record));
    }
    if (stats) *stats = local;
    return stream;
}

}  // namespace fsd
