#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace naqs {

// One result row: string tags (command, method, ...), numeric parameters
// (n, cut, seed, ...), and measured quantities. A quantity without an entry
// in `errors` is exact. Maps keep fields deterministically ordered.
struct ResultRecord {
    std::string command;
    std::string config_digest;
    std::map<std::string, std::string> tags;
    std::map<std::string, double> params;
    std::map<std::string, double> metrics;
    std::map<std::string, double> errors;

    bool operator==(const ResultRecord&) const = default;
};

enum class RecordFormat { JsonLines, Csv };

std::string record_to_json_line(const ResultRecord& record);
ResultRecord record_from_json_line(const std::string& line);

// Writes records to `path`; JSON lines hold one record per line, CSV emits
// the sorted union of columns with one row per record.
void emit_results(const std::vector<ResultRecord>& records, RecordFormat format,
                  const std::string& path);
std::vector<ResultRecord> read_json_records(const std::string& path);

// FNV-1a 64-bit digest of the canonical config text, as fixed-width hex.
std::string config_digest(const std::string& canonical_text);

} // namespace naqs
