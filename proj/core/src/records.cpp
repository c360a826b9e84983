#include "naqs/records.hpp"

#include "naqs/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace naqs {

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const ResultRecord& r) {
    ordered_json j;
    j["command"] = r.command;
    j["config_digest"] = r.config_digest;
    j["tags"] = r.tags;
    j["params"] = r.params;
    j["metrics"] = r.metrics;
    j["errors"] = r.errors;
    return j;
}

ResultRecord from_json(const ordered_json& j) {
    ResultRecord r;
    r.command = j.at("command").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.tags = j.at("tags").get<std::map<std::string, std::string>>();
    r.params = j.at("params").get<std::map<std::string, double>>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.errors = j.at("errors").get<std::map<std::string, double>>();
    return r;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string record_to_json_line(const ResultRecord& record) { return to_json(record).dump(); }

ResultRecord record_from_json_line(const std::string& line) {
    return from_json(ordered_json::parse(line));
}

void emit_results(const std::vector<ResultRecord>& records, RecordFormat format,
                  const std::string& path) {
    if (records.empty()) throw std::invalid_argument("no result records to emit");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write results: " + path);

    if (format == RecordFormat::JsonLines) {
        for (const auto& r : records) out << record_to_json_line(r) << '\n';
        return;
    }

    // CSV: sorted union of columns across records
    std::set<std::string> tag_cols, param_cols, metric_cols, error_cols;
    for (const auto& r : records) {
        for (const auto& [k, _] : r.tags) tag_cols.insert(k);
        for (const auto& [k, _] : r.params) param_cols.insert(k);
        for (const auto& [k, _] : r.metrics) metric_cols.insert(k);
        for (const auto& [k, _] : r.errors) error_cols.insert(k);
    }
    out << "command,config_digest";
    for (const auto& c : tag_cols) out << ',' << c;
    for (const auto& c : param_cols) out << ',' << c;
    for (const auto& c : metric_cols) out << ',' << c;
    for (const auto& c : error_cols) out << ',' << c << "_stderr";
    out << '\n';
    for (const auto& r : records) {
        out << r.command << ',' << r.config_digest;
        for (const auto& c : tag_cols) {
            const auto it = r.tags.find(c);
            out << ',' << (it != r.tags.end() ? it->second : "");
        }
        auto emit_num = [&](const std::map<std::string, double>& m, const std::string& c) {
            const auto it = m.find(c);
            out << ',';
            if (it != m.end()) out << format_double(it->second);
        };
        for (const auto& c : param_cols) emit_num(r.params, c);
        for (const auto& c : metric_cols) emit_num(r.metrics, c);
        for (const auto& c : error_cols) emit_num(r.errors, c);
        out << '\n';
    }
}

std::vector<ResultRecord> read_json_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("cannot open results: " + path);
    std::vector<ResultRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json_line(line));
    }
    return records;
}

std::string config_digest(const std::string& canonical_text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical_text) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

} // namespace naqs
