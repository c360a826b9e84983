#include "naqs/config.hpp"

#include "naqs/records.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace naqs {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// recursive-descent value parser over [pos, end)
ConfigValue parse_value(const std::string& s, std::size_t& pos);

void skip_spaces(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

ConfigValue parse_value(const std::string& s, std::size_t& pos) {
    skip_spaces(s, pos);
    if (pos >= s.size()) throw ConfigError("empty config value");
    ConfigValue v;
    const char c = s[pos];
    if (c == '[') {
        v.type = ConfigValue::Type::Array;
        ++pos;
        skip_spaces(s, pos);
        if (pos < s.size() && s[pos] == ']') {
            ++pos;
            return v;
        }
        while (true) {
            v.array.push_back(parse_value(s, pos));
            skip_spaces(s, pos);
            if (pos >= s.size()) throw ConfigError("unterminated array in config value");
            if (s[pos] == ',') {
                ++pos;
                continue;
            }
            if (s[pos] == ']') {
                ++pos;
                return v;
            }
            throw ConfigError("expected ',' or ']' in config array");
        }
    }
    if (c == '"') {
        v.type = ConfigValue::Type::String;
        ++pos;
        while (pos < s.size() && s[pos] != '"') v.text.push_back(s[pos++]);
        if (pos >= s.size()) throw ConfigError("unterminated string in config value");
        ++pos;
        return v;
    }
    // bare token: up to ',', ']' or end
    std::string token;
    while (pos < s.size() && s[pos] != ',' && s[pos] != ']') token.push_back(s[pos++]);
    token = trim(token);
    if (token.empty()) throw ConfigError("empty config value");
    if (token == "true" || token == "false") {
        v.type = ConfigValue::Type::Bool;
        v.boolean = token == "true";
        return v;
    }
    char* end = nullptr;
    const double num = std::strtod(token.c_str(), &end);
    if (end && *end == '\0') {
        v.type = ConfigValue::Type::Number;
        v.number = num;
        return v;
    }
    v.type = ConfigValue::Type::String;
    v.text = token;
    return v;
}

ConfigValue parse_single_value(const std::string& text) {
    std::size_t pos = 0;
    ConfigValue v = parse_value(text, pos);
    skip_spaces(text, pos);
    if (pos != text.size()) throw ConfigError("trailing characters in config value: " + text);
    return v;
}

std::string value_repr(const ConfigValue& v) {
    switch (v.type) {
        case ConfigValue::Type::Bool: return v.boolean ? "true" : "false";
        case ConfigValue::Type::Number: {
            std::ostringstream os;
            os.precision(17);
            os << v.number;
            return os.str();
        }
        case ConfigValue::Type::String: return '"' + v.text + '"';
        case ConfigValue::Type::Array: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.array.size(); ++i) {
                if (i) out += ",";
                out += value_repr(v.array[i]);
            }
            return out + "]";
        }
    }
    return "";
}

} // namespace

ConfigTable parse_config_text(const std::string& text) {
    ConfigTable table;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name at line " + std::to_string(line_no));
            table.emplace(section, std::map<std::string, ConfigValue>{});
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(line_no));
        if (section.empty())
            throw ConfigError("key outside of any section at line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(line_no));
        table[section][key] = parse_single_value(trim(line.substr(eq + 1)));
    }
    return table;
}

void apply_override(ConfigTable& table, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("override must look like section.key=value");
    const std::string path = trim(spec.substr(0, eq));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos) throw ConfigError("override key must be section.key");
    table[path.substr(0, dot)][path.substr(dot + 1)] = parse_single_value(trim(spec.substr(eq + 1)));
}

std::string canonical_config_text(const ConfigTable& table) {
    std::string out;
    for (const auto& [section, entries] : table)
        for (const auto& [key, value] : entries)
            out += section + "." + key + "=" + value_repr(value) + "\n";
    return out;
}

namespace {

// schema: section -> allowed keys
const std::map<std::string, std::vector<std::string>> kSchema = {
    {"lattice", {"kind", "sites", "side"}},
    {"ordering", {"kind"}},
    {"network", {"depth", "width", "phase_model", "z2", "translational", "init_seed"}},
    {"training", {"stages", "penalty_weight", "seed", "log_every"}},
    {"reverse", {"stages", "seed", "depth", "width"}},
    {"estimator", {"method", "orders", "cuts", "batches", "seed", "workers", "bootstrap", "chunk"}},
    {"analysis", {"n_c", "q", "fit_lo", "fit_hi", "min_subset"}},
    {"io", {"checkpoint", "reverse_checkpoint", "records"}},
    {"oracle", {"state"}},
};

class ConfigReader {
  public:
    explicit ConfigReader(const ConfigTable& table) : table_(table) {
        for (const auto& [section, entries] : table_) {
            const auto it = kSchema.find(section);
            if (it == kSchema.end()) throw ConfigError("unknown config section: " + section);
            for (const auto& [key, _] : entries)
                if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                    throw ConfigError("unknown config key: " + section + "." + key);
        }
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = table_.find(section);
        return s != table_.end() && s->second.count(key) > 0;
    }

    const ConfigValue& raw(const std::string& section, const std::string& key) const {
        return table_.at(section).at(key);
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const ConfigValue& v = raw(section, key);
        if (v.type != ConfigValue::Type::Bool)
            throw ConfigError(section + "." + key + " must be a boolean");
        return v.boolean;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        const ConfigValue& v = raw(section, key);
        if (v.type != ConfigValue::Type::Number)
            throw ConfigError(section + "." + key + " must be a number");
        return v.number;
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        if (!has(section, key)) return fallback;
        const double d = get_double(section, key, 0.0);
        const long i = static_cast<long>(std::llround(d));
        if (static_cast<double>(i) != d)
            throw ConfigError(section + "." + key + " must be an integer");
        return i;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        if (!has(section, key)) return fallback;
        const ConfigValue& v = raw(section, key);
        if (v.type != ConfigValue::Type::String)
            throw ConfigError(section + "." + key + " must be a string");
        return v.text;
    }

    std::vector<int> get_int_array(const std::string& section, const std::string& key) const {
        const ConfigValue& v = raw(section, key);
        if (v.type != ConfigValue::Type::Array)
            throw ConfigError(section + "." + key + " must be an array");
        std::vector<int> out;
        for (const auto& e : v.array) {
            if (e.type != ConfigValue::Type::Number || e.number != std::floor(e.number))
                throw ConfigError(section + "." + key + " must hold integers");
            out.push_back(static_cast<int>(e.number));
        }
        return out;
    }

    std::vector<TrainingStage> get_stages(const std::string& section) const {
        const ConfigValue& v = raw(section, "stages");
        if (v.type != ConfigValue::Type::Array)
            throw ConfigError(section + ".stages must be an array of [steps, lr, batch]");
        std::vector<TrainingStage> out;
        for (const auto& e : v.array) {
            if (e.type != ConfigValue::Type::Array || e.array.size() != 3)
                throw ConfigError(section + ".stages entries must be [steps, lr, batch]");
            for (const auto& x : e.array)
                if (x.type != ConfigValue::Type::Number)
                    throw ConfigError(section + ".stages entries must be numeric");
            TrainingStage stage;
            stage.steps = static_cast<int>(e.array[0].number);
            stage.learning_rate = e.array[1].number;
            stage.batch_size = static_cast<int>(e.array[2].number);
            out.push_back(stage);
        }
        return out;
    }

  private:
    const ConfigTable& table_;
};

std::vector<int> parse_orders(const ConfigReader& reader) {
    if (!reader.has("estimator", "orders")) return {2};
    const ConfigValue& v = reader.raw("estimator", "orders");
    if (v.type == ConfigValue::Type::String) {
        // range form "a..b"
        const std::size_t dots = v.text.find("..");
        if (dots == std::string::npos)
            throw ConfigError("estimator.orders string must look like \"2..32\"");
        const int lo = std::stoi(v.text.substr(0, dots));
        const int hi = std::stoi(v.text.substr(dots + 2));
        if (lo < 2 || hi < lo) throw ConfigError("estimator.orders range is invalid");
        std::vector<int> out;
        for (int n = lo; n <= hi; ++n) out.push_back(n);
        return out;
    }
    return reader.get_int_array("estimator", "orders");
}

} // namespace

Lattice RunConfig::make_lattice() const {
    return lattice_kind == LatticeKind::SquarePeriodic ? Lattice::square_periodic(sites)
                                                       : Lattice::make(lattice_kind, sites);
}

SiteOrdering RunConfig::make_ordering(const Lattice& lattice) const {
    return build_ordering(ordering, lattice);
}

std::vector<int> RunConfig::resolve_cuts(int num_sites) const {
    if (!cuts_all) return cuts;
    std::vector<int> all;
    for (int k = 1; k < num_sites; ++k) all.push_back(k);
    return all;
}

RunConfig make_run_config(const ConfigTable& table) {
    ConfigReader reader(table);
    RunConfig cfg;

    if (!reader.has("lattice", "kind")) throw ConfigError("lattice.kind is required");
    cfg.lattice_kind = lattice_kind_from_string(reader.get_string("lattice", "kind", ""));
    if (cfg.lattice_kind == LatticeKind::SquarePeriodic) {
        cfg.sites = static_cast<int>(reader.get_int("lattice", "side", 0));
        if (cfg.sites < 2) throw ConfigError("lattice.side is required for square lattices");
    } else {
        cfg.sites = static_cast<int>(reader.get_int("lattice", "sites", 0));
        if (cfg.sites < 2) throw ConfigError("lattice.sites is required for chains");
    }
    cfg.ordering = ordering_kind_from_string(reader.get_string("ordering", "kind", "linear"));

    cfg.depth = static_cast<int>(reader.get_int("network", "depth", 3));
    cfg.width = static_cast<int>(reader.get_int("network", "width", 8));
    cfg.phase_model =
        phase_model_from_string(reader.get_string("network", "phase_model", "marshall-rule"));
    cfg.z2 = reader.get_bool("network", "z2", false);
    cfg.translational = reader.get_bool("network", "translational", false);
    cfg.init_seed = static_cast<std::uint64_t>(reader.get_int("network", "init_seed", 1));

    if (reader.has("training", "stages")) cfg.training.stages = reader.get_stages("training");
    else cfg.training.stages = {TrainingStage{200, 1e-3, 100}};
    cfg.training.penalty_weight = reader.get_double("training", "penalty_weight", 0.0);
    cfg.training_seed = static_cast<std::uint64_t>(reader.get_int("training", "seed", 1));
    cfg.log_every = static_cast<int>(reader.get_int("training", "log_every", 50));

    if (reader.has("reverse", "stages")) cfg.reverse_schedule.stages = reader.get_stages("reverse");
    else cfg.reverse_schedule.stages = {TrainingStage{200, 1e-3, 100}};
    cfg.reverse_seed = static_cast<std::uint64_t>(reader.get_int("reverse", "seed", 2));
    cfg.reverse_depth = static_cast<int>(reader.get_int("reverse", "depth", 0));
    cfg.reverse_width = static_cast<int>(reader.get_int("reverse", "width", 0));

    cfg.method = reader.get_string("estimator", "method", "cs");
    if (cfg.method != "ds" && cfg.method != "cs")
        throw ConfigError("estimator.method must be \"ds\" or \"cs\"");
    cfg.orders = parse_orders(reader);
    if (reader.has("estimator", "cuts")) {
        const ConfigValue& v = reader.raw("estimator", "cuts");
        if (v.type == ConfigValue::Type::String) {
            if (v.text != "all") throw ConfigError("estimator.cuts must be \"all\" or an array");
            cfg.cuts_all = true;
        } else {
            cfg.cuts_all = false;
            cfg.cuts = reader.get_int_array("estimator", "cuts");
        }
    }
    cfg.batches = reader.get_int("estimator", "batches", 1000);
    if (reader.has("estimator", "seed"))
        cfg.estimator_seed = static_cast<std::uint64_t>(reader.get_int("estimator", "seed", 0));
    cfg.workers = static_cast<int>(reader.get_int("estimator", "workers", 1));
    cfg.bootstrap = static_cast<int>(reader.get_int("estimator", "bootstrap", 200));
    cfg.chunk = static_cast<int>(reader.get_int("estimator", "chunk", 2048));

    cfg.n_c = static_cast<int>(reader.get_int("analysis", "n_c", 7));
    if (reader.has("analysis", "q")) cfg.q = reader.get_double("analysis", "q", 0.0);
    cfg.fit_lo = static_cast<int>(reader.get_int("analysis", "fit_lo", 10));
    cfg.fit_hi = static_cast<int>(reader.get_int("analysis", "fit_hi", 32));
    cfg.min_subset = static_cast<int>(reader.get_int("analysis", "min_subset", 10));

    cfg.checkpoint_path = reader.get_string("io", "checkpoint", "");
    cfg.reverse_checkpoint_path = reader.get_string("io", "reverse_checkpoint", "");
    cfg.records_path = reader.get_string("io", "records", "");

    cfg.oracle_state = reader.get_string("oracle", "state", "afh-ground");

    cfg.digest = config_digest(canonical_config_text(table));
    return cfg;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("cannot open config: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    ConfigTable table = parse_config_text(buffer.str());
    for (const auto& o : overrides) apply_override(table, o);
    return make_run_config(table);
}

} // namespace naqs
