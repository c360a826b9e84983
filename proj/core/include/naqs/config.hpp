#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naqs/errors.hpp"
#include "naqs/lattice.hpp"
#include "naqs/state.hpp"
#include "naqs/training.hpp"

namespace naqs {

// Parsed value of one config entry: bool, number, string, or a (possibly
// nested) array of values.
struct ConfigValue {
    enum class Type { Bool, Number, String, Array };
    Type type = Type::Number;
    bool boolean = false;
    double number = 0.0;
    std::string text;
    std::vector<ConfigValue> array;
};

using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

// Sectioned key/value text: [section] headers, `key = value` entries,
// `#` comments; values are booleans, numbers, "strings" (or bare tokens),
// and bracketed arrays.
ConfigTable parse_config_text(const std::string& text);
// Applies one `section.key=value` override.
void apply_override(ConfigTable& table, const std::string& spec);
// Sorted, normalized serialization; input to the config digest.
std::string canonical_config_text(const ConfigTable& table);

// Fully validated run configuration. Unknown sections or keys are rejected.
struct RunConfig {
    LatticeKind lattice_kind = LatticeKind::ChainOpen;
    int sites = 0; // side length for square lattices
    OrderingKind ordering = OrderingKind::Linear;

    int depth = 3;
    int width = 8;
    PhaseModelKind phase_model = PhaseModelKind::MarshallRule;
    bool z2 = false;
    bool translational = false;
    std::uint64_t init_seed = 1;

    TrainingSchedule training;
    std::uint64_t training_seed = 1;
    int log_every = 50;

    TrainingSchedule reverse_schedule;
    std::uint64_t reverse_seed = 2;
    int reverse_depth = 0; // 0 = same as network
    int reverse_width = 0;

    std::string method = "cs";
    std::vector<int> orders{2};
    std::vector<int> cuts; // empty + cuts_all -> every prefix cut
    bool cuts_all = true;
    long batches = 1000;
    std::optional<std::uint64_t> estimator_seed;
    int workers = 1;
    int bootstrap = 200;
    int chunk = 2048;

    int n_c = 7;
    std::optional<double> q;
    int fit_lo = 10;
    int fit_hi = 32;
    int min_subset = 10;

    std::string checkpoint_path;
    std::string reverse_checkpoint_path;
    std::string records_path;

    std::string oracle_state = "afh-ground";

    std::string digest;

    Lattice make_lattice() const;
    SiteOrdering make_ordering(const Lattice& lattice) const;
    std::vector<int> resolve_cuts(int num_sites) const;
};

RunConfig make_run_config(const ConfigTable& table);
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides);

} // namespace naqs
