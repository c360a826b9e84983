#include "naqs/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace naqs {

namespace {

using nlohmann::ordered_json;

ordered_json layer_to_json(const MaskedLayer& layer) {
    ordered_json j;
    j["rows"] = layer.fan_out();
    j["cols"] = layer.fan_in();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.fan_out()) * static_cast<std::size_t>(layer.fan_in()));
    for (int r = 0; r < layer.fan_out(); ++r)
        for (int c = 0; c < layer.fan_in(); ++c) w.push_back(layer.weights(r, c));
    j["weights"] = w;
    std::vector<double> b(layer.biases.data(), layer.biases.data() + layer.biases.size());
    j["biases"] = b;
    return j;
}

void layer_from_json(const ordered_json& j, MaskedLayer& layer) {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    if (rows != layer.fan_out() || cols != layer.fan_in())
        throw ConfigError("checkpoint layer shape does not match the declared architecture");
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto b = j.at("biases").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != rows * cols || static_cast<int>(b.size()) != rows)
        throw ConfigError("checkpoint layer data has the wrong length");
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r) * cols + c];
    for (int r = 0; r < rows; ++r) layer.biases(r) = b[static_cast<std::size_t>(r)];
    layer.weights = layer.weights.cwiseProduct(layer.mask);
}

ordered_json network_to_json(const FeedForward& net) {
    ordered_json layers = ordered_json::array();
    for (const auto& layer : net.layers()) layers.push_back(layer_to_json(layer));
    return layers;
}

void network_from_json(const ordered_json& layers, FeedForward& net) {
    if (layers.size() != net.layers().size())
        throw ConfigError("checkpoint layer count does not match the declared depth");
    for (std::size_t l = 0; l < net.layers().size(); ++l)
        layer_from_json(layers[l], net.layers()[l]);
}

ordered_json header_json(const Lattice& lattice, OrderingKind ordering, int depth, int width,
                         const std::string& phase_model, bool z2, bool translational,
                         const std::string& role) {
    ordered_json j;
    j["format_version"] = 1;
    j["role"] = role;
    j["lattice"] = {{"kind", to_string(lattice.kind())},
                    {"sites", lattice.num_sites()},
                    {"side", lattice.side()}};
    j["ordering"] = to_string(ordering);
    j["depth"] = depth;
    j["width"] = width;
    j["phase_model"] = phase_model;
    j["z2"] = z2;
    j["translational"] = translational;
    return j;
}

struct Header {
    Lattice lattice;
    SiteOrdering ordering;
    OrderingKind ordering_kind;
    int depth;
    int width;
    std::string phase_model;
    bool z2;
    bool translational;
    std::string role;
};

Header parse_header(const ordered_json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw ConfigError("unsupported checkpoint format version");
    const auto& jl = j.at("lattice");
    const LatticeKind kind = lattice_kind_from_string(jl.at("kind").get<std::string>());
    const int sites = jl.at("sites").get<int>();
    const int side = jl.at("side").get<int>();
    Lattice lattice = kind == LatticeKind::SquarePeriodic ? Lattice::square_periodic(side)
                                                          : Lattice::make(kind, sites);
    if (lattice.num_sites() != sites) throw ConfigError("checkpoint lattice is inconsistent");
    const OrderingKind okind = ordering_kind_from_string(j.at("ordering").get<std::string>());
    SiteOrdering ordering = build_ordering(okind, lattice);
    return Header{std::move(lattice),
                  std::move(ordering),
                  okind,
                  j.at("depth").get<int>(),
                  j.at("width").get<int>(),
                  j.at("phase_model").get<std::string>(),
                  j.at("z2").get<bool>(),
                  j.at("translational").get<bool>(),
                  j.at("role").get<std::string>()};
}

ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("cannot open checkpoint: " + path);
    ordered_json j;
    in >> j;
    return j;
}

void write_json_file(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(1) << '\n';
}

RandomStream throwaway_rng() { return RandomStream(0); }

} // namespace

void save_checkpoint(const std::string& path, const Naqs& state) {
    ordered_json j = header_json(state.lattice(), state.ordering().kind(), state.prob().depth(),
                                 state.prob().width(), to_string(state.phase_model()), state.z2(),
                                 state.translational(), "state");
    j["prob_layers"] = network_to_json(state.prob().net());
    if (state.phase_model() == PhaseModelKind::PhaseNetwork)
        j["phase_layers"] = network_to_json(state.phase_network().net());
    write_json_file(path, j);
}

Naqs load_checkpoint(const std::string& path) {
    const ordered_json j = read_json_file(path);
    Header h = parse_header(j);
    if (h.role != "state") throw ConfigError("expected a state checkpoint, found role " + h.role);

    RandomStream rng = throwaway_rng();
    ProbabilityNetwork prob(h.ordering, h.depth, h.width, rng);
    network_from_json(j.at("prob_layers"), prob.net());

    if (phase_model_from_string(h.phase_model) == PhaseModelKind::PhaseNetwork) {
        PhaseNetwork phase(h.lattice.num_sites(), h.depth, h.width, rng);
        network_from_json(j.at("phase_layers"), phase.net());
        return Naqs(std::move(h.lattice), std::move(prob), std::move(phase), h.z2, h.translational);
    }
    return Naqs(std::move(h.lattice), std::move(prob), PhaseModelKind::MarshallRule, h.z2,
                h.translational);
}

void save_reverse_checkpoint(const std::string& path, const NaqsReverse& reverse,
                             const Lattice& lattice, OrderingKind ordering_kind) {
    const ProbabilityNetwork& net = reverse.network().reversed_net();
    ordered_json j = header_json(lattice, ordering_kind, net.depth(), net.width(), "marshall-rule",
                                 reverse.z2(), false, "reverse");
    j["prob_layers"] = network_to_json(net.net());
    write_json_file(path, j);
}

LoadedReverse load_reverse_checkpoint(const std::string& path) {
    const ordered_json j = read_json_file(path);
    Header h = parse_header(j);
    if (h.role != "reverse") throw ConfigError("expected a reverse checkpoint, found role " + h.role);

    RandomStream rng = throwaway_rng();
    ProbabilityNetwork net(h.ordering.reversed(), h.depth, h.width, rng);
    network_from_json(j.at("prob_layers"), net.net());
    return LoadedReverse{NaqsReverse(ReverseNetwork(std::move(net)), h.z2), std::move(h.lattice),
                         h.ordering_kind};
}

} // namespace naqs
