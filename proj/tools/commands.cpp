#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>

#include "naqs/analysis.hpp"
#include "naqs/checkpoint.hpp"
#include "naqs/config.hpp"
#include "naqs/entropy.hpp"
#include "naqs/records.hpp"
#include "naqs/training.hpp"

namespace naqs::cli {

namespace {

struct CliOptions {
    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out;
    std::string format = "json";
};

RecordFormat parse_format(const std::string& f) {
    if (f == "json") return RecordFormat::JsonLines;
    if (f == "csv") return RecordFormat::Csv;
    throw ConfigError("--format must be json or csv");
}

std::string default_out(const RunConfig& cfg, const CliOptions& opts, const char* fallback) {
    if (!opts.out.empty()) return opts.out;
    if (!cfg.records_path.empty()) return cfg.records_path;
    return fallback;
}

Naqs build_fresh_state(const RunConfig& cfg) {
    Lattice lattice = cfg.make_lattice();
    SiteOrdering ordering = cfg.make_ordering(lattice);
    RandomStream rng(cfg.init_seed);
    ProbabilityNetwork prob(ordering, cfg.depth, cfg.width, rng);
    if (cfg.phase_model == PhaseModelKind::MarshallRule)
        return Naqs(std::move(lattice), std::move(prob), PhaseModelKind::MarshallRule, cfg.z2,
                    cfg.translational);
    PhaseNetwork phase(lattice.num_sites(), cfg.depth, cfg.width, rng);
    return Naqs(std::move(lattice), std::move(prob), std::move(phase), cfg.z2, cfg.translational);
}

ResultRecord base_record(const RunConfig& cfg, const std::string& command) {
    ResultRecord r;
    r.command = command;
    r.config_digest = cfg.digest;
    return r;
}

int cmd_train(const RunConfig& cfg, const CliOptions& opts, std::ostream& log) {
    if (cfg.checkpoint_path.empty()) throw ConfigError("io.checkpoint is required for train");
    Naqs state = build_fresh_state(cfg);
    const Lattice& lattice = state.lattice();
    const Hamiltonian h(lattice, state.ordering());

    const std::uint64_t seed = opts.seed.value_or(cfg.training_seed);
    VmcStepStats last = train(state, h, cfg.training, seed, [&](const TrainStepInfo& info) {
        if (info.global_step % cfg.log_every == 0) {
            nlohmann::ordered_json line;
            line["step"] = info.global_step;
            line["stage"] = info.stage;
            line["energy"] = info.stats.energy;
            line["stderr"] = info.stats.stderr_mc;
            line["sz_nonzero"] = info.stats.sz_nonzero_fraction;
            log << line.dump() << '\n';
        }
        return true;
    });

    save_checkpoint(cfg.checkpoint_path, state);

    ResultRecord r = base_record(cfg, "train");
    r.tags["lattice"] = to_string(lattice.kind());
    r.tags["phase_model"] = to_string(cfg.phase_model);
    r.params["sites"] = lattice.num_sites();
    r.params["seed"] = static_cast<double>(seed);
    r.metrics["energy"] = last.energy;
    r.errors["energy"] = last.stderr_mc;
    r.metrics["energy_variance"] = last.variance;
    r.metrics["sz_nonzero_fraction"] = last.sz_nonzero_fraction;
    if (!opts.out.empty() || !cfg.records_path.empty())
        emit_results({r}, parse_format(opts.format), default_out(cfg, opts, "train.jsonl"));
    log << "checkpoint written to " << cfg.checkpoint_path << '\n';
    return kExitOk;
}

int cmd_reverse_train(const RunConfig& cfg, const CliOptions& opts, std::ostream& log) {
    if (cfg.checkpoint_path.empty()) throw ConfigError("io.checkpoint is required for reverse-train");
    if (cfg.reverse_checkpoint_path.empty())
        throw ConfigError("io.reverse_checkpoint is required for reverse-train");
    const Naqs forward = load_checkpoint(cfg.checkpoint_path);

    const int depth = cfg.reverse_depth > 0 ? cfg.reverse_depth : forward.prob().depth();
    const int width = cfg.reverse_width > 0 ? cfg.reverse_width : forward.prob().width();
    RandomStream init(cfg.init_seed + 1);
    NaqsReverse reverse(ReverseNetwork(forward.ordering(), depth, width, init), forward.z2());

    const std::uint64_t seed = opts.seed.value_or(cfg.reverse_seed);
    const ReverseTrainResult result =
        train_reverse(forward, reverse, cfg.reverse_schedule, seed, [&](const ReverseStepInfo& info) {
            if (info.global_step % cfg.log_every == 0) {
                nlohmann::ordered_json line;
                line["step"] = info.global_step;
                line["stage"] = info.stage;
                line["kl"] = info.kl_estimate;
                log << line.dump() << '\n';
            }
            return true;
        });
    if (result.halted_on_increase) log << "warning: " << result.message << '\n';

    save_reverse_checkpoint(cfg.reverse_checkpoint_path, reverse, forward.lattice(),
                            forward.ordering().kind());

    ResultRecord r = base_record(cfg, "reverse-train");
    r.params["sites"] = forward.num_sites();
    r.params["seed"] = static_cast<double>(seed);
    r.metrics["kl_estimate"] = result.final_kl;
    r.metrics["halted_on_increase"] = result.halted_on_increase ? 1.0 : 0.0;
    if (!opts.out.empty() || !cfg.records_path.empty())
        emit_results({r}, parse_format(opts.format), default_out(cfg, opts, "reverse.jsonl"));
    log << "reverse checkpoint written to " << cfg.reverse_checkpoint_path << '\n';
    return kExitOk;
}

void append_trace_records(std::vector<ResultRecord>& records, const RunConfig& cfg,
                          const TraceEstimate& est, std::uint64_t seed, int workers) {
    ResultRecord r = base_record(cfg, "entropy");
    r.tags["method"] = est.method;
    r.params["n"] = est.order;
    r.params["cut"] = est.cut;
    r.params["boundary"] = est.boundary;
    r.params["batches"] = static_cast<double>(est.batches);
    r.params["seed"] = static_cast<double>(seed);
    r.params["workers"] = workers;
    r.metrics["trace"] = est.mean;
    r.errors["trace"] = est.stderr_boot;
    r.metrics["trace_imag"] = est.imag_mean;
    r.errors["trace_imag"] = est.imag_stderr;
    r.metrics["sample_variance"] = est.sample_variance;
    if (est.mean > 0.0) {
        const RenyiValue s = renyi_from_trace(est);
        r.metrics["entropy"] = s.entropy;
        r.errors["entropy"] = s.stderr_prop;
    }
    records.push_back(std::move(r));
}

int cmd_entropy(const RunConfig& cfg, const CliOptions& opts, std::ostream& log) {
    if (cfg.checkpoint_path.empty()) throw ConfigError("io.checkpoint is required for entropy");
    if (!cfg.estimator_seed && !opts.seed)
        throw ConfigError("estimator.seed (or --seed) is mandatory for estimator runs");
    const std::uint64_t seed = opts.seed.value_or(cfg.estimator_seed.value_or(0));

    const Naqs state = load_checkpoint(cfg.checkpoint_path);
    const Lattice& lattice = state.lattice();
    const SiteOrdering& ordering = state.ordering();

    EstimatorOptions eopts;
    eopts.workers = opts.workers.value_or(cfg.workers);
    eopts.bootstrap_resamples = cfg.bootstrap;
    eopts.chunk = cfg.chunk;

    const std::vector<int> cuts = cfg.resolve_cuts(lattice.num_sites());
    if (cuts.empty()) throw ConfigError("no cuts requested");
    std::vector<Bipartition> parts;
    for (int cut : cuts) parts.push_back(prefix_bipartition(ordering, lattice, cut));

    std::vector<ResultRecord> records;
    if (cfg.method == "ds") {
        const auto sweep = ds_trace_sweep(state, parts, cfg.orders, cfg.batches, seed, eopts);
        for (const auto& per_part : sweep)
            for (const auto& est : per_part)
                append_trace_records(records, cfg, est, seed, eopts.workers);
    } else {
        if (cfg.reverse_checkpoint_path.empty())
            throw ConfigError("io.reverse_checkpoint is required for conditional sampling");
        LoadedReverse loaded = load_reverse_checkpoint(cfg.reverse_checkpoint_path);
        if (loaded.lattice.kind() != lattice.kind() ||
            loaded.lattice.num_sites() != lattice.num_sites() ||
            loaded.ordering_kind != ordering.kind() || loaded.reverse.z2() != state.z2())
            throw UnsupportedConfiguration("reverse checkpoint does not match the state checkpoint");
        for (std::size_t ci = 0; ci < parts.size(); ++ci) {
            const std::uint64_t cut_seed = mix_seed(seed, 1000 + static_cast<std::uint64_t>(cuts[ci]));
            const auto sweep = cs_trace_sweep(state, loaded.reverse, parts[ci], cfg.orders,
                                              cfg.batches, cut_seed, eopts);
            for (const auto& est : sweep) append_trace_records(records, cfg, est, seed, eopts.workers);
        }
    }

    const std::string out = default_out(cfg, opts, "entropy.jsonl");
    emit_results(records, parse_format(opts.format), out);
    log << records.size() << " records written to " << out << '\n';
    return kExitOk;
}

std::map<int, std::map<int, TraceValue>> traces_by_cut(const std::vector<ResultRecord>& records) {
    std::map<int, std::map<int, TraceValue>> by_cut;
    for (const auto& r : records) {
        if (r.command != "entropy") continue;
        const auto n_it = r.params.find("n");
        const auto cut_it = r.params.find("cut");
        const auto trace_it = r.metrics.find("trace");
        if (n_it == r.params.end() || cut_it == r.params.end() || trace_it == r.metrics.end())
            continue;
        TraceValue value;
        value.mean = trace_it->second;
        const auto err_it = r.errors.find("trace");
        value.stderr_val = err_it != r.errors.end() ? err_it->second : 0.0;
        by_cut[static_cast<int>(cut_it->second)][static_cast<int>(n_it->second)] = value;
    }
    if (by_cut.empty()) throw std::invalid_argument("no entropy records found in the input");
    return by_cut;
}

int cmd_bpa(const RunConfig& cfg, const CliOptions& opts, std::ostream& log) {
    if (cfg.records_path.empty()) throw ConfigError("io.records is required for bpa");
    const auto by_cut = traces_by_cut(read_json_records(cfg.records_path));

    const ChebyshevApprox approx =
        cfg.q ? chebyshev_coefficients(BpaTarget::Power, cfg.n_c, *cfg.q)
              : chebyshev_coefficients(BpaTarget::NegXLogX, cfg.n_c);

    std::vector<ResultRecord> records;
    for (const auto& [cut, traces] : by_cut) {
        const BpaResult result = bpa_entropy(traces, approx);
        ResultRecord r = base_record(cfg, "bpa");
        r.tags["target"] = cfg.q ? "power" : "neg-x-log-x";
        r.tags["reliable"] = result.unreliable ? "no" : "yes";
        r.params["cut"] = cut;
        r.params["n_c"] = cfg.n_c;
        if (cfg.q) r.params["q"] = *cfg.q;
        r.metrics[cfg.q ? "s_q_bpa" : "s1_bpa"] = result.value;
        r.errors[cfg.q ? "s_q_bpa" : "s1_bpa"] = result.statistical_error;
        r.metrics["cutoff_bound_per_eigenvalue"] = result.bound_per_eigenvalue;
        records.push_back(std::move(r));
        if (result.unreliable)
            log << "warning: cut " << cut << ": propagated error exceeds the estimate\n";
    }
    const std::string out = opts.out.empty() ? "bpa.jsonl" : opts.out;
    emit_results(records, parse_format(opts.format), out);
    log << records.size() << " records written to " << out << '\n';
    return kExitOk;
}

int cmd_lmax(const RunConfig& cfg, const CliOptions& opts, std::ostream& log) {
    if (cfg.records_path.empty()) throw ConfigError("io.records is required for lmax");
    const auto by_cut = traces_by_cut(read_json_records(cfg.records_path));

    std::vector<ResultRecord> records;
    for (const auto& [cut, traces] : by_cut) {
        const SpectrumFit fit = fit_lambda_max(traces, cfg.fit_lo, cfg.fit_hi, cfg.min_subset);
        if (fit.window_shrunk)
            log << "warning: cut " << cut << ": non-positive traces shrank the fit window\n";
        ResultRecord r = base_record(cfg, "lmax");
        r.params["cut"] = cut;
        r.params["window_lo"] = fit.window_lo;
        r.params["window_hi"] = fit.window_hi;
        r.params["subsets"] = fit.subsets;
        r.metrics["lambda_max"] = fit.lambda_max;
        r.errors["lambda_max"] = fit.lambda_max * fit.slope_spread; // d(exp)/dslope spread
        r.metrics["degeneracy"] = fit.degeneracy;
        r.metrics["s_infinity"] = fit.s_infinity;
        r.errors["s_infinity"] = fit.slope_spread;
        records.push_back(std::move(r));
    }
    const std::string out = opts.out.empty() ? "lmax.jsonl" : opts.out;
    emit_results(records, parse_format(opts.format), out);
    log << records.size() << " records written to " << out << '\n';
    return kExitOk;
}

int cmd_oracle_check(const RunConfig& cfg, const CliOptions& opts, std::ostream& log) {
    Lattice lattice = cfg.make_lattice();
    SiteOrdering ordering = cfg.make_ordering(lattice);

    DenseState dense;
    if (cfg.oracle_state == "afh-ground") {
        dense = exact_ground_state(Hamiltonian(lattice, ordering)).state;
    } else if (cfg.oracle_state == "ghz") {
        dense = analytic_state(AnalyticStateKind::Ghz, lattice.num_sites());
    } else if (cfg.oracle_state == "uniform-product") {
        dense = analytic_state(AnalyticStateKind::UniformProduct, lattice.num_sites());
    } else if (cfg.oracle_state == "dimer-singlet") {
        dense = analytic_state(AnalyticStateKind::DimerSinglet, lattice.num_sites());
    } else {
        throw ConfigError("oracle.state must be afh-ground, ghz, uniform-product or dimer-singlet");
    }

    std::vector<ResultRecord> records;
    for (int cut : cfg.resolve_cuts(lattice.num_sites())) {
        const Bipartition part = prefix_bipartition(ordering, lattice, cut);
        const ReducedSpectrum spec = reduced_spectrum(dense, part);
        for (int n : cfg.orders) {
            const double spectral = spec.trace_power(n);
            if (n <= 6) {
                const double contraction = brute_force_replica(dense, part, n);
                if (std::abs(contraction - spectral) > 1e-11)
                    throw NumericalFailure("replica contraction disagrees with the spectral sum");
            }
            ResultRecord r = base_record(cfg, "oracle-check");
            r.tags["state"] = cfg.oracle_state;
            r.params["cut"] = cut;
            r.params["n"] = n;
            r.metrics["trace"] = spectral; // exact: no stderr entry
            r.metrics["entropy"] = std::log(spectral) / (1.0 - n);
            records.push_back(std::move(r));
        }
        ResultRecord r = base_record(cfg, "oracle-check");
        r.tags["state"] = cfg.oracle_state;
        r.params["cut"] = cut;
        r.metrics["lambda_max"] = spec.lambda_max;
        r.metrics["degeneracy"] = spec.degeneracy;
        r.metrics["rank"] = spec.rank;
        r.metrics["s1"] = exact_vn(spec);
        r.metrics["s_infinity"] = -std::log(spec.lambda_max);
        records.push_back(std::move(r));
    }

    const std::string out = default_out(cfg, opts, "oracle.jsonl");
    emit_results(records, parse_format(opts.format), out);
    log << records.size() << " records written to " << out << '\n';
    return kExitOk;
}

int dispatch(const CliOptions& opts, std::ostream& log) {
    const RunConfig cfg = load_run_config(opts.config_path, opts.overrides);
    if (opts.command == "train") return cmd_train(cfg, opts, log);
    if (opts.command == "reverse-train") return cmd_reverse_train(cfg, opts, log);
    if (opts.command == "entropy") return cmd_entropy(cfg, opts, log);
    if (opts.command == "bpa") return cmd_bpa(cfg, opts, log);
    if (opts.command == "lmax") return cmd_lmax(cfg, opts, log);
    if (opts.command == "oracle-check") return cmd_oracle_check(cfg, opts, log);
    throw ConfigError("unknown command: " + opts.command);
}

void report_error(std::ostream& log, const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["error"] = message;
    j["exit_code"] = code;
    log << j.dump() << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& log) {
    CLI::App app{"neural autoregressive quantum states: training and Renyi-entropy estimation"};
    app.require_subcommand(1);

    CliOptions opts;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"train", "variational Monte Carlo ground-state training"},
        {"reverse-train", "fit the reverse-order network by KL minimization"},
        {"entropy", "estimate Tr[rho_A^n] by direct or conditional sampling"},
        {"bpa", "polynomial approximation of S_1 (or S_q) from trace records"},
        {"lmax", "extract lambda_max and its degeneracy from trace records"},
        {"oracle-check", "exact desk-scale reference values"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opts.config_path, "run configuration file")->required();
        sub->add_option("--set", opts.overrides, "override section.key=value");
        sub->add_option("--seed", [&opts](const std::vector<std::string>& v) {
            opts.seed = std::stoull(v.at(0));
            return true;
        }, "seed override");
        sub->add_option("--workers", [&opts](const std::vector<std::string>& v) {
            opts.workers = std::stoi(v.at(0));
            return true;
        }, "worker count override");
        sub->add_option("--out", opts.out, "output records file");
        sub->add_option("--format", opts.format, "output format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->callback([&opts, name = name] { opts.command = name; });
    }

    std::vector<const char*> cargv;
    for (const auto& a : argv) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            log << app.help();
            return kExitOk;
        }
        report_error(log, e.what(), kExitUsage);
        return kExitUsage;
    }

    try {
        return dispatch(opts, log);
    } catch (const ConfigError& e) {
        report_error(log, e.what(), kExitConfig);
        return kExitConfig;
    } catch (const MissingArtifact& e) {
        report_error(log, e.what(), kExitMissing);
        return kExitMissing;
    } catch (const UnsupportedConfiguration& e) {
        report_error(log, e.what(), kExitUnsupported);
        return kExitUnsupported;
    } catch (const SizeLimit& e) {
        report_error(log, e.what(), kExitConfig);
        return kExitConfig;
    } catch (const NumericalFailure& e) {
        report_error(log, e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const NonPositiveTrace& e) {
        report_error(log, e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const DegenerateSample& e) {
        report_error(log, e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const WeightSingularity& e) {
        report_error(log, e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const FitWindowError& e) {
        report_error(log, e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        report_error(log, e.what(), kExitConfig);
        return kExitConfig;
    } catch (const std::exception& e) {
        report_error(log, e.what(), kExitUsage);
        return kExitUsage;
    }
}

int run_cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout);
}

} // namespace naqs::cli
