#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pcaldp/chain.hpp"
#include "pcaldp/io.hpp"
#include "pcaldp/oracle.hpp"
#include "pcaldp/rate.hpp"
#include "pcaldp/simulate.hpp"

using namespace pcaldp;
using pcaldp::io::json;

namespace {

// distinguishes bad input (exit 2) from failed computations and checks (exit 1)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<long> samples;
    std::optional<long> T;
    std::optional<long> cap;
};

struct Context {
    json config;
    std::string config_hash;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    long cap = kDefaultStateCap;
    Options opts;
};

const json& need(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config needs \"") + key + "\"");
    return j.at(key);
}

Context make_context(const Options& o) {
    if (o.config_path.empty()) throw ConfigError("--config is required");
    std::ifstream in(o.config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + o.config_path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Context ctx;
    try {
        ctx.config = json::parse(bytes);
    } catch (const json::exception& e) {
        throw ConfigError(o.config_path + ": " + e.what());
    }
    ctx.config_hash = io::hex64(io::fnv1a64(bytes));
    ctx.opts = o;
    try {
        ctx.seed = o.seed ? *o.seed : ctx.config.value("seed", std::uint64_t{0});
        ctx.tol = o.tol ? *o.tol : ctx.config.value("tol", 1e-8);
        ctx.cap = ctx.config.value("cap", kDefaultStateCap);
        if (const char* env = std::getenv("PCALDP_MAX_STATES")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 1)
                throw ConfigError("PCALDP_MAX_STATES must be a positive integer");
            ctx.cap = v;
        }
        if (o.cap) ctx.cap = *o.cap;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return ctx;
}

LocalKernel load_kernel(const Context& ctx) {
    try {
        if (ctx.config.contains("kernel_file"))
            return io::kernel_from_json(
                io::load_json_file(ctx.config.at("kernel_file").get<std::string>()));
        if (ctx.config.contains("kernel")) return io::kernel_from_json(ctx.config.at("kernel"));
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("config needs \"kernel\" (inline definition) or \"kernel_file\"");
}

std::vector<double> load_nu(const Context& ctx, const FiniteChain& chain) {
    const json& j = need(ctx.config, "nu");
    try {
        if (j.value("stationary", false)) {
            std::vector<double> nu = exact_stationary(chain);
            if (j.contains("tilt")) {
                for (const json& t : j.at("tilt")) {
                    Site site = t.at("site").get<Site>();
                    double lambda = t.at("lambda").get<double>();
                    int pos = chain.state_window().position_of(site);
                    if (pos < 0) throw ConfigError("tilt site outside the truncation");
                    for (long x = 0; x < chain.state_count(); ++x)
                        nu[x] *= std::exp(lambda * chain.codec().digit(x, pos));
                }
                double total = pairwise_sum(nu);
                for (double& v : nu) v /= total;
            }
            return nu;
        }
        CylinderMeasure m = io::measure_from_json(j, chain.kernel().alphabet().size);
        if (!(m.window() == chain.state_window()))
            throw ConfigError("nu must live on the full truncation window " +
                              chain.state_window().describe());
        return m.probs();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("nu: ") + e.what());
    }
}

std::vector<Symbol> load_config_array(const json& j, const LocalKernel& kernel, const char* what) {
    std::vector<Symbol> x = j.get<std::vector<Symbol>>();
    if (static_cast<long>(x.size()) != kernel.site_count())
        throw ConfigError(std::string(what) + " must assign a symbol to each of " +
                          std::to_string(kernel.site_count()) + " sites");
    return x;
}

void emit(const Options& o, const std::string& payload) {
    std::string body = payload;
    if (body.empty() || body.back() != '\n') body += '\n';
    if (o.out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + o.out_path);
    out << body;
}

json envelope(const char* command, const Context& ctx) {
    return json{{"command", command}, {"config_hash", ctx.config_hash}, {"seed", ctx.seed}};
}

std::string csv_comment(const Context& ctx) {
    return "config_hash=" + ctx.config_hash + ", seed=" + std::to_string(ctx.seed);
}

void require_json(const Context& ctx, const char* command) {
    if (ctx.opts.format != "json")
        throw ConfigError(std::string(command) + " emits json only");
}

int cmd_validate(const Context& ctx) {
    LocalKernel kernel = load_kernel(ctx);
    require_json(ctx, "validate");
    ValidationReport report = validate(kernel, ctx.config.value("require_positivity", true));
    json out = envelope("validate", ctx);
    out["kernel_id"] = kernel.id();
    out["ok"] = report.ok();
    out["violations"] = json::array();
    for (const Violation& v : report.violations)
        out["violations"].push_back({{"code", v.code},
                                     {"site", v.site},
                                     {"row", v.row},
                                     {"symbol", v.symbol},
                                     {"detail", v.detail}});
    emit(ctx.opts, out.dump(2));
    return report.ok() ? 0 : 1;
}

int cmd_push(const Context& ctx) {
    LocalKernel kernel = load_kernel(ctx);
    CylinderMeasure nu =
        io::measure_from_json(need(ctx.config, "nu"), kernel.alphabet().size);
    Window phi(need(ctx.config, "phi").get<std::vector<Site>>());
    CylinderMeasure pushed = push_kernel(nu, kernel, phi);
    if (ctx.opts.format == "csv") {
        emit(ctx.opts, io::measure_csv(pushed, csv_comment(ctx)));
    } else {
        json out = envelope("push", ctx);
        out["window"] = pushed.window().sites();
        out["probs"] = pushed.probs();
        emit(ctx.opts, out.dump(2));
    }
    return 0;
}

int cmd_shift(const Context& ctx) {
    LocalKernel kernel = load_kernel(ctx);
    CylinderMeasure mu = io::measure_from_json(need(ctx.config, "mu"), kernel.alphabet().size);
    Window psi(need(ctx.config, "psi").get<std::vector<Site>>());
    long max_shift = need(ctx.config, "max_shift").get<long>();
    if (max_shift < 0) throw ConfigError("max_shift must be >= 0");

    FiniteChain chain = build_chain(kernel, ctx.cap);
    CylinderMeasure reference =
        marginalize(chain.as_measure(exact_stationary(chain)), psi);

    json rows = json::array();
    std::string csv = "# " + csv_comment(ctx) + "\nn,tv_to_reference\n";
    for (long n = 0; n <= max_shift; ++n) {
        CylinderMeasure shifted = shift_measure(mu, kernel, static_cast<int>(n), psi);
        double tv = subalgebra_sup_distance(shifted, reference, psi);
        rows.push_back({{"n", n}, {"probs", shifted.probs()}, {"tv_to_reference", tv}});
        csv += std::to_string(n) + "," + io::format_double(tv) + "\n";
    }
    if (ctx.opts.format == "csv") {
        emit(ctx.opts, csv);
    } else {
        json out = envelope("shift", ctx);
        out["psi"] = psi.sites();
        out["reference"] = "stationary marginal";
        out["rows"] = rows;
        emit(ctx.opts, out.dump(2));
    }
    return 0;
}

int cmd_rate(const Context& ctx) {
    LocalKernel kernel = load_kernel(ctx);
    require_json(ctx, "rate");
    auto chain = std::make_shared<const FiniteChain>(build_chain(kernel, ctx.cap));
    std::vector<double> nu = load_nu(ctx, *chain);
    RateOptions opts;
    opts.gap_tol = ctx.tol;
    RateResult result = dv_rate_primal(chain, nu, opts);
    CertifyReport cert = certify(result, nu);
    json out = envelope("rate", ctx);
    out["value"] = result.value;
    out["gap"] = result.gap;
    out["iterations"] = result.iterations;
    out["tolerance"] = result.tolerance;
    out["marginal_error"] = result.marginal_error;
    out["certified"] = cert.ok();
    out["certify_failures"] = cert.failures;
    emit(ctx.opts, out.dump(2));
    return cert.ok() ? 0 : 1;
}

int cmd_bounds(const Context& ctx) {
    LocalKernel kernel = load_kernel(ctx);
    auto chain = std::make_shared<const FiniteChain>(build_chain(kernel, ctx.cap));
    std::vector<double> nu = load_nu(ctx, *chain);

    std::vector<Window> windows;
    if (ctx.config.contains("windows")) {
        for (const json& w : ctx.config.at("windows"))
            windows.push_back(Window(w.get<std::vector<Site>>()));
    } else {
        for (Site z = 0; z < kernel.site_count(); ++z)
            windows.push_back(Window::range(0, z));
    }

    RateOptions opts;
    opts.gap_tol = ctx.tol;
    WindowSweep sweep = window_sweep(chain, nu, windows, opts);

    bool ok = true;
    json table = json::array();
    std::string csv = "# " + csv_comment(ctx) + "\nn,alpha_n,d_phi_n,rhs,edge_affected\n";
    for (size_t i = 0; i < sweep.rows.size(); ++i) {
        const WindowSweepRow& row = sweep.rows[i];
        if (!row.edge_affected && row.alpha > row.rhs + 1e-9) ok = false;
        table.push_back({{"n", i + 1},
                         {"window", row.phi.sites()},
                         {"alpha_n", row.alpha},
                         {"d_phi_n", row.d_phi},
                         {"rhs", row.rhs},
                         {"edge_affected", row.edge_affected}});
        csv += std::to_string(i + 1) + "," + io::format_double(row.alpha) + "," +
               io::format_double(row.d_phi) + "," + io::format_double(row.rhs) + "," +
               (row.edge_affected ? "1" : "0") + "\n";
    }

    json reports = json::array();
    for (const Window& phi : windows) {
        EntropyReport rep = window_bound(sweep.rate.optimal_coupling, phi);
        if (rep.slack < -1e-9 || rep.marginal_lhs > rep.bound_rhs + 1e-9) ok = false;
        reports.push_back({{"d_full", rep.d_full},
                           {"d_partition", rep.d_partition},
                           {"bound_lhs", rep.bound_lhs},
                           {"bound_rhs", rep.bound_rhs},
                           {"slack", rep.slack},
                           {"marginal_lhs", rep.marginal_lhs},
                           {"window", rep.window.sites()},
                           {"kernel_id", rep.kernel_id}});
    }

    if (ctx.opts.format == "csv") {
        emit(ctx.opts, csv);
    } else {
        json out = envelope("bounds", ctx);
        out["value"] = sweep.rate.value;
        out["gap"] = sweep.rate.gap;
        out["iterations"] = sweep.rate.iterations;
        out["marginal_error"] = sweep.rate.marginal_error;
        out["window_table"] = table;
        out["entropy_reports"] = reports;
        out["ok"] = ok;
        emit(ctx.opts, out.dump(2));
    }
    return ok ? 0 : 1;
}

int cmd_simulate(const Context& ctx) {
    LocalKernel kernel = load_kernel(ctx);
    std::vector<Symbol> x0 = load_config_array(need(ctx.config, "x0"), kernel, "x0");
    Window window(need(ctx.config, "window").get<std::vector<Site>>());
    long T = ctx.opts.T ? *ctx.opts.T : need(ctx.config, "T").get<long>();
    if (T < 1) throw ConfigError("T must be >= 1");

    if (ctx.config.contains("event")) {
        require_json(ctx, "simulate with an event");
        const json& ev = ctx.config.at("event");
        std::vector<Symbol> target = ev.at("config").get<std::vector<Symbol>>();
        if (static_cast<int>(target.size()) != window.size())
            throw ConfigError("event config must match the window size");
        double threshold = ev.at("min_frequency").get<double>();
        long samples =
            ctx.opts.samples ? *ctx.opts.samples : ctx.config.value("samples", long{1000});
        if (samples < 1) throw ConfigError("samples must be >= 1");
        ConfigCodec codec(kernel.alphabet().size, window.size());
        std::uint64_t idx = codec.pack(target);
        EventEstimate est = estimate_event(
            kernel, x0, T, window,
            [&](const CylinderMeasure& m) { return m[idx] >= threshold; }, samples, ctx.seed);
        json out = envelope("simulate", ctx);
        out["T"] = est.T;
        out["samples"] = est.samples;
        out["window"] = window.sites();
        out["event"] = {{"config", target}, {"min_frequency", threshold}};
        out["p_hat"] = est.p_hat;
        out["ci_low"] = est.ci_low;
        out["ci_high"] = est.ci_high;
        out["successes"] = est.successes;
        out["below_resolution"] = est.below_resolution;
        emit(ctx.opts, out.dump(2));
        return 0;
    }

    OccupationMeasure occ = run_occupation(kernel, x0, T, window, ctx.seed);
    if (ctx.opts.format == "csv") {
        emit(ctx.opts, io::occupation_csv(occ, csv_comment(ctx)));
    } else {
        CylinderMeasure freq = occ.normalized();
        json out = envelope("simulate", ctx);
        out["T"] = occ.T;
        out["window"] = window.sites();
        out["counts"] = occ.counts;
        out["frequencies"] = freq.probs();
        emit(ctx.opts, out.dump(2));
    }
    return 0;
}

int cmd_oracle(const Context& ctx) {
    std::string op = need(ctx.config, "op").get<std::string>();
    json out = envelope("oracle", ctx);
    out["op"] = op;

    if (op == "entropy") {
        require_json(ctx, "oracle entropy");
        std::vector<double> mu = need(ctx.config, "mu").get<std::vector<double>>();
        std::vector<double> rho = need(ctx.config, "rho").get<std::vector<double>>();
        std::vector<long> atom_of;
        if (ctx.config.contains("atom_of"))
            atom_of = ctx.config.at("atom_of").get<std::vector<long>>();
        else
            for (size_t i = 0; i < mu.size(); ++i) atom_of.push_back(static_cast<long>(i));
        long atom_count = 0;
        for (long a : atom_of) atom_count = std::max(atom_count, a + 1);
        double value = direct_entropy(mu, rho, atom_of, atom_count);
        out["infinite"] = std::isinf(value);
        if (!std::isinf(value)) out["value"] = value;
        emit(ctx.opts, out.dump(2));
        return 0;
    }

    LocalKernel kernel = load_kernel(ctx);
    FiniteChain chain = build_chain(kernel, ctx.cap);

    if (op == "stationary") {
        std::vector<double> pi = exact_stationary(chain);
        if (ctx.opts.format == "csv") {
            emit(ctx.opts, io::measure_csv(chain.as_measure(pi), csv_comment(ctx)));
        } else {
            out["distribution"] = pi;
            emit(ctx.opts, out.dump(2));
        }
        return 0;
    }
    if (op == "occupation_law") {
        std::vector<Symbol> x0 = load_config_array(need(ctx.config, "x0"), kernel, "x0");
        long T = ctx.opts.T ? *ctx.opts.T : need(ctx.config, "T").get<long>();
        std::vector<long> target;
        for (const json& t : need(ctx.config, "target"))
            target.push_back(static_cast<long>(
                chain.codec().pack(load_config_array(t, kernel, "target entry"))));
        std::vector<double> law =
            exact_occupation_law(chain, static_cast<long>(chain.codec().pack(x0)), T, target);
        if (ctx.opts.format == "csv") {
            std::string csv = "# " + csv_comment(ctx) + "\ncount,prob\n";
            for (size_t c = 0; c < law.size(); ++c)
                csv += std::to_string(c) + "," + io::format_double(law[c]) + "\n";
            emit(ctx.opts, csv);
        } else {
            out["T"] = T;
            out["law"] = law;
            emit(ctx.opts, out.dump(2));
        }
        return 0;
    }
    if (op == "dual_bound") {
        require_json(ctx, "oracle dual_bound");
        auto shared = std::make_shared<const FiniteChain>(std::move(chain));
        std::vector<double> nu = load_nu(ctx, *shared);
        long restarts = ctx.config.value("restarts", long{8});
        long grid = ctx.config.value("grid_resolution", long{0});
        out["bound"] = dual_grid_max(*shared, nu, restarts, grid, ctx.seed);
        emit(ctx.opts, out.dump(2));
        return 0;
    }
    throw ConfigError("unknown oracle op \"" + op +
                      "\" (stationary, occupation_law, dual_bound, entropy)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic cellular automata on finite truncations: validation, "
                 "pushforwards, shifts, rate functionals, entropy bounds, simulation"};
    app.require_subcommand(1);

    Options o;
    app.add_option("--config", o.config_path, "experiment config (json)");
    app.add_option("--out", o.out_path, "output path (default stdout)");
    app.add_option("--seed", o.seed, "random seed (overrides config)");
    app.add_option("--tol", o.tol, "solver tolerance (overrides config)");
    app.add_option("--samples", o.samples, "sample count (overrides config)");
    app.add_option("--T", o.T, "horizon (overrides config)");
    app.add_option("--cap", o.cap, "state cap (overrides config and PCALDP_MAX_STATES)");
    app.add_option("--format", o.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* sub_validate = app.add_subcommand("validate", "check kernel contract conditions");
    CLI::App* sub_push = app.add_subcommand("push", "one-step pushforward of a measure");
    CLI::App* sub_shift = app.add_subcommand("shift", "shifted measures and their drift to the stationary marginal");
    CLI::App* sub_rate = app.add_subcommand("rate", "action functional with optimality certificate");
    CLI::App* sub_bounds = app.add_subcommand("bounds", "entropy window bounds and the nested-window table");
    CLI::App* sub_simulate = app.add_subcommand("simulate", "trajectories, occupation measures, event estimates");
    CLI::App* sub_oracle = app.add_subcommand("oracle", "brute-force reference computations");
    for (CLI::App* sub :
         {sub_validate, sub_push, sub_shift, sub_rate, sub_bounds, sub_simulate, sub_oracle})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Context ctx = make_context(o);
        if (sub_validate->parsed()) return cmd_validate(ctx);
        if (sub_push->parsed()) return cmd_push(ctx);
        if (sub_shift->parsed()) return cmd_shift(ctx);
        if (sub_rate->parsed()) return cmd_rate(ctx);
        if (sub_bounds->parsed()) return cmd_bounds(ctx);
        if (sub_simulate->parsed()) return cmd_simulate(ctx);
        if (sub_oracle->parsed()) return cmd_oracle(ctx);
        std::cerr << "no command given\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
