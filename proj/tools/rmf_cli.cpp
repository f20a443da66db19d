// rmf: simulate, filter and sweep slow-fast systems and their reduced filters.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rmf/config.hpp"
#include "rmf/csv.hpp"
#include "rmf/errors.hpp"
#include "rmf/experiment.hpp"
#include "rmf/model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Flags {
    std::string config;
    std::map<std::string, std::string> values;  // flag name -> raw text
    std::vector<std::string> settings;          // --set key=value
    std::size_t probes = 2000;
};

std::vector<double> list_or(const Flags& f, const std::string& key, double fallback) {
    const auto it = f.values.find(key);
    if (it == f.values.end()) return {fallback};
    return rmf::parse_real_list(it->second);
}

rmf::ExperimentConfig build_config(const Flags& f) {
    rmf::ExperimentConfig c;
    if (!f.config.empty()) rmf::load_config_file(c, f.config);
    for (const auto& s : f.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw rmf::ParameterError("--set expects key=value, got '" + s + "'");
        rmf::apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : f.values) {
        if (key == "epsilon" || key == "x-tilde0") {
            const auto list = rmf::parse_real_list(value);
            rmf::apply_setting(c, key, rmf::format_real(list.front()));
        } else {
            rmf::apply_setting(c, key, value);
        }
    }
    return c;
}

std::filesystem::path output_dir(const rmf::ExperimentConfig& c) {
    std::filesystem::path dir(c.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string tag(double v) {
    auto s = rmf::format_real(v);
    for (auto& ch : s)
        if (ch == '-') ch = 'm';
    return s;
}

int cmd_validate(const Flags& f) {
    const auto c = build_config(f);
    const auto model = c.model();
    const auto h = rmf::arctan_observation();
    const auto report = rmf::validate_hypotheses(model, f.probes, c.master_seed, &h);
    for (const auto& chk : report.checks) {
        std::printf("%-6s %s  observed=%-12s bound=%-12s violations=%zu/%zu  %s\n",
                    chk.name.c_str(), chk.passed ? "PASS" : "FAIL",
                    rmf::format_real(chk.observed).c_str(), rmf::format_real(chk.bound).c_str(),
                    chk.violations, chk.probes, chk.detail.c_str());
    }
    std::printf("manifold Lipschitz bound: %s\n",
                rmf::format_real(model.manifold_lipschitz_bound()).c_str());
    std::printf("%s\n", report.all_passed() ? "all hypotheses hold" : "some hypotheses fail");
    return report.all_passed() ? kExitOk : kExitRuntime;
}

int cmd_simulate(const Flags& f) {
    const auto c = build_config(f);
    const auto run = rmf::run_tracking(c, 0);
    const auto dir = output_dir(c);
    rmf::emit_csv(run.truth, (dir / "truth.csv").string());
    rmf::emit_csv(run.reduced, (dir / "reduced.csv").string());
    std::printf("epsilon            %s\n", rmf::format_real(c.epsilon).c_str());
    std::printf("sup |x - x~| t>=0.5 %s\n", rmf::format_real(run.stats.sup_after_transient).c_str());
    std::printf("mean |x - x~|      %s\n", rmf::format_real(run.stats.mean_abs).c_str());
    if (run.stats.rate)
        std::printf("decay rate [0,5e]  %s\n", rmf::format_real(*run.stats.rate).c_str());
    else
        std::printf("decay rate [0,5e]  n/a\n");
    std::printf("wrote %s and %s\n", (dir / "truth.csv").c_str(), (dir / "reduced.csv").c_str());
    return kExitOk;
}

int cmd_filter(const Flags& f) {
    const auto c = build_config(f);
    const auto rep = rmf::run_single_replication(c, 0);
    const auto dir = output_dir(c);
    const auto errors = rmf::aggregate_replications({rep});
    const auto stem = (dir / "filter").string();
    rmf::emit_plot_data(rep.full, rep.reduced, errors, stem);
    std::printf("coarse times       %zu\n", rep.full.times.size());
    std::printf("time-avg sq diff   %s\n", rmf::format_real(errors.time_avg_mse).c_str());
    if (rep.metric)
        std::printf("d(pi, pi~) at t=%s  %s (tail <= %s)\n", rmf::format_real(c.metric_time).c_str(),
                    rmf::format_real(rep.metric->value).c_str(),
                    rmf::format_real(rep.metric->tail_bound).c_str());
    if (rep.tracking)
        std::printf("sup |x - x~| t>=0.5 %s\n",
                    rmf::format_real(rep.tracking->sup_after_transient).c_str());
    std::printf("wrote %s_filters.csv and %s_errors.csv\n", stem.c_str(), stem.c_str());
    return kExitOk;
}

int cmd_sweep(const Flags& f) {
    auto base = build_config(f);
    base.track = false;
    const auto eps_list = list_or(f, "epsilon", base.epsilon);
    const auto xt_list = list_or(f, "x-tilde0", base.x_tilde0);
    const auto dir = output_dir(base);

    std::ostringstream summary;
    summary << "epsilon,x_tilde0,time_avg_mse,metric_mean,metric_std_err,replications_used\n";
    for (double eps : eps_list) {
        for (double xt : xt_list) {
            auto c = base;
            c.epsilon = eps;
            c.x_tilde0 = xt;
            c.validate();
            std::fprintf(stderr, "sweep: epsilon=%s x_tilde0=%s reps=%zu\n",
                         rmf::format_real(eps).c_str(), rmf::format_real(xt).c_str(),
                         c.n_replications);
            const auto mc = rmf::monte_carlo_mse(c);
            const auto stem = (dir / ("sweep_eps" + tag(eps) + "_xt" + tag(xt))).string();
            rmf::emit_plot_data(mc.representative->full, mc.representative->reduced, mc.errors, stem);
            summary << rmf::format_real(eps) << ',' << rmf::format_real(xt) << ','
                    << rmf::format_real(mc.errors.time_avg_mse) << ','
                    << rmf::format_real(mc.errors.metric_mean) << ','
                    << rmf::format_real(mc.errors.metric_std_err) << ','
                    << mc.errors.replications_used << '\n';
            std::printf("epsilon=%s x_tilde0=%s time_avg_mse=%s d=%s used=%zu\n",
                        rmf::format_real(eps).c_str(), rmf::format_real(xt).c_str(),
                        rmf::format_real(mc.errors.time_avg_mse).c_str(),
                        rmf::format_real(mc.errors.metric_mean).c_str(),
                        mc.errors.replications_used);
        }
    }
    const auto path = dir / "sweep_summary.csv";
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw rmf::Error("cannot write " + path.string());
    const auto text = summary.str();
    std::fwrite(text.data(), 1, text.size(), out);
    std::fclose(out);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slow-fast SDE simulation and reduced particle filtering"};
    app.name("rmf");
    app.fallthrough();
    app.require_subcommand(1);

    Flags flags;
    app.add_option("--config", flags.config, "key=value config file")->check(CLI::ExistingFile);
    const std::vector<std::pair<std::string, std::string>> value_flags{
        {"epsilon", "time-scale ratio (comma list for sweep)"},
        {"particles", "number of particles"},
        {"substeps", "fine sub-steps per observation step"},
        {"dt", "observation step"},
        {"horizon", "final time"},
        {"x0", "truth slow initial value"},
        {"y0", "truth fast initial value"},
        {"x-tilde0", "reduced filter initial value (comma list for sweep)"},
        {"reps", "Monte Carlo replications"},
        {"seed", "master seed"},
        {"jobs", "replications run concurrently"},
        {"expansion-order", "manifold expansion order (0 or 1)"},
        {"out", "output directory"},
    };
    std::map<std::string, std::string> raw;
    for (const auto& [name, help] : value_flags)
        app.add_option("--" + name, raw[name], help);
    app.add_option("--set", flags.settings, "extra key=value settings (repeatable)");

    auto* simulate = app.add_subcommand("simulate", "truth trajectory and manifold tracking report");
    auto* filter = app.add_subcommand("filter", "one replication of the full and reduced filters");
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo mean-square error over epsilon and x-tilde0");
    auto* validate = app.add_subcommand("validate", "check the model hypotheses");
    validate->add_option("--probes", flags.probes, "random probe points");

    if (argc <= 1) {
        std::cerr << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }
    for (const auto& [name, help] : value_flags)
        if (app.get_option("--" + name)->count() > 0) flags.values[name] = raw[name];

    try {
        if (*simulate) return cmd_simulate(flags);
        if (*filter) return cmd_filter(flags);
        if (*sweep) return cmd_sweep(flags);
        if (*validate) return cmd_validate(flags);
    } catch (const rmf::ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    std::cerr << app.help();
    return kExitUsage;
}
