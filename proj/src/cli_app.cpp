#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pwdamp/cli.hpp"
#include "pwdamp/errors.hpp"

namespace pwdamp::cli {

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& text)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

std::vector<std::string> write_report(const RunReport& report, const RunConfig& config)
{
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    const std::string stem = config.command;
    const auto json_path = dir / (stem + ".json");
    write_atomically(json_path, report.json.dump(2) + "\n");
    written.push_back(json_path.string());
    for (const auto& [name, table] : report.tables) {
        write_atomically(dir / name, table.render());
        written.push_back((dir / name).string());
    }
    for (const auto& [name, text] : report.extras) {
        write_atomically(dir / name, text);
        written.push_back((dir / name).string());
    }
    return written;
}

std::unique_ptr<CLI::App> make_app(RunConfig& c)
{
    auto app = std::make_unique<CLI::App>("Pointwise-damped string: Diophantine conditions, resolvent, spectrum, "
                                          "Carleman checks and time-domain decay.",
                                          "pwdamp");
    app->set_config("--config", "", "Flat key = value file; keys are the long option names");
    app->set_version_flag("--version", std::string(version));
    app->require_subcommand(1, 1);

    app->add_option("--xi", c.xi, "Actuator position: decimal, p/q, golden, silver or liouville")->capture_default_str();
    app->add_option("--seed", c.seed, "Seed for random probes and samples")->capture_default_str();

    app->add_option("--cf_depth", c.cf_depth, "Continued-fraction depth")->capture_default_str();
    app->add_option("--mu_min", c.mu_min, "Frequency grid start")->capture_default_str();
    app->add_option("--mu_max", c.mu_max, "Frequency grid end")->capture_default_str();
    app->add_option("--mu_step", c.mu_step, "Frequency grid step")->capture_default_str();
    app->add_option("--include_resonances", c.include_resonances, "Add every multiple of pi/2 to the grid")
        ->capture_default_str();
    app->add_option("--K1", c.K1, "Exponential weight rate in the M-condition")->capture_default_str();
    app->add_option("--poly_epsilon", c.poly_epsilon, "Exponent epsilon of the polynomial condition")
        ->capture_default_str();
    app->add_option("--constant_type_bound", c.constant_type_bound, "Largest partial quotient for constant type")
        ->capture_default_str();
    app->add_option("--liouville_m_max", c.liouville_m_max, "Largest m in the Liouville-type scan")
        ->capture_default_str();
    app->add_option("--liouville_phi", c.liouville_phi, "identity | power_log | exponential")->capture_default_str();
    app->add_option("--liouville_alpha", c.liouville_alpha, "power_log exponent alpha")->capture_default_str();
    app->add_option("--liouville_epsilon", c.liouville_epsilon, "power_log exponent epsilon")->capture_default_str();
    app->add_option("--liouville_beta", c.liouville_beta, "exponential rate beta")->capture_default_str();
    app->add_option("--liouville_kappa", c.liouville_kappa, "Lower bound kappa")->capture_default_str();

    app->add_option("--scan_mu_min", c.scan_mu_min, "Resolvent scan start")->capture_default_str();
    app->add_option("--scan_mu_max", c.scan_mu_max, "Resolvent scan end")->capture_default_str();
    app->add_option("--scan_mu_step", c.scan_mu_step, "Resolvent scan step")->capture_default_str();
    app->add_option("--probes", c.probes, "Probes per frequency")->capture_default_str();
    app->add_option("--scan_n_per_side", c.scan_n_per_side, "Intervals per side for the explicit solution")
        ->capture_default_str();

    app->add_option("--re_min", c.re_min, "Root search rectangle")->capture_default_str();
    app->add_option("--re_max", c.re_max, "Root search rectangle")->capture_default_str();
    app->add_option("--im_min", c.im_min, "Root search rectangle")->capture_default_str();
    app->add_option("--im_max", c.im_max, "Root search rectangle")->capture_default_str();
    app->add_option("--root_tol", c.root_tol, "Newton tolerance on |D|")->capture_default_str();
    app->add_option("--abscissa_R", c.abscissa_R, "Horizon for the spectral abscissa")->capture_default_str();

    app->add_option("--weight", c.weight, "quadratic | exponential")->capture_default_str();
    app->add_option("--weight_beta", c.weight_beta, "Rate of the exponential weights")->capture_default_str();
    app->add_option("--carleman_intervals", c.carleman_intervals, "Intervals per side")->capture_default_str();
    app->add_option("--h_min", c.h_min, "Smallest semiclassical parameter")->capture_default_str();
    app->add_option("--h_max", c.h_max, "Largest semiclassical parameter")->capture_default_str();
    app->add_option("--h_count", c.h_count, "Log-spaced h values")->capture_default_str();
    app->add_option("--carleman_samples", c.carleman_samples, "Random admissible u per side")->capture_default_str();

    app->add_option("--n_left", c.n_left, "Intervals on [0,xi]")->capture_default_str();
    app->add_option("--n_right", c.n_right, "Intervals on [xi,1]")->capture_default_str();
    app->add_option("--T", c.T, "Final time")->capture_default_str();
    app->add_option("--dt", c.dt, "Time step (0: min spacing / 2)")->capture_default_str();
    app->add_option("--initial", c.initial, "bump | mode | custom")->capture_default_str();
    app->add_option("--mode_k", c.mode_k, "Mode number for initial = mode")->capture_default_str();
    app->add_option("--bump_center", c.bump_center, "Bump centre")->capture_default_str();
    app->add_option("--bump_width", c.bump_width, "Bump half-width")->capture_default_str();
    app->add_option("--custom_file", c.custom_file, "CSV x,u[,v] for initial = custom");
    app->add_option("--sample_stride", c.sample_stride, "Record every n-th step")->capture_default_str();

    app->add_option("--sweep_of", c.sweep_of, "Command run for each xi")->capture_default_str();
    app->add_option("--xi_min", c.xi_min, "Sweep start")->capture_default_str();
    app->add_option("--xi_max", c.xi_max, "Sweep end")->capture_default_str();
    app->add_option("--xi_step", c.xi_step, "Sweep step")->capture_default_str();
    app->add_option("--xi_list", c.xi_list, "Comma-separated xi values (overrides the range)");
    app->add_option("--workers", c.workers, "Worker threads for sweeps")->capture_default_str();

    app->add_option("--out_dir", c.out_dir, "Output directory")->capture_default_str();
    app->add_option("--plot_script", c.plot_script, "Also emit a matplotlib script")->capture_default_str();
    app->add_option("--wall_clock", c.wall_clock, "Record run time (breaks byte-identical output)")
        ->capture_default_str();

    for (const char* name : {"classify", "resolvent-scan", "spectrum", "carleman-verify", "simulate", "sweep"}) {
        auto* sub = app->add_subcommand(name);
        sub->fallthrough();
        sub->callback([&c, name] { c.command = name; });
    }
    return app;
}

int main_entry(int argc, char** argv)
{
    RunConfig config;
    auto app = make_app(config);
    try {
        app->parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app->exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    RunReport report;
    try {
        report = run(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return exit_compute;
    }

    try {
        for (const auto& path : write_report(report, config)) std::cout << path << "\n";
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return exit_compute;
    }
    return exit_ok;
}

} // namespace pwdamp::cli
