#ifndef PWDAMP_CLI_HPP
#define PWDAMP_CLI_HPP

// Batch front end. Every subcommand turns a RunConfig into a RunReport (a
// JSON document plus CSV tables); write_report() puts them on disk. Defaults
// are listed in docs/defaults.md.

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace CLI {
class App;
}

namespace pwdamp::cli {

inline constexpr const char* version = "1.0.0";
inline constexpr int schema_version = 1;

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_compute = 3 };

/// Raised for invalid configuration values (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command = "classify";
    /// Decimal, p/q, or golden | silver | liouville.
    std::string xi = "golden";
    std::uint64_t seed = 1;

    // classify
    int cf_depth = 40;
    double mu_min = 1.0;
    double mu_max = 500.0;
    double mu_step = 0.01;
    bool include_resonances = true;
    double K1 = 1.0;
    double poly_epsilon = 1.0;
    std::int64_t constant_type_bound = 20;
    std::int64_t liouville_m_max = 100000;
    /// identity | power_log | exponential
    std::string liouville_phi = "power_log";
    double liouville_alpha = 1.0;
    double liouville_epsilon = 1.0;
    double liouville_beta = 1.0;
    double liouville_kappa = 1e-3;

    // resolvent-scan
    double scan_mu_min = 1.0;
    double scan_mu_max = 50.0;
    double scan_mu_step = 1.0;
    int probes = 8;
    int scan_n_per_side = 2048;

    // spectrum
    double re_min = 0.0;
    double re_max = 50.0;
    double im_min = -1.0;
    double im_max = 5.0;
    double root_tol = 1e-10;
    double abscissa_R = 50.0;

    // carleman-verify
    /// quadratic: (x+1)² left, (x−2)² right; exponential: e^{βx}, e^{−βx}
    std::string weight = "quadratic";
    double weight_beta = 2.0;
    int carleman_intervals = 2048;
    double h_min = 1e-3;
    double h_max = 1e-1;
    int h_count = 9;
    int carleman_samples = 50;

    // simulate
    int n_left = 1000;
    int n_right = 1000;
    double T = 200.0;
    /// 0 means min spacing / 2.
    double dt = 0.0;
    /// bump | mode | custom
    std::string initial = "bump";
    int mode_k = 2;
    double bump_center = 0.3;
    double bump_width = 0.1;
    /// CSV with columns x,u[,v] for initial = custom.
    std::string custom_file;
    int sample_stride = 100;

    // sweep
    /// Subcommand run for every ξ: classify | resolvent-scan | spectrum | carleman-verify | simulate
    std::string sweep_of = "simulate";
    double xi_min = 0.05;
    double xi_max = 0.95;
    double xi_step = 0.05;
    /// Comma-separated explicit ξ values; overrides the range when set.
    std::string xi_list;
    int workers = 1;

    // output
    std::string out_dir = "pwdamp_out";
    bool plot_script = false;
    bool wall_clock = false;
};

/// Throws ConfigError on any out-of-range parameter.
void validate(const RunConfig& config);

struct CsvTable {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// "# schema: <schema> v<schema_version>", header line, rows; '\n' endings.
    std::string render() const;
};

struct RunReport {
    nlohmann::ordered_json json;
    /// file name → table
    std::map<std::string, CsvTable> tables;
    /// file name → text (plot scripts)
    std::map<std::string, std::string> extras;
};

RunReport cmd_classify(const RunConfig& config);
RunReport cmd_resolvent_scan(const RunConfig& config);
RunReport cmd_spectrum(const RunConfig& config);
RunReport cmd_carleman(const RunConfig& config);
RunReport cmd_simulate(const RunConfig& config);
RunReport cmd_sweep(const RunConfig& config);

/// Dispatches on config.command after validate().
RunReport run(const RunConfig& config);

/// Writes <out_dir>/<command>.json and every table; each file goes through a
/// temporary sibling and a rename. Returns the paths written.
std::vector<std::string> write_report(const RunReport& report, const RunConfig& config);

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double x);

/// ξ values of a sweep, rounded to 12 decimals so 0.05 + 9·0.05 is 0.5.
std::vector<double> sweep_grid(const RunConfig& config);

/// Command-line parser bound to `config`; --config reads a flat key = value
/// file whose keys are the long option names.
std::unique_ptr<CLI::App> make_app(RunConfig& config);

/// Full program: parse, run, write. Returns an ExitCode.
int main_entry(int argc, char** argv);

} // namespace pwdamp::cli

#endif
