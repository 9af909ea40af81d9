#include "pwdamp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pwdamp/carleman.hpp"
#include "pwdamp/decay_fit.hpp"
#include "pwdamp/diophantine.hpp"
#include "pwdamp/errors.hpp"
#include "pwdamp/frequency.hpp"
#include "pwdamp/simulator.hpp"

namespace pwdamp::cli {

using json = nlohmann::ordered_json;

namespace {

json num(double x)
{
    if (std::isfinite(x)) return x;
    return format_number(x);
}

template <typename T>
json opt(const std::optional<T>& v)
{
    if (!v) return nullptr;
    return num(static_cast<double>(*v));
}

std::string flag(bool b) { return b ? "true" : "false"; }

double resolved_xi(const RunConfig& c)
{
    try {
        return diophantine::parse_xi(c.xi);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("xi: ") + e.what());
    }
}

json header(const std::string& command)
{
    json j;
    j["command"] = command;
    j["version"] = version;
    j["schema_version"] = schema_version;
    return j;
}

std::vector<double> uniform_grid(double lo, double hi, double step)
{
    std::vector<double> g;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) g.push_back(lo + static_cast<double>(k) * step);
    return g;
}

// ---------------------------------------------------------------------------
// classify

diophantine::GrowthFunction liouville_phi(const RunConfig& c)
{
    if (c.liouville_phi == "identity") return diophantine::GrowthFunction::identity();
    if (c.liouville_phi == "exponential") return diophantine::GrowthFunction::exponential(c.liouville_beta);
    return diophantine::GrowthFunction::power_log(c.liouville_alpha, c.liouville_epsilon);
}

json condition_json(const diophantine::ConditionReport& r)
{
    json j;
    j["condition"] = diophantine::to_string(r.condition);
    j["pass"] = r.pass;
    j["witness"] = opt(r.witness);
    j["violation_threshold"] = num(r.violation_threshold);
    if (r.grid.empty()) {
        j["m_min"] = r.m_min;
        j["m_max"] = r.m_max;
    } else {
        j["grid_size"] = r.grid.size();
        j["grid_min"] = num(r.grid.front());
        j["grid_max"] = num(r.grid.back());
    }
    j["head_infimum"] = num(r.head_infimum);
    j["tail_infimum"] = num(r.tail_infimum);
    json k;
    k["K1"] = opt(r.constants.K1);
    k["K2"] = opt(r.constants.K2);
    k["K"] = opt(r.constants.K);
    k["epsilon"] = opt(r.constants.epsilon);
    k["kappa"] = opt(r.constants.kappa);
    j["constants"] = k;
    j["evidence"] = r.evidence;
    return j;
}

std::vector<std::string> condition_row(const diophantine::ConditionReport& r)
{
    auto o = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    return {diophantine::to_string(r.condition),
            flag(r.pass),
            o(r.witness),
            format_number(r.violation_threshold),
            format_number(r.head_infimum),
            format_number(r.tail_infimum),
            o(r.constants.K1),
            o(r.constants.K2),
            o(r.constants.K),
            o(r.constants.epsilon),
            o(r.constants.kappa)};
}

struct ClassifyOutcome {
    diophantine::Classification cls;
    diophantine::ConditionReport liouville;
};

ClassifyOutcome classify(const RunConfig& c, double xi)
{
    diophantine::ClassifySettings s;
    s.cf_depth = c.cf_depth;
    s.constant_type_bound = c.constant_type_bound;
    s.mu_grid = diophantine::default_mu_grid(c.mu_min, c.mu_max, c.mu_step, c.include_resonances);
    s.K1 = c.K1;
    s.poly_epsilon = c.poly_epsilon;
    ClassifyOutcome out{diophantine::classify_actuator(xi, s), {}};
    out.liouville = diophantine::check_liouville_type(xi, liouville_phi(c), c.liouville_kappa, c.liouville_m_max);
    return out;
}

// ---------------------------------------------------------------------------
// resolvent scan

frequency::GrowthScan resolvent_scan(const RunConfig& c, double xi)
{
    const auto grid = uniform_grid(c.scan_mu_min, c.scan_mu_max, c.scan_mu_step);
    frequency::ScanOptions opt;
    opt.n_per_side = c.scan_n_per_side;
    opt.seed = c.seed;
    return frequency::scan_resolvent_growth(xi, grid, c.probes, opt);
}

// ---------------------------------------------------------------------------
// carleman

struct CarlemanSide {
    carleman::WeightFunction phi;
    carleman::Side side;
    carleman::UniformGrid grid;
    std::vector<carleman::WeightViolation> violations;
    carleman::CarlemanEstimate estimate;
};

std::pair<carleman::WeightFunction, carleman::WeightFunction> weights(const RunConfig& c, double xi)
{
    using carleman::WeightFunction;
    if (c.weight == "exponential")
        return {WeightFunction::exponential(0.0, xi, 1.0, c.weight_beta),
                WeightFunction::exponential(xi, 1.0, 1.0, -c.weight_beta)};
    return {WeightFunction::shifted_quadratic(0.0, xi, -1.0), WeightFunction::shifted_quadratic(xi, 1.0, 2.0)};
}

std::vector<CarlemanSide> carleman_run(const RunConfig& c, double xi)
{
    const auto [left, right] = weights(c, xi);
    const auto hs = carleman::log_spaced(c.h_min, c.h_max, c.h_count);
    std::vector<CarlemanSide> out;
    for (auto side : {carleman::Side::left, carleman::Side::right}) {
        const auto& phi = side == carleman::Side::left ? left : right;
        CarlemanSide s{phi, side, {phi.a(), phi.b(), c.carleman_intervals}, carleman::validate_weight(phi, side), {}};
        const std::uint64_t seed = c.seed + (side == carleman::Side::left ? 0 : 1);
        const auto samples = carleman::random_admissible_samples(side, s.grid, c.carleman_samples, seed);
        s.estimate = carleman::estimate_carleman_constant(phi, side, s.grid, samples, hs);
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate

simulator::InitialData initial_spec(const RunConfig& c)
{
    using simulator::InitialData;
    if (c.initial == "mode") return InitialData::fourier_mode(c.mode_k);
    if (c.initial == "custom") {
        std::ifstream in(c.custom_file);
        if (!in) throw ConfigError("custom_file: cannot open '" + c.custom_file + "'");
        std::vector<double> x, u, v;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::vector<double> cells;
            std::stringstream ss(line);
            std::string cell;
            bool numeric = true;
            while (std::getline(ss, cell, ',')) {
                double val = 0.0;
                const char* b = cell.data();
                while (b < cell.data() + cell.size() && *b == ' ') ++b;
                auto [p, ec] = std::from_chars(b, cell.data() + cell.size(), val);
                if (ec != std::errc{}) {
                    numeric = false;
                    break;
                }
                cells.push_back(val);
            }
            if (!numeric) continue; // header
            if (cells.size() < 2) throw ConfigError("custom_file: need columns x,u[,v]");
            x.push_back(cells[0]);
            u.push_back(cells[1]);
            if (cells.size() > 2) v.push_back(cells[2]);
        }
        if (!v.empty() && v.size() != x.size()) throw ConfigError("custom_file: velocity column incomplete");
        return InitialData::custom(std::move(x), std::move(u), std::move(v));
    }
    return InitialData::smooth_bump(c.bump_center, c.bump_width);
}

struct SimulationOutcome {
    Mesh mesh;
    simulator::EnergyTrace trace;
    simulator::WaveState final_state;
    double residual = 0.0;
    std::vector<decay_fit::FitResult> fits;
    std::string fit_error;
};

SimulationOutcome simulation(const RunConfig& c, double xi)
{
    SimulationOutcome o{build_mesh(xi, c.n_left, c.n_right), {}, {}, 0.0, {}, {}};
    simulator::WaveState init;
    try {
        init = simulator::initial_data(initial_spec(c), o.mesh);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("initial data: ") + e.what());
    }
    const double dt = c.dt > 0.0 ? c.dt : simulator::default_dt(o.mesh);
    simulator::SimulateOptions opt;
    opt.sample_stride = c.sample_stride;
    auto [trace, fin] = simulator::simulate(o.mesh, init, c.T, dt, opt);
    o.trace = std::move(trace);
    o.final_state = std::move(fin);
    if (c.T > 0.0) o.residual = simulator::dissipation_residual(o.trace, o.trace.t.front(), o.trace.t.back());
    try {
        o.fits = decay_fit::model_select(o.trace.t, o.trace.E);
    } catch (const InsufficientData& e) {
        o.fit_error = e.what();
    }
    return o;
}

json fit_json(const decay_fit::FitResult& f)
{
    json j;
    j["model"] = f.model.label();
    json p;
    switch (f.model.kind) {
    case decay_fit::DecayModel::Kind::logarithmic:
        p["C"] = num(f.model.C);
        p["n"] = f.model.n;
        break;
    case decay_fit::DecayModel::Kind::polynomial:
        p["C"] = num(f.model.C);
        p["epsilon"] = num(f.model.epsilon);
        break;
    case decay_fit::DecayModel::Kind::exponential:
        p["M"] = num(f.model.C);
        p["rate"] = num(f.model.rate);
        break;
    }
    j["parameters"] = p;
    j["residual"] = num(f.residual);
    j["window"] = {num(f.t_min), num(f.t_max)};
    j["samples"] = f.samples;
    return j;
}

std::string plot_script(const std::string& title, const std::string& csv, const std::string& x,
                        const std::vector<std::string>& ys, bool logy)
{
    std::ostringstream os;
    os << "# Generated by pwdamp " << version << ". Requires matplotlib.\n"
       << "import csv\nimport matplotlib.pyplot as plt\n\n"
       << "with open(\"" << csv << "\") as fh:\n"
       << "    rows = list(csv.DictReader(line for line in fh if not line.startswith(\"#\")))\n\n"
       << "x = [float(r[\"" << x << "\"]) for r in rows]\n"
       << "fig, ax = plt.subplots()\n";
    for (const auto& y : ys)
        os << "ax.plot(x, [float(r[\"" << y << "\"]) if r[\"" << y << "\"] else float(\"nan\") for r in rows], label=\""
           << y << "\")\n";
    if (logy) os << "ax.set_yscale(\"log\")\n";
    os << "ax.set_xlabel(\"" << x << "\")\nax.set_title(\"" << title << "\")\nax.legend()\n"
       << "fig.savefig(\"" << csv.substr(0, csv.rfind('.')) << ".png\", dpi=150)\n";
    return os.str();
}

} // namespace

// ---------------------------------------------------------------------------

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

std::string CsvTable::render() const
{
    std::string s = "# schema: " + schema + " v" + std::to_string(schema_version) + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
        s += "\n";
    }
    return s;
}

void validate(const RunConfig& c)
{
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    static const std::vector<std::string> commands = {"classify", "resolvent-scan", "spectrum",
                                                      "carleman-verify", "simulate", "sweep"};
    need(std::find(commands.begin(), commands.end(), c.command) != commands.end(), "unknown command '" + c.command + "'");
    if (c.command != "sweep") resolved_xi(c);
    need(c.cf_depth >= 1 && c.cf_depth <= 200, "cf_depth must be in [1,200]");
    need(c.mu_min > 0.0 && c.mu_max > c.mu_min && c.mu_step > 0.0, "mu grid needs 0 < mu_min < mu_max, mu_step > 0");
    need((c.mu_max - c.mu_min) / c.mu_step <= 5e7, "mu grid too large");
    need(c.K1 > 0.0, "K1 must be positive");
    need(c.poly_epsilon >= 0.0, "poly_epsilon must be nonnegative");
    need(c.constant_type_bound >= 1, "constant_type_bound must be positive");
    need(c.liouville_m_max >= 2, "liouville_m_max must be at least 2");
    need(c.liouville_phi == "identity" || c.liouville_phi == "power_log" || c.liouville_phi == "exponential",
         "liouville_phi must be identity, power_log or exponential");
    need(c.liouville_alpha >= 1.0 && c.liouville_epsilon > 0.0 && c.liouville_beta > 0.0,
         "liouville growth needs alpha >= 1, epsilon > 0, beta > 0");
    need(c.liouville_kappa > 0.0, "liouville_kappa must be positive");
    need(c.scan_mu_min > 0.0 && c.scan_mu_max >= c.scan_mu_min && c.scan_mu_step > 0.0,
         "scan grid needs 0 < scan_mu_min <= scan_mu_max, scan_mu_step > 0");
    need(c.probes >= 1, "probes must be positive");
    need(c.scan_n_per_side >= 4, "scan_n_per_side must be at least 4");
    need(c.re_max > c.re_min && c.im_max > c.im_min, "spectrum rectangle is empty");
    need(c.root_tol > 0.0, "root_tol must be positive");
    need(c.abscissa_R > 0.0, "abscissa_R must be positive");
    need(c.weight == "quadratic" || c.weight == "exponential", "weight must be quadratic or exponential");
    need(c.weight_beta > 0.0, "weight_beta must be positive");
    need(c.carleman_intervals >= 8, "carleman_intervals must be at least 8");
    need(c.h_min > 0.0 && c.h_max >= c.h_min && c.h_count >= 1, "h grid needs 0 < h_min <= h_max, h_count >= 1");
    need(c.carleman_samples >= 1, "carleman_samples must be positive");
    need(c.n_left >= 1 && c.n_right >= 1, "n_left and n_right must be positive");
    need(c.T >= 0.0 && std::isfinite(c.T), "T must be nonnegative");
    need(c.dt >= 0.0, "dt must be nonnegative (0 selects the default)");
    need(c.initial == "bump" || c.initial == "mode" || c.initial == "custom", "initial must be bump, mode or custom");
    need(c.mode_k >= 1, "mode_k must be positive");
    need(c.bump_width > 0.0, "bump_width must be positive");
    need(c.initial != "custom" || !c.custom_file.empty(), "initial = custom needs custom_file");
    need(c.sample_stride >= 1, "sample_stride must be positive");
    need(c.sweep_of != "sweep" && std::find(commands.begin(), commands.end(), c.sweep_of) != commands.end(),
         "sweep_of must name a non-sweep command");
    need(c.workers >= 1 && c.workers <= 256, "workers must be in [1,256]");
    if (c.command == "sweep") {
        need(!sweep_grid(c).empty(), "sweep grid is empty");
        for (double x : sweep_grid(c)) need(x > 0.0 && x < 1.0, "sweep values must lie in (0,1)");
    }
    need(!c.out_dir.empty(), "out_dir must be set");
}

std::vector<double> sweep_grid(const RunConfig& c)
{
    std::vector<double> g;
    auto round12 = [](double x) { return std::round(x * 1e12) / 1e12; };
    if (!c.xi_list.empty()) {
        std::stringstream ss(c.xi_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                g.push_back(diophantine::parse_xi(item));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("xi_list: ") + e.what());
            }
        }
        return g;
    }
    if (!(c.xi_step > 0.0) || !(c.xi_max >= c.xi_min)) throw ConfigError("sweep range needs xi_min <= xi_max, xi_step > 0");
    const long n = static_cast<long>(std::floor((c.xi_max - c.xi_min) / c.xi_step + 1e-9));
    for (long k = 0; k <= n; ++k) g.push_back(round12(c.xi_min + static_cast<double>(k) * c.xi_step));
    return g;
}

RunReport cmd_classify(const RunConfig& c)
{
    const double xi = resolved_xi(c);
    const auto o = classify(c, xi);
    const auto& cls = o.cls;
    RunReport r;
    r.json = header("classify");
    r.json["inputs"] = {{"xi", c.xi},
                        {"xi_value", num(xi)},
                        {"cf_depth", c.cf_depth},
                        {"mu_min", num(c.mu_min)},
                        {"mu_max", num(c.mu_max)},
                        {"mu_step", num(c.mu_step)},
                        {"include_resonances", c.include_resonances},
                        {"K1", num(c.K1)},
                        {"poly_epsilon", num(c.poly_epsilon)},
                        {"constant_type_bound", c.constant_type_bound},
                        {"liouville_phi", liouville_phi(c).describe()},
                        {"liouville_kappa", num(c.liouville_kappa)},
                        {"liouville_m_max", c.liouville_m_max}};
    json cf;
    cf["partial_quotients"] = cls.continued_fraction.partial_quotients;
    json conv = json::array();
    for (const auto& pq : cls.continued_fraction.convergents) conv.push_back({pq.p, pq.q});
    cf["convergents"] = conv;
    cf["terminated"] = cls.continued_fraction.terminated;
    cf["precision_exhausted"] = cls.continued_fraction.precision_exhausted;
    json res;
    res["is_rational"] = cls.is_rational;
    res["strongly_stable"] = cls.strongly_stable;
    res["constant_type"] = cls.constant_type;
    res["max_partial_quotient"] = cls.continued_fraction.max_partial_quotient();
    res["continued_fraction"] = cf;
    res["conditions"] = {condition_json(cls.m_grid), condition_json(cls.poly), condition_json(cls.cos_variant),
                         condition_json(o.liouville)};
    r.json["result"] = res;
    r.json["notes"] = {"Condition verdicts are evidence on the sampled grid, not proofs.",
                       "Rationality is decided from a double-precision value and a tolerance."};

    CsvTable t{"pwdamp.classify.conditions",
               {"condition", "pass", "witness", "violation_threshold", "head_infimum", "tail_infimum", "K1", "K2",
                "K", "epsilon", "kappa"},
               {}};
    for (const auto* rep : {&cls.m_grid, &cls.poly, &cls.cos_variant, &o.liouville}) t.rows.push_back(condition_row(*rep));
    r.tables["classify_conditions.csv"] = t;

    CsvTable cft{"pwdamp.classify.convergents", {"k", "a_k", "p_k", "q_k"}, {}};
    for (std::size_t k = 0; k < cls.continued_fraction.convergents.size(); ++k) {
        const auto& pq = cls.continued_fraction.convergents[k];
        cft.rows.push_back({std::to_string(k), std::to_string(cls.continued_fraction.partial_quotients[k]),
                            std::to_string(pq.p), std::to_string(pq.q)});
    }
    r.tables["classify_convergents.csv"] = cft;
    return r;
}

RunReport cmd_resolvent_scan(const RunConfig& c)
{
    const double xi = resolved_xi(c);
    const auto scan = resolvent_scan(c, xi);
    RunReport r;
    r.json = header("resolvent-scan");
    r.json["inputs"] = {{"xi", c.xi},
                        {"xi_value", num(xi)},
                        {"scan_mu_min", num(c.scan_mu_min)},
                        {"scan_mu_max", num(c.scan_mu_max)},
                        {"scan_mu_step", num(c.scan_mu_step)},
                        {"probes", c.probes},
                        {"scan_n_per_side", c.scan_n_per_side},
                        {"seed", c.seed}};
    r.json["result"] = {{"C", num(scan.C)},
                        {"K", num(scan.K)},
                        {"fit_residual", num(scan.fit_residual)},
                        {"fitted_points", scan.fitted_points},
                        {"model", "norm ~ C*exp(K*mu)"}};
    r.json["notes"] = {"Norm estimates are lower bounds from a finite probe set."};
    CsvTable t{"pwdamp.resolvent_scan", {"mu", "norm_estimate"}, {}};
    for (std::size_t i = 0; i < scan.mu.size(); ++i)
        t.rows.push_back({format_number(scan.mu[i]), format_number(scan.norm_estimate[i])});
    r.tables["resolvent_scan.csv"] = t;
    if (c.plot_script)
        r.extras["plot_resolvent_scan.py"] =
            plot_script("resolvent norm lower bound", "resolvent_scan.csv", "mu", {"norm_estimate"}, true);
    return r;
}

RunReport cmd_spectrum(const RunConfig& c)
{
    const double xi = resolved_xi(c);
    frequency::RootOptions ro;
    ro.tol = c.root_tol;
    const auto found = frequency::find_eigenvalues(xi, {c.re_min, c.re_max, c.im_min, c.im_max}, ro);
    const double abscissa = frequency::spectral_abscissa(xi, c.abscissa_R, ro, c.im_max);
    RunReport r;
    r.json = header("spectrum");
    r.json["inputs"] = {{"xi", c.xi},
                        {"xi_value", num(xi)},
                        {"rectangle", {num(c.re_min), num(c.re_max), num(c.im_min), num(c.im_max)}},
                        {"root_tol", num(c.root_tol)},
                        {"abscissa_R", num(c.abscissa_R)}};
    r.json["result"] = {{"winding_number", found.winding_number},
                        {"root_count", found.roots.size()},
                        {"contour", {num(found.contour.re_min), num(found.contour.re_max), num(found.contour.im_min),
                                     num(found.contour.im_max)}},
                        {"spectral_abscissa", num(abscissa)}};
    r.json["notes"] = {"Roots z of D(z) = sin z + i sin(xi z) sin((1-xi) z); eigenvalues are i*z. z = 0 is not an "
                       "eigenvalue."};
    CsvTable t{"pwdamp.spectrum.roots", {"re_z", "im_z", "residual", "multiplicity"}, {}};
    for (const auto& root : found.roots)
        t.rows.push_back({format_number(root.z.real()), format_number(root.z.imag()), format_number(root.residual),
                          std::to_string(root.multiplicity)});
    r.tables["spectrum_roots.csv"] = t;
    return r;
}

RunReport cmd_carleman(const RunConfig& c)
{
    const double xi = resolved_xi(c);
    const auto sides = carleman_run(c, xi);
    RunReport r;
    r.json = header("carleman-verify");
    r.json["inputs"] = {{"xi", c.xi},
                        {"xi_value", num(xi)},
                        {"weight", c.weight},
                        {"carleman_intervals", c.carleman_intervals},
                        {"h_min", num(c.h_min)},
                        {"h_max", num(c.h_max)},
                        {"h_count", c.h_count},
                        {"carleman_samples", c.carleman_samples},
                        {"seed", c.seed}};
    CsvTable t{"pwdamp.carleman.ratios", {"side", "sample", "h", "lhs", "rhs", "ratio"}, {}};
    json res = json::array();
    for (const auto& s : sides) {
        json j;
        j["side"] = carleman::to_string(s.side);
        j["weight"] = s.phi.describe();
        json viol = json::array();
        for (const auto& v : s.violations) viol.push_back({{"condition", v.condition}, {"x", num(v.x)}, {"value", num(v.value)}});
        j["weight_violations"] = viol;
        j["C_hat"] = num(s.estimate.C_hat);
        j["h0_hat"] = num(s.estimate.h0_hat);
        j["argmax_sample"] = s.estimate.argmax_sample;
        j["argmax_h"] = num(s.estimate.argmax_h);
        json per_h = json::array();
        for (std::size_t k = 0; k < s.estimate.h_grid.size(); ++k)
            per_h.push_back({{"h", num(s.estimate.h_grid[k])}, {"ratio_sup", num(s.estimate.ratio_sup_per_h[k])}});
        j["ratio_sup_per_h"] = per_h;

        // Operator identities on a fixed smooth test function at the middle of the h range.
        const double h = std::sqrt(c.h_min * c.h_max);
        std::vector<carleman::cplx> w(s.grid.size());
        for (int q = 0; q <= s.grid.n; ++q) {
            const double x = s.grid.x(q);
            w[static_cast<std::size_t>(q)] = std::exp(carleman::cplx(0.0, 3.0 * x)) * (1.0 + x * x);
        }
        const auto chk = carleman::check_conjugation(s.phi, s.grid, h, w);
        const auto idc = carleman::check_energy_identity(s.phi, s.grid, h, w, carleman::IdentityReading::corrected);
        const auto idp = carleman::check_energy_identity(s.phi, s.grid, h, w, carleman::IdentityReading::as_printed);
        j["identity_checks"] = {{"h", num(h)},
                                {"dual_route", num(chk.dual_route)},
                                {"q_reconstruction", num(chk.reconstruction)},
                                {"q2_split", num(chk.q2)},
                                {"q1_split", num(chk.q1)},
                                {"energy_identity_corrected_rel", num(idc.residual / idc.scale)},
                                {"energy_identity_as_printed_rel", num(idp.residual / idp.scale)}};
        res.push_back(j);

        for (std::size_t smp = 0; smp < s.estimate.samples.size(); ++smp)
            for (const auto& rec : s.estimate.samples[smp].records)
                t.rows.push_back({carleman::to_string(s.side), std::to_string(smp), format_number(rec.h),
                                  format_number(rec.lhs), format_number(rec.rhs), format_number(rec.ratio)});
    }
    r.json["result"] = res;
    r.json["notes"] = {"Both sides of the estimate are reported with the common factor exp(2 max(phi)/h) removed.",
                       "C_hat and h0_hat are empirical; h0_hat is a heuristic threshold."};
    r.tables["carleman_ratios.csv"] = t;
    return r;
}

RunReport cmd_simulate(const RunConfig& c)
{
    const double xi = resolved_xi(c);
    const auto o = simulation(c, xi);
    RunReport r;
    r.json = header("simulate");
    r.json["inputs"] = {{"xi", c.xi},
                        {"xi_value", num(xi)},
                        {"n_left", c.n_left},
                        {"n_right", c.n_right},
                        {"T", num(c.T)},
                        {"dt", num(o.trace.dt)},
                        {"initial", c.initial},
                        {"mode_k", c.mode_k},
                        {"bump_center", num(c.bump_center)},
                        {"bump_width", num(c.bump_width)},
                        {"custom_file", c.custom_file},
                        {"sample_stride", c.sample_stride}};
    const double e0 = o.trace.E.front(), eT = o.trace.E.back();
    json res;
    res["E0"] = num(e0);
    res["ET"] = num(eT);
    res["ET_over_E0"] = num(e0 > 0.0 ? eT / e0 : 0.0);
    res["dissipated"] = num(o.trace.dissipated.back());
    res["dissipation_residual"] = num(o.residual);
    json fits = json::array();
    for (const auto& f : o.fits) fits.push_back(fit_json(f));
    res["fits"] = fits;
    if (!o.fit_error.empty()) res["fit_error"] = o.fit_error;
    r.json["result"] = res;
    r.json["notes"] = {"Decay laws are upper bounds; a good fit on a finite horizon does not establish sharpness.",
                       "Interface convention: u'(xi+) - u'(xi-) = u_t(xi)."};

    CsvTable trace{"pwdamp.simulate.trace", {"t", "E", "damping", "dissipated"}, {}};
    for (std::size_t k = 0; k < o.trace.t.size(); ++k)
        trace.rows.push_back({format_number(o.trace.t[k]), format_number(o.trace.E[k]),
                              format_number(o.trace.damping[k]), format_number(o.trace.dissipated[k])});
    r.tables["simulate_trace.csv"] = trace;
    CsvTable state{"pwdamp.simulate.state", {"x", "u", "v"}, {}};
    for (std::size_t j = 0; j < o.mesh.size(); ++j)
        state.rows.push_back({format_number(o.mesh.nodes[j]), format_number(o.final_state.u[j]),
                              format_number(o.final_state.v[j])});
    r.tables["simulate_state.csv"] = state;
    if (c.plot_script) r.extras["plot_simulate_trace.py"] = plot_script("energy", "simulate_trace.csv", "t", {"E"}, true);
    return r;
}

RunReport cmd_sweep(const RunConfig& c)
{
    const auto grid = sweep_grid(c);
    std::vector<std::string> columns;
    if (c.sweep_of == "classify")
        columns = {"xi", "is_rational", "constant_type", "max_partial_quotient", "m_grid_pass", "poly_pass",
                   "cos_variant_pass", "liouville_pass"};
    else if (c.sweep_of == "resolvent-scan")
        columns = {"xi", "C", "K", "max_norm_estimate"};
    else if (c.sweep_of == "spectrum")
        columns = {"xi", "spectral_abscissa", "root_count"};
    else if (c.sweep_of == "carleman-verify")
        columns = {"xi", "C_hat_left", "h0_hat_left", "C_hat_right", "h0_hat_right"};
    else
        columns = {"xi", "ET_over_E0", "dissipation_residual", "best_model", "best_residual"};

    auto row_for = [&](double xi) -> std::vector<std::string> {
        const std::string x = format_number(xi);
        if (c.sweep_of == "classify") {
            const auto o = classify(c, xi);
            return {x,
                    flag(o.cls.is_rational),
                    flag(o.cls.constant_type),
                    std::to_string(o.cls.continued_fraction.max_partial_quotient()),
                    flag(o.cls.m_grid.pass),
                    flag(o.cls.poly.pass),
                    flag(o.cls.cos_variant.pass),
                    flag(o.liouville.pass)};
        }
        if (c.sweep_of == "resolvent-scan") {
            const auto s = resolvent_scan(c, xi);
            const double mx = s.norm_estimate.empty() ? 0.0 : *std::max_element(s.norm_estimate.begin(), s.norm_estimate.end());
            return {x, format_number(s.C), format_number(s.K), format_number(mx)};
        }
        if (c.sweep_of == "spectrum") {
            frequency::RootOptions ro;
            ro.tol = c.root_tol;
            const auto found = frequency::find_eigenvalues(xi, {c.re_min, c.re_max, c.im_min, c.im_max}, ro);
            return {x, format_number(frequency::spectral_abscissa(xi, c.abscissa_R, ro, c.im_max)),
                    std::to_string(found.roots.size())};
        }
        if (c.sweep_of == "carleman-verify") {
            const auto s = carleman_run(c, xi);
            return {x, format_number(s[0].estimate.C_hat), format_number(s[0].estimate.h0_hat),
                    format_number(s[1].estimate.C_hat), format_number(s[1].estimate.h0_hat)};
        }
        const auto o = simulation(c, xi);
        const double e0 = o.trace.E.front();
        return {x, format_number(e0 > 0.0 ? o.trace.E.back() / e0 : 0.0), format_number(o.residual),
                o.fits.empty() ? std::string() : o.fits.front().model.label(),
                o.fits.empty() ? std::string() : format_number(o.fits.front().residual)};
    };

    std::vector<std::vector<std::string>> rows(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                rows[i] = row_for(grid[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(c.workers), grid.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < nworkers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    RunReport r;
    r.json = header("sweep");
    json grid_json = json::array();
    for (double x : grid) grid_json.push_back(num(x));
    r.json["inputs"] = {{"sweep_of", c.sweep_of}, {"xi_grid", grid_json}, {"workers", c.workers}, {"seed", c.seed}};
    CsvTable t{"pwdamp.sweep." + c.sweep_of, columns, rows};
    json result = json::array();
    for (const auto& row : rows) {
        json j;
        for (std::size_t k = 0; k < columns.size(); ++k) j[columns[k]] = row[k];
        result.push_back(j);
    }
    r.json["result"] = result;
    r.tables["sweep.csv"] = t;
    if (c.plot_script && (c.sweep_of == "simulate" || c.sweep_of == "spectrum"))
        r.extras["plot_sweep.py"] =
            plot_script("sweep over xi", "sweep.csv", "xi", {columns[1]}, c.sweep_of == "simulate");
    return r;
}

RunReport run(const RunConfig& c)
{
    validate(c);
    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    if (c.command == "classify")
        r = cmd_classify(c);
    else if (c.command == "resolvent-scan")
        r = cmd_resolvent_scan(c);
    else if (c.command == "spectrum")
        r = cmd_spectrum(c);
    else if (c.command == "carleman-verify")
        r = cmd_carleman(c);
    else if (c.command == "simulate")
        r = cmd_simulate(c);
    else
        r = cmd_sweep(c);
    if (c.wall_clock)
        r.json["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace pwdamp::cli
