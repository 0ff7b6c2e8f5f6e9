#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "elliptw/harness.hpp"
#include "elliptw/locallaw.hpp"
#include "elliptw/rng.hpp"
#include "elliptw/tracy_widom.hpp"

using namespace elliptw;
namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 0;
    double tol = 1e-12;
    bool force = false;
};

ParsedConfig load_config(const GlobalArgs& g) {
    if (g.config_path.empty()) throw CLI::ValidationError("--config is required for this subcommand");
    ParsedConfig cfg = parse_config_file(g.config_path);
    if (g.seed_set) cfg.spec.seed_base = g.seed;
    if (!g.out_dir.empty()) cfg.spec.outputs = g.out_dir;
    if (g.threads > 0) cfg.spec.threads = g.threads;
    cfg.spec.tol = g.tol;
    cfg.spec.force = g.force;
    return cfg;
}

fs::path out_path(const GlobalArgs& g, const std::string& name) {
    if (g.out_dir.empty()) return fs::path(name);
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

int cmd_edge(const GlobalArgs& g, bool with_fit) {
    ParsedConfig cfg = load_config(g);
    EdgeReport report = find_edge(cfg.model, SystemMode::limiting);
    report.regularity = check_regularity(cfg.model, cfg.model.radial, report);
    if (report.regularity->pass)
        report.gamma0 = gamma0_scale(cfg.model, cfg.model.radial, report);
    if (with_fit)
        report.sqrt_fit_exponent = sqrt_edge_fit(cfg.model, SystemMode::limiting).density_slope;
    std::cout << report.to_json() << "\n";
    return report.regularity->pass ? 0 : 1;
}

int cmd_density(const GlobalArgs& g, int points, double eta_scale) {
    ParsedConfig cfg = load_config(g);
    EdgeReport report = find_edge(cfg.model, SystemMode::limiting);
    auto grid = support_grid(report.edge * 1.05, points);
    grid.erase(grid.begin());
    DensityCurve curve = density(cfg.model, SystemMode::limiting, Variant::m, grid, eta_scale);
    fs::path path = out_path(g, "density.csv");
    curve.write_csv(path.string());
    std::fprintf(stderr, "edge=%.12g mass=%.6f -> %s\n", report.edge, curve.trapezoid_mass(),
                 path.string().c_str());
    return 0;
}

int cmd_tw_table(const GlobalArgs& g, const std::string& out_csv) {
    TW1Table table = build_table();
    std::string path = out_csv.empty() ? out_path(g, "tw1.csv").string() : out_csv;
    table.write_csv(path);
    std::fprintf(stderr, "TW1 table: %zu rows, mean=%.6f -> %s\n", table.s_grid.size(),
                 table.mean(), path.c_str());
    return 0;
}

int cmd_campaign(const GlobalArgs& g, int trials_override) {
    ParsedConfig cfg = load_config(g);
    if (trials_override > 0) cfg.spec.trials = trials_override;
    CampaignSummary summary = run_campaign(cfg.spec);
    std::cout << summary.to_json() << "\n";
    bool pass = !summary.flagged;
    if (cfg.spec.checks.count("tw")) pass = pass && summary.ks_elliptical <= 0.05;
    if (cfg.spec.checks.count("comparison")) pass = pass && summary.ks_two_sample <= 0.05;
    return pass ? 0 : 1;
}

int cmd_locallaw(const GlobalArgs& g, int seeds) {
    ParsedConfig cfg = load_config(g);
    const ModelConfig& model = cfg.model;
    EdgeReport lim = find_edge(model, SystemMode::limiting);
    const double n = model.n;
    std::vector<Complex> grid = {
        {lim.edge, std::pow(n, -0.5)},
        {lim.edge, std::pow(n, -2.0 / 3.0 + 0.1)},
        {lim.edge + std::pow(n, -2.0 / 3.0 + 0.2), std::pow(n, -2.0 / 3.0 + 0.1)},
        {lim.edge - 0.3, 0.5},
    };

    fs::path path = out_path(g, "locallaw.csv");
    std::ofstream csv(path);
    csv << "seed,z_re,z_im,statistic,bound,ratio,pass\n";
    csv.precision(17);
    int rows_total = 0, rows_pass = 0;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng = make_stream(cfg.spec.seed_base, s);
        Realization r = sample_realization(model, rng);
        Eigen::MatrixXd W = sample_W(model, rng, false);
        auto ent = verify_entrywise(model, r.xi_squared, W, grid);
        for (const auto& row : ent) {
            csv << s << ',' << row.z.real() << ',' << row.z.imag() << ',' << row.max_err << ','
                << row.bound << ',' << row.ratio << ',' << (row.flagged ? 0 : 1) << '\n';
            ++rows_total;
            rows_pass += !row.flagged;
        }
        auto avg = verify_averaged(model, r.xi_squared, W, grid, lim.edge);
        for (const auto& row : avg) {
            csv << s << ',' << row.z.real() << ',' << row.z.imag() << ',' << row.err << ','
                << row.bound_peta << ',' << row.ratio_peta << ',' << (row.flagged ? 0 : 1) << '\n';
            ++rows_total;
            rows_pass += !row.flagged;
        }
    }
    std::fprintf(stderr, "local law: %d/%d rows within the n^0.1 slack -> %s\n", rows_pass,
                 rows_total, path.string().c_str());
    return rows_pass == rows_total ? 0 : 1;
}

int cmd_omega(const GlobalArgs& g, const std::vector<int>& n_list, int seeds) {
    ParsedConfig cfg = load_config(g);
    fs::path path = out_path(g, "omega.csv");
    std::ofstream csv(path);
    csv << "n,seeds,gap1_rate,spacing_rate,lln_rate,omega_rate\n";
    double prev_rate = -1.0;
    bool monotone = true;
    for (int n : n_list) {
        ModelConfig model = cfg.model;
        model.n = n;
        model.p = static_cast<int>(std::lround(n * cfg.model.phi()));
        model.spectrum = PopulationSpectrum::identity(model.p);
        EdgeReport lim = find_edge(model, SystemMode::limiting);
        auto grid = default_omega_grid(model, lim.edge);
        int g1 = 0, sp = 0, ll = 0, all = 0;
        for (int s = 0; s < seeds; ++s) {
            std::mt19937_64 rng = make_stream(cfg.spec.seed_base, s);
            Realization r = sample_realization(model, rng);
            OmegaReport rep = check_omega(model, r, grid);
            g1 += rep.gap1_pass;
            sp += rep.spacing_pass;
            ll += rep.lln_pass;
            all += rep.gap1_pass && rep.spacing_pass && rep.lln_pass;
        }
        double rate = static_cast<double>(all) / seeds;
        csv << n << ',' << seeds << ',' << static_cast<double>(g1) / seeds << ','
            << static_cast<double>(sp) / seeds << ',' << static_cast<double>(ll) / seeds << ','
            << rate << '\n';
        std::fprintf(stderr, "n=%6d omega rate %.3f\n", n, rate);
        if (rate < prev_rate) monotone = false;
        prev_rate = rate;
    }
    std::fprintf(stderr, "-> %s\n", path.string().c_str());
    return monotone ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"limiting spectra and edge statistics of elliptical sample covariance matrices"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "key-value config file");
    auto* seed_opt = app.add_option("--seed", g.seed, "campaign seed base");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
    app.add_option("--tol", g.tol, "solver tolerance");
    app.add_flag("--force", g.force, "allow appending to non-empty output directories");

    auto* edge = app.add_subcommand("edge", "print the limiting EdgeReport as JSON");
    bool with_fit = false;
    edge->add_flag("--fit", with_fit, "include the sqrt edge-fit exponent");

    auto* dens = app.add_subcommand("density", "emit the limiting density as CSV");
    int points = 2001;
    double eta_scale = 1e-2;
    dens->add_option("--points", points, "grid points");
    dens->add_option("--eta-scale", eta_scale, "eta ladder scale");

    auto* twt = app.add_subcommand("tw-table", "build and export the TW1 table");
    std::string tw_out;
    twt->add_option("--csv", tw_out, "output csv path");

    auto* camp = app.add_subcommand("campaign", "run a Monte-Carlo campaign");
    int trials_override = 0;
    camp->add_option("--trials", trials_override, "override campaign.trials");

    auto* llaw = app.add_subcommand("locallaw", "run the local-law verification grids");
    int ll_seeds = 10;
    llaw->add_option("--seeds", ll_seeds, "number of seeds");

    auto* om = app.add_subcommand("omega", "high-probability event frequency study");
    std::vector<int> n_list = {500, 2000, 8000};
    int om_seeds = 100;
    om->add_option("--n-list", n_list, "sample sizes");
    om->add_option("--seeds", om_seeds, "seeds per sample size");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (*edge) return cmd_edge(g, with_fit);
        if (*dens) return cmd_density(g, points, eta_scale);
        if (*twt) return cmd_tw_table(g, tw_out);
        if (*camp) return cmd_campaign(g, trials_override);
        if (*llaw) return cmd_locallaw(g, ll_seeds);
        if (*om) return cmd_omega(g, n_list, om_seeds);
    } catch (const CampaignRefused& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
