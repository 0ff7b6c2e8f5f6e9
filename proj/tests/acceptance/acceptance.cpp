// Acceptance suite: one criterion per invocation (1..10), or "all".
// Prints one [PASS]/[FAIL] line per criterion; exit 0 iff everything
// requested passed.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "elliptw/harness.hpp"
#include "elliptw/locallaw.hpp"
#include "elliptw/rng.hpp"
#include "elliptw/tracy_widom.hpp"
#include "../support/oracles.hpp"

using namespace elliptw;
namespace fs = std::filesystem;

namespace {

int g_threads = 2;

void parallel_for(int n, const std::function<void(int)>& body) {
    int threads = std::max(1, std::min(g_threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

bool report(int criterion, bool pass, const std::string& detail, double seconds) {
    std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), seconds);
    std::fflush(stdout);
    return pass;
}

ModelConfig mp_config(int p, int n) {
    ModelConfig c;
    c.p = p;
    c.n = n;
    c.spectrum = PopulationSpectrum::identity(p);
    c.radial = RadialLaw::point_mass(1.0);
    c.tau = 0.05;
    return c;
}

ModelConfig uniform_config(int p, int n) {
    ModelConfig c;
    c.p = p;
    c.n = n;
    c.spectrum = PopulationSpectrum::identity(p);
    c.radial = RadialLaw::parametric(1.0, 0.0);
    c.tau = 0.05;
    return c;
}

ModelConfig two_atom_config(int p, int n) {
    ModelConfig c;
    c.p = p;
    c.n = n;
    c.spectrum = PopulationSpectrum::two_atom(p, 2.0, 1.0, 0.5);
    c.radial = RadialLaw::parametric(1.0, 1.0);
    c.tau = 0.05;
    return c;
}

// --------------------------------------------------------------------- 1
bool criterion_1() {
    Timer timer;
    ModelConfig c = mp_config(400, 400);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    double g0 = gamma0_scale(c, c.radial, rep);
    double want_g0 = std::pow(2.0, -4.0 / 3.0);
    bool pass = std::abs(rep.x_star + 0.5) <= 1e-8 && std::abs(rep.edge - 4.0) <= 1e-8 &&
                std::abs(g0 - want_g0) <= 1e-6 && timer.seconds() < 1.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "MP oracle x*=-0.5%+.2e, edge=4%+.2e, gamma0=2^{-4/3}%+.2e",
                  rep.x_star + 0.5, rep.edge - 4.0, g0 - want_g0);
    return report(1, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 2
bool criterion_2() {
    Timer timer;
    ModelConfig c = mp_config(64, 64);
    std::vector<double> grid;
    for (int k = 0; k < 400; ++k) grid.push_back(0.05 + (3.95 - 0.05) * k / 399.0);
    DensityCurve curve = density(c, SystemMode::limiting, Variant::m, grid);
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        max_err = std::max(max_err, std::abs(curve.values[i] - oracles::mp_square_density(grid[i])));

    auto mass_grid = support_grid(4.0, 4001);
    mass_grid.erase(mass_grid.begin());
    DensityCurve full = density(c, SystemMode::limiting, Variant::m, mass_grid, 1e-2);
    double mass_err = std::abs(full.trapezoid_mass() - 1.0);

    bool pass = max_err <= 1e-3 && mass_err <= 1e-3 && timer.seconds() < 30.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "MP density max|err|=%.2e (<=1e-3), |mass-1|=%.2e (<=1e-3)",
                  max_err, mass_err);
    return report(2, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 3
bool criterion_3() {
    Timer timer;
    struct Case {
        const char* name;
        ModelConfig config;
    };
    std::vector<Case> cases = {
        {"MP", mp_config(64, 64)},
        {"d0-uniform", uniform_config(64, 64)},
        {"two-atom-d1", two_atom_config(64, 64)},
    };
    bool pass = true;
    std::string detail = "sqrt-edge slopes:";
    for (auto& [name, config] : cases) {
        EdgeReport rep = find_edge(config, SystemMode::limiting);
        RegularityReport reg = check_regularity(config, config.radial, rep);
        SqrtFitResult fit = sqrt_edge_fit(config, SystemMode::limiting);
        bool ok = std::abs(fit.density_slope - 0.5) <= 0.05 && reg.pass;
        pass &= ok;
        char buf[128];
        std::snprintf(buf, sizeof(buf), " %s=%.3f%s", name, fit.density_slope,
                      reg.pass ? "" : "(regularity fail)");
        detail += buf;
    }
    pass &= timer.seconds() < 360.0;
    return report(3, pass, detail, timer.seconds());
}

// --------------------------------------------------------------------- 4
bool criterion_4() {
    Timer timer;
    TW1Table table = build_table();
    double table_seconds = timer.seconds();

    double max_resid = 0.0;
    for (std::size_t i = 1; i + 1 < table.s_grid.size(); ++i) {
        double s = table.s_grid[i];
        if (s < -8.0 || s > 4.0) continue;
        double q = table.q_values[i];
        double r = (table.q_values[i + 1] - 2.0 * q + table.q_values[i - 1]) / (table.step * table.step) -
                   s * q - 2.0 * q * q * q;
        max_resid = std::max(max_resid, std::abs(r));
    }
    double mean = table.mean();

    // independent GOE Monte-Carlo oracle: n^{2/3}(mu_1 - 2), 1000 x 1000
    const int n_goe = 1000, trials = 5000;
    std::vector<double> stats(trials);
    parallel_for(trials, [&](int t) {
        std::mt19937_64 rng = make_stream(0x60E, static_cast<std::uint64_t>(t));
        Eigen::MatrixXd A = oracles::sample_goe(n_goe, rng);
        double top = oracles::lanczos_top_eigenvalue(A, rng);
        stats[t] = std::pow(static_cast<double>(n_goe), 2.0 / 3.0) * (top - 2.0);
    });
    double mc_mean = oracles::mean(stats);
    double mc_se = std::sqrt(oracles::variance(stats) / trials);

    bool pass = max_resid <= 1e-6 && std::abs(mean - (-1.2065)) <= 0.002 &&
                std::abs(mc_mean - mean) <= 3.0 * mc_se && table_seconds < 5.0 &&
                timer.seconds() < 600.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "residual=%.2e, table mean=%.5f, GOE mean=%.4f+-%.4f (|diff|=%.4f<=%.4f)",
                  max_resid, mean, mc_mean, mc_se, std::abs(mc_mean - mean), 3.0 * mc_se);
    return report(4, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 5
bool criterion_5() {
    Timer timer;
    ExperimentSpec spec;
    spec.model = uniform_config(400, 400);
    spec.trials = 2000;
    spec.seed_base = 7;
    spec.elliptical = true;
    spec.gaussian = false;
    spec.threads = g_threads;
    spec.omega_per_trial = false;
    CampaignSummary summary = run_campaign(spec);
    bool pass = summary.ks_elliptical <= 0.05 && summary.n_excluded <= 0.05 * spec.trials &&
                timer.seconds() < 1200.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "d=0 config, p=n=400, %d trials: KS(elliptical,F1)=%.4f (<=0.05), mean=%.3f, "
                  "excluded=%d",
                  spec.trials, summary.ks_elliptical, summary.mean_stat, summary.n_excluded);
    return report(5, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 6
bool criterion_6() {
    Timer timer;
    ExperimentSpec spec;
    spec.model = uniform_config(400, 400);
    spec.trials = 2000;
    spec.seed_base = 7;
    spec.elliptical = true;
    spec.gaussian = true;
    spec.threads = g_threads;
    spec.omega_per_trial = false;
    CampaignSummary summary = run_campaign(spec);

    // paired Green-function comparison, F(x) = x, 500 pairs
    ModelConfig model = spec.model;
    std::mt19937_64 rng = make_stream(61, 0);
    Realization r = sample_realization(model, rng);
    EdgeReport emp = find_edge(model, SystemMode::empirical, &r.xi_squared);
    double window = std::pow(static_cast<double>(model.n), -2.0 / 3.0 + 0.1);
    std::vector<double> E_grid = {emp.edge - 0.5 * window, emp.edge, emp.edge + 0.5 * window};
    auto rows = compare_ensembles_greenfn(model, r.xi_squared, [](double x) { return x; }, E_grid,
                                          emp.edge, 500, rng);
    bool paired_ok = true;
    double worst = 0.0;
    for (const auto& row : rows) {
        worst = std::max(worst, std::abs(row.diff) / row.se);
        paired_ok &= std::abs(row.diff) <= 3.0 * row.se;
    }

    bool pass = summary.ks_two_sample <= 0.05 && paired_ok && timer.seconds() < 1500.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "two-sample KS=%.4f (<=0.05), paired Green diffs worst |diff|/SE=%.2f (<=3)",
                  summary.ks_two_sample, worst);
    return report(6, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 7
bool criterion_7() {
    Timer timer;
    ModelConfig c = uniform_config(500, 500);
    EdgeReport lim = find_edge(c, SystemMode::limiting);
    const double n = c.n;
    std::vector<Complex> grid = {
        {lim.edge, std::pow(n, -0.5)},
        {lim.edge, std::pow(n, -2.0 / 3.0 + 0.1)},
        {lim.edge + std::pow(n, -2.0 / 3.0 + 0.2), std::pow(n, -2.0 / 3.0 + 0.1)},
        {lim.edge - 0.3, 0.5},
    };
    const int seeds = 50;
    std::atomic<int> ent_pass{0}, ent_total{0}, avg_pass{0}, avg_total{0};
    std::mutex mu;
    double worst_ward = 0.0;
    parallel_for(seeds, [&](int s) {
        std::mt19937_64 rng = make_stream(0x77, static_cast<std::uint64_t>(s));
        Realization r = sample_realization(c, rng);
        Eigen::MatrixXd W = sample_W(c, rng, false);
        double local_ward = 0.0;
        for (Complex z : grid) {
            ResolventPair pair = resolvent_pair(c, r.xi_squared, W, z);
            WardCheck ward = ward_check(c, pair);
            local_ward = std::max({local_ward, ward.row_identity_G, ward.row_identity_calG});
        }
        auto ent = verify_entrywise(c, r.xi_squared, W, grid);
        for (const auto& row : ent) {
            ++ent_total;
            ent_pass += !row.flagged;
        }
        auto avg = verify_averaged(c, r.xi_squared, W, grid, lim.edge);
        for (const auto& row : avg) {
            ++avg_total;
            avg_pass += !row.flagged;
        }
        std::lock_guard<std::mutex> lock(mu);
        worst_ward = std::max(worst_ward, local_ward);
    });
    double ent_freq = static_cast<double>(ent_pass) / ent_total;
    double avg_freq = static_cast<double>(avg_pass) / avg_total;
    bool pass = ent_freq >= 0.95 && avg_freq >= 0.95 && worst_ward <= 1e-10 &&
                timer.seconds() < 900.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "entrywise pass-freq=%.2f, averaged pass-freq=%.2f (>=0.95), ward max=%.1e "
                  "(<=1e-10)",
                  ent_freq, avg_freq, worst_ward);
    return report(7, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 8
bool criterion_8() {
    Timer timer;
    const int seeds = 400;
    std::vector<int> ns = {500, 2000, 8000};
    std::vector<double> rates;
    for (int n : ns) {
        ModelConfig c = uniform_config(n, n);
        EdgeReport lim = find_edge(c, SystemMode::limiting);
        auto grid = default_omega_grid(c, lim.edge);
        std::atomic<int> passes{0};
        parallel_for(seeds, [&](int s) {
            std::mt19937_64 rng = make_stream(0x03E6A, static_cast<std::uint64_t>(s));
            Realization r = sample_realization(c, rng);
            OmegaReport rep = check_omega(c, r, grid);
            if (rep.gap1_pass && rep.spacing_pass && rep.lln_pass) ++passes;
        });
        rates.push_back(static_cast<double>(passes) / seeds);
    }
    bool pass = rates[0] < rates[1] && rates[1] < rates[2] && timer.seconds() < 600.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "omega pass rate %.3f (n=500) < %.3f (n=2000) < %.3f (n=8000)",
                  rates[0], rates[1], rates[2]);
    return report(8, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 9
bool criterion_9() {
    Timer timer;
    const int p = 50, draws = 100000;
    std::mt19937_64 rng = make_stream(9, 0);
    double s2 = 0.0, s4 = 0.0, s22 = 0.0, s_odd = 0.0;
    for (int k = 0; k < draws; ++k) {
        Eigen::VectorXd u = sample_sphere(p, rng);
        s2 += u(0) * u(0);
        s4 += std::pow(u(0), 4.0);
        s22 += u(0) * u(0) * u(1) * u(1);
        s_odd += u(0) * u(1) * u(1);
    }
    s2 /= draws;
    s4 /= draws;
    s22 /= draws;
    s_odd /= draws;
    const double m2 = 1.0 / p, m4 = 3.0 / (p * (2.0 + p)), m22 = 1.0 / (p * (2.0 + p));
    auto se = [&](double second) { return std::sqrt(second / draws); };
    double se2 = se(m4), se4 = se(105.0 / std::pow(p, 4.0)), se22 = se(9.0 / std::pow(p, 4.0));
    double seodd = se(m4 * 3.0 * m2);
    bool pass = std::abs(s2 - m2) <= 4 * se2 && std::abs(s4 - m4) <= 4 * se4 &&
                std::abs(s22 - m22) <= 4 * se22 && std::abs(s_odd) <= 4 * seodd &&
                timer.seconds() < 60.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "sphere moments z-scores: u^2 %.2f, u^4 %.2f, u^2u^2 %.2f, odd %.2f (all <=4)",
                  std::abs(s2 - m2) / se2, std::abs(s4 - m4) / se4, std::abs(s22 - m22) / se22,
                  std::abs(s_odd) / seodd);
    return report(9, pass, buf, timer.seconds());
}

// --------------------------------------------------------------------- 10
bool criterion_10() {
    Timer timer;
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    };
    ExperimentSpec spec;
    spec.model = mp_config(200, 200);
    spec.trials = 40;
    spec.seed_base = 42;
    fs::path base = fs::temp_directory_path() / "elliptw_acceptance_det";
    fs::remove_all(base);

    std::vector<std::string> ledgers, summaries;
    for (int threads : {1, 2, 2}) { // third run repeats the seed
        fs::path dir = base / ("t" + std::to_string(ledgers.size()));
        spec.threads = threads;
        spec.outputs = dir.string();
        CampaignSummary s = run_campaign(spec);
        ledgers.push_back(read_file(dir / "ledger.csv"));
        summaries.push_back(s.to_json());
    }
    bool pass = ledgers[0] == ledgers[1] && ledgers[1] == ledgers[2] &&
                summaries[0] == summaries[1] && summaries[1] == summaries[2] &&
                !ledgers[0].empty() && timer.seconds() < 600.0;
    fs::remove_all(base);
    return report(10, pass, "ledger and summary bit-identical across thread counts and reruns",
                  timer.seconds());
}

} // namespace

int main(int argc, char** argv) {
    g_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ELLIPTW_THREADS")) g_threads = std::atoi(env);

    using Criterion = bool (*)();
    Criterion criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

    if (argc > 1 && std::strcmp(argv[1], "all") != 0) {
        int k = std::atoi(argv[1]);
        if (k < 1 || k > 10) {
            std::fprintf(stderr, "usage: %s [1..10|all]\n", argv[0]);
            return 2;
        }
        return criteria[k - 1]() ? 0 : 1;
    }
    bool all = true;
    for (int k = 0; k < 10; ++k) all &= criteria[k]();
    return all ? 0 : 1;
}
