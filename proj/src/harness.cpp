#include "elliptw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "elliptw/tracy_widom.hpp"

namespace elliptw {

namespace fs = std::filesystem;

std::string CampaignSummary::to_json() const {
    nlohmann::json j;
    j["n_trials"] = n_trials;
    j["n_excluded"] = n_excluded;
    j["ks_elliptical"] = ks_elliptical;
    j["ks_gaussian"] = ks_gaussian;
    j["ks_two_sample"] = ks_two_sample;
    j["mean_stat"] = mean_stat;
    j["var_stat"] = var_stat;
    j["gamma0"] = gamma0;
    j["lambda_plus_limiting"] = lambda_plus_limiting;
    j["omega_pass_rate"] = omega_pass_rate;
    j["flagged"] = flagged;
    return j.dump(2);
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

CampaignSummary run_campaign(const ExperimentSpec& spec, std::vector<TrialRecord>* records_out) {
    auto violations = validate(spec.model);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "invalid model config:";
        for (const auto& v : violations) msg << "\n  - " << v;
        throw std::invalid_argument(msg.str());
    }
    if (spec.trials < 1) throw std::invalid_argument("campaign: trials must be >= 1");

    EdgeReport limiting = find_edge(spec.model, SystemMode::limiting);
    RegularityReport reg = check_regularity(spec.model, spec.model.radial, limiting);
    if (!reg.pass) {
        std::ostringstream msg;
        msg << "campaign refused: regularity check failed (sigma1_gap=" << reg.sigma1_gap
            << ", threshold=" << reg.tau_threshold << ", case="
            << RegularityReport::case_name(reg.condition_case) << ")";
        throw CampaignRefused(msg.str(), reg);
    }
    limiting.regularity = reg;
    double g0 = gamma0_scale(spec.model, spec.model.radial, limiting);

    TW1Table table = build_table();

    TrialOptions trial_opts;
    trial_opts.k_top = spec.k_top;
    trial_opts.elliptical = spec.elliptical;
    trial_opts.gaussian = spec.gaussian;
    if (spec.omega_per_trial) trial_opts.omega_grid = default_omega_grid(spec.model, limiting.edge);

    std::vector<TrialRecord> records(spec.trials);
    parallel_for(spec.trials, spec.threads, [&](int i) {
        records[i] = run_trial(spec.model, g0, spec.seed_base, static_cast<std::uint64_t>(i), trial_opts);
    });

    CampaignSummary summary;
    summary.n_trials = spec.trials;
    summary.gamma0 = g0;
    summary.lambda_plus_limiting = limiting.edge;

    std::vector<double> stats_ell, stats_gau;
    int omega_passes = 0;
    for (const auto& r : records) {
        if (r.edge_failed) {
            ++summary.n_excluded;
            continue;
        }
        if (spec.elliptical) stats_ell.push_back(r.rescaled_stat);
        if (spec.gaussian) stats_gau.push_back(r.rescaled_stat_gaussian);
        if (r.omega_pass) ++omega_passes;
    }
    int kept = spec.trials - summary.n_excluded;
    summary.omega_pass_rate = kept > 0 ? static_cast<double>(omega_passes) / kept : 0.0;
    summary.flagged = summary.n_excluded > 0.05 * spec.trials;

    const std::vector<double>& primary = spec.elliptical ? stats_ell : stats_gau;
    if (!primary.empty()) {
        double m = 0.0;
        for (double x : primary) m += x;
        m /= primary.size();
        double v = 0.0;
        for (double x : primary) v += (x - m) * (x - m);
        summary.mean_stat = m;
        summary.var_stat = primary.size() > 1 ? v / (primary.size() - 1.0) : 0.0;
    }
    if (!stats_ell.empty()) summary.ks_elliptical = ks_distance(stats_ell, table);
    if (!stats_gau.empty()) summary.ks_gaussian = ks_distance(stats_gau, table);
    if (!stats_ell.empty() && !stats_gau.empty())
        summary.ks_two_sample = ks_two_sample(stats_ell, stats_gau);

    if (!spec.outputs.empty()) {
        fs::path dir(spec.outputs);
        fs::create_directories(dir);
        fs::path ledger = dir / "ledger.csv";
        if (fs::exists(ledger) && !spec.force)
            throw std::runtime_error("output directory already holds a ledger; pass --force to append: " +
                                     ledger.string());
        write_ledger(ledger.string(), records, g0);
        std::ofstream out(dir / "summary.json");
        out << summary.to_json() << "\n";
    }
    if (records_out) *records_out = std::move(records);
    return summary;
}

void write_ledger(const std::string& path, const std::vector<TrialRecord>& records, double gamma0) {
    bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open ledger " + path);
    if (fresh) out << "seed,lambda1_Q,lambda1_QG,lambda_plus,gamma0,rescaled_stat,omega_pass\n";
    char buf[512];
    for (const auto& r : records) {
        double l1q = r.top_eigs_Q.empty() ? std::nan("") : r.top_eigs_Q.front();
        double l1g = r.top_eigs_QG.empty() ? std::nan("") : r.top_eigs_QG.front();
        std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                      static_cast<unsigned long long>(r.seed), l1q, l1g, r.lambda_plus, gamma0,
                      r.rescaled_stat, r.omega_pass ? 1 : 0);
        out << buf;
    }
}

namespace {

const std::set<std::string> kKnownKeys = {
    "model.p", "model.n", "model.tau",
    "spectrum.kind", "spectrum.sigma_a", "spectrum.sigma_b", "spectrum.weight", "spectrum.file",
    "radial.kind", "radial.l", "radial.d", "radial.b", "radial.atoms", "radial.weights",
    "campaign.trials", "campaign.k_top", "campaign.seed", "campaign.ensembles",
    "campaign.out", "campaign.checks", "campaign.threads", "campaign.tol",
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

} // namespace

ParsedConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> unknown;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!kKnownKeys.count(key)) unknown.push_back(key);
        kv[key] = value;
    }
    if (!unknown.empty()) {
        std::ostringstream msg;
        msg << "unknown config keys:";
        for (const auto& k : unknown) msg << " " << k;
        throw std::invalid_argument(msg.str());
    }

    ParsedConfig out;
    out.raw = kv;
    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };

    out.model.p = std::stoi(get("model.p", "100"));
    out.model.n = std::stoi(get("model.n", "100"));
    out.model.tau = std::stod(get("model.tau", "0.05"));

    std::string spectrum_kind = get("spectrum.kind", "identity");
    if (spectrum_kind == "identity") {
        out.model.spectrum = PopulationSpectrum::identity(out.model.p);
    } else if (spectrum_kind == "two_atom") {
        out.model.spectrum = PopulationSpectrum::two_atom(
            out.model.p, std::stod(get("spectrum.sigma_a", "1")), std::stod(get("spectrum.sigma_b", "1")),
            std::stod(get("spectrum.weight", "0.5")));
    } else if (spectrum_kind == "file") {
        out.model.spectrum = PopulationSpectrum::from_file(out.model.p, get("spectrum.file", ""));
    } else {
        throw std::invalid_argument("spectrum.kind must be identity, two_atom or file");
    }

    std::string radial_kind = get("radial.kind", "parametric");
    if (radial_kind == "parametric") {
        out.model.radial = RadialLaw::parametric(std::stod(get("radial.l", "1")),
                                                 std::stod(get("radial.d", "0")),
                                                 std::stod(get("radial.b", "1")));
    } else if (radial_kind == "atoms") {
        out.model.radial = RadialLaw::empirical(parse_list(get("radial.atoms", "1")),
                                                parse_list(get("radial.weights", "")));
    } else {
        throw std::invalid_argument("radial.kind must be parametric or atoms");
    }

    out.spec.model = out.model;
    out.spec.trials = std::stoi(get("campaign.trials", "100"));
    out.spec.k_top = std::stoi(get("campaign.k_top", "3"));
    out.spec.seed_base = std::stoull(get("campaign.seed", "1"));
    out.spec.threads = std::stoi(get("campaign.threads", "0"));
    out.spec.tol = std::stod(get("campaign.tol", "1e-12"));
    out.spec.outputs = get("campaign.out", "");
    std::string ensembles = get("campaign.ensembles", "elliptical,gaussian");
    out.spec.elliptical = ensembles.find("elliptical") != std::string::npos;
    out.spec.gaussian = ensembles.find("gaussian") != std::string::npos;
    std::string checks = get("campaign.checks", "edge,tw");
    out.spec.checks.clear();
    std::istringstream cs(checks);
    std::string item;
    while (std::getline(cs, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.spec.checks.insert(item);
    }
    return out;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::string serialize_config(const ParsedConfig& config) {
    std::ostringstream out;
    for (const auto& [key, value] : config.raw) out << key << " = " << value << "\n";
    return out.str();
}

} // namespace elliptw
