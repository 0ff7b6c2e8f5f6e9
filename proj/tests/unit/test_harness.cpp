#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "elliptw/harness.hpp"

using namespace elliptw;
namespace fs = std::filesystem;

namespace {

const char* kMpConfig = R"(
# square MP diagnostic config
model.p = 60
model.n = 60
model.tau = 0.05
spectrum.kind = identity
radial.kind = atoms
radial.atoms = 1.0
campaign.trials = 8
campaign.seed = 7
campaign.k_top = 2
)";

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

TEST_CASE("config parse round trip is identity") {
    ParsedConfig a = parse_config_text(kMpConfig);
    std::string serialized = serialize_config(a);
    ParsedConfig b = parse_config_text(serialized);
    CHECK(a.raw == b.raw);
    CHECK(a.model.p == 60);
    CHECK(a.model.radial.kind == RadialLaw::Kind::empirical);
    CHECK(a.spec.trials == 8);
    CHECK(a.spec.seed_base == 7);
}

TEST_CASE("unknown config keys are rejected with names") {
    try {
        parse_config_text("model.p = 10\nmodel.q = 3\nbogus.key = 1\n");
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("model.q") != std::string::npos);
        CHECK(msg.find("bogus.key") != std::string::npos);
    }
}

TEST_CASE("campaign on the MP config") {
    ParsedConfig cfg = parse_config_text(kMpConfig);
    ExperimentSpec spec = cfg.spec;
    spec.threads = 2;
    CampaignSummary summary = run_campaign(spec);
    CHECK(summary.n_trials == 8);
    CHECK(summary.n_excluded == 0);
    CHECK(summary.gamma0 == doctest::Approx(std::pow(2.0, -4.0 / 3.0)).epsilon(1e-6));
    CHECK(summary.lambda_plus_limiting == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(summary.ks_elliptical >= 0.0);
    CHECK(summary.ks_elliptical <= 1.0);
    CHECK(std::isfinite(summary.mean_stat));
    CHECK(std::isfinite(summary.var_stat));
}

TEST_CASE("single-trial campaign is NaN-free") {
    ParsedConfig cfg = parse_config_text(kMpConfig);
    ExperimentSpec spec = cfg.spec;
    spec.trials = 1;
    CampaignSummary s = run_campaign(spec);
    CHECK(std::isfinite(s.mean_stat));
    CHECK(std::isfinite(s.var_stat));
    CHECK(std::isfinite(s.ks_elliptical));
    CHECK(std::isfinite(s.ks_two_sample));
    std::string j = s.to_json();
    CHECK(j.find("nan") == std::string::npos);
}

TEST_CASE("campaign determinism across thread counts, bit for bit") {
    ParsedConfig cfg = parse_config_text(kMpConfig);
    fs::path dir1 = fs::temp_directory_path() / "elliptw_t1";
    fs::path dir2 = fs::temp_directory_path() / "elliptw_t8";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    ExperimentSpec spec = cfg.spec;
    spec.threads = 1;
    spec.outputs = dir1.string();
    CampaignSummary s1 = run_campaign(spec);
    spec.threads = 2;
    spec.outputs = dir2.string();
    CampaignSummary s2 = run_campaign(spec);

    CHECK(read_file(dir1 / "ledger.csv") == read_file(dir2 / "ledger.csv"));
    CHECK(s1.to_json() == s2.to_json());
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("non-empty output directory requires force") {
    ParsedConfig cfg = parse_config_text(kMpConfig);
    fs::path dir = fs::temp_directory_path() / "elliptw_force";
    fs::remove_all(dir);

    ExperimentSpec spec = cfg.spec;
    spec.trials = 2;
    spec.outputs = dir.string();
    run_campaign(spec);
    CHECK_THROWS_AS(run_campaign(spec), std::runtime_error);
    spec.force = true;
    run_campaign(spec); // appends
    std::string ledger = read_file(dir / "ledger.csv");
    int lines = 0;
    for (char ch : ledger) lines += (ch == '\n');
    CHECK(lines == 1 + 4); // header + 2 trials twice
    fs::remove_all(dir);
}

TEST_CASE("ledger schema") {
    ParsedConfig cfg = parse_config_text(kMpConfig);
    fs::path dir = fs::temp_directory_path() / "elliptw_ledger";
    fs::remove_all(dir);
    ExperimentSpec spec = cfg.spec;
    spec.trials = 3;
    spec.outputs = dir.string();
    run_campaign(spec);
    std::ifstream in(dir / "ledger.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "seed,lambda1_Q,lambda1_QG,lambda_plus,gamma0,rescaled_stat,omega_pass");
    fs::remove_all(dir);
}

TEST_CASE("campaign refuses on a failed regularity check") {
    // the d=0 uniform config has sigma1_gap ~ 0.569; a tau above it makes the
    // regularity precheck fail while the model itself stays valid
    ExperimentSpec spec;
    spec.model.p = spec.model.n = 100;
    spec.model.spectrum = PopulationSpectrum::identity(100);
    spec.model.radial = RadialLaw::parametric(1.0, 0.0);
    spec.model.tau = 0.6;
    spec.trials = 2;
    bool refused = false;
    try {
        run_campaign(spec);
    } catch (const CampaignRefused& e) {
        refused = true;
        CHECK(e.report.sigma1_gap < 0.6);
        CHECK(!e.report.pass);
    }
    CHECK(refused);
}
