#include <doctest.h>

#include <cmath>

#include "elliptw/edge.hpp"
#include "elliptw/ensemble.hpp"
#include "elliptw/rng.hpp"
#include "../support/oracles.hpp"

using namespace elliptw;

namespace {

ModelConfig mp_config(int p, int n) {
    ModelConfig c;
    c.p = p;
    c.n = n;
    c.spectrum = PopulationSpectrum::identity(p);
    c.radial = RadialLaw::point_mass(1.0);
    c.tau = 0.05;
    return c;
}

ModelConfig uniform_config(int p) {
    ModelConfig c;
    c.p = c.n = p;
    c.spectrum = PopulationSpectrum::identity(p);
    c.radial = RadialLaw::parametric(1.0, 0.0);
    c.tau = 0.05;
    return c;
}

} // namespace

TEST_CASE("MP square edge (-0.5, 4.0)") {
    ModelConfig c = mp_config(50, 50);
    EdgeReport r = find_edge(c, SystemMode::limiting);
    CHECK(std::abs(r.x_star + 0.5) < 1e-8);
    CHECK(std::abs(r.edge - 4.0) < 1e-8);
    CHECK(r.x_star > -1.0); // x_star in (-1/l, 0)
    CHECK(r.x_star < 0.0);
    CHECK(!r.multiple_roots);

    // the defining equations hold at the reported point
    RadialLaw delta = RadialLaw::point_mass(1.0);
    CHECK(std::abs(eval_Fpc(c, delta, r.x_star, r.edge)) <= 1e-10);
    CHECK(std::abs(partials_Fpc(c, delta, r.x_star, r.edge).dF_dx) <= 1e-8);
}

TEST_CASE("classical MP edge across aspect ratios") {
    for (double r_aspect : {0.25, 0.5, 2.0}) {
        // phi^{-1} = n/p = r_aspect
        int p = 60;
        int n = static_cast<int>(std::lround(p * r_aspect));
        ModelConfig c = mp_config(p, n);
        EdgeReport rep = find_edge(c, SystemMode::limiting);
        CHECK(std::abs(rep.edge - oracles::mp_edge(r_aspect)) < 1e-8);
    }
}

TEST_CASE("limiting edge reproduced by a large sampled realization") {
    ModelConfig c = uniform_config(200);
    EdgeReport lim = find_edge(c, SystemMode::limiting);

    ModelConfig big = uniform_config(100000);
    std::mt19937_64 rng = make_stream(5, 0);
    Realization r = sample_realization(big, rng);
    EdgeReport emp = find_edge(big, SystemMode::empirical, &r.xi_squared);
    CHECK(std::abs(emp.edge - lim.edge) < 2e-2);
}

TEST_CASE("gamma0 for the MP square case") {
    ModelConfig c = mp_config(40, 40);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    double g0 = gamma0_scale(c, c.radial, rep);
    CHECK(std::abs(g0 - std::pow(2.0, -4.0 / 3.0)) < 1e-6);
    // white-Wishart scaling oracle: (1+sqrt(1))(1+1/sqrt(1))^{1/3} = 2^{4/3}
    CHECK(std::abs(1.0 / g0 - 2.0 * std::cbrt(2.0)) < 1e-5);
    CHECK(g0 > 0.01);
    CHECK(g0 < 100.0);
}

TEST_CASE("gamma0 sanity band for other passing configs") {
    ModelConfig c = uniform_config(80);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    double g0 = gamma0_scale(c, c.radial, rep);
    CHECK(g0 > 0.01);
    CHECK(g0 < 100.0);
    // conditional analogue stays close at large n
    ModelConfig big = uniform_config(100000);
    std::mt19937_64 rng = make_stream(5, 1);
    Realization r = sample_realization(big, rng);
    EdgeReport emp = find_edge(big, SystemMode::empirical, &r.xi_squared);
    double g0_emp = gamma0_empirical(big, r.xi_squared, emp);
    CHECK(std::abs(g0_emp - g0) < 2e-2);
}

TEST_CASE("regularity of the MP square case") {
    ModelConfig c = mp_config(40, 40);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    RegularityReport reg = check_regularity(c, c.radial, rep);
    // m_{2n,c}(4) = -1/2 by symmetry, so the gap is 1/2
    CHECK(std::abs(reg.sigma1_gap - 0.5) < 1e-4);
    CHECK(reg.pass);
    CHECK(reg.condition_case == RegularityReport::Case::d_le_1);
    CHECK(!reg.vartheta.has_value());
}

TEST_CASE("regularity case split for d") {
    ModelConfig c;
    c.p = c.n = 60;
    c.spectrum = PopulationSpectrum::identity(60);
    c.tau = 0.05;

    c.radial = RadialLaw::parametric(1.0, 0.5);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    RegularityReport reg = check_regularity(c, c.radial, rep);
    CHECK(reg.condition_case == RegularityReport::Case::d_le_1);
    CHECK(!reg.vartheta.has_value());

    c.radial = RadialLaw::parametric(1.0, 2.0);
    EdgeReport rep2 = find_edge(c, SystemMode::limiting);
    RegularityReport reg2 = check_regularity(c, c.radial, rep2);
    CHECK(reg2.vartheta.has_value());
}

TEST_CASE("upsilon integrals: closed-form check at d=2, l=1, b=1") {
    ModelConfig c;
    c.p = c.n = 10;
    c.spectrum = PopulationSpectrum::identity(10);
    c.radial = RadialLaw::parametric(1.0, 2.0);
    c.tau = 0.05;
    auto [u1, u2] = upsilon_integrals(c, c.radial);
    // upsilon_2 = phi^{-1} * 3 Int s(1-s) ds = phi^{-1}/2
    CHECK(u2 == doctest::Approx(0.5).epsilon(1e-10));
    // upsilon_1 = phi^{-1} * 3 Int s^2 ds = phi^{-1}
    CHECK(u1 == doctest::Approx(1.0).epsilon(1e-10));
    // divergent below d = 1
    c.radial = RadialLaw::parametric(1.0, 0.5);
    CHECK_THROWS_AS(upsilon_integrals(c, c.radial), std::domain_error);
}

TEST_CASE("gap shrinks as sigma_1 spikes") {
    double prev_gap = 1e9;
    for (double spike : {1.0, 2.0, 4.0}) {
        ModelConfig c;
        c.p = c.n = 100;
        c.spectrum = PopulationSpectrum::two_atom(100, spike, 1.0, 0.02);
        c.radial = RadialLaw::parametric(1.0, 0.0);
        c.tau = 0.01;
        EdgeReport rep = find_edge(c, SystemMode::limiting);
        RegularityReport reg = check_regularity(c, c.radial, rep);
        CHECK(reg.sigma1_gap < prev_gap);
        prev_gap = reg.sigma1_gap;
    }
}

TEST_CASE("gamma0 scaling covariance under Sigma -> c Sigma") {
    ModelConfig base;
    base.p = base.n = 60;
    base.spectrum = PopulationSpectrum::two_atom(60, 1.5, 1.0, 0.5);
    base.radial = RadialLaw::parametric(1.0, 0.0);
    base.tau = 0.01;
    EdgeReport rep0 = find_edge(base, SystemMode::limiting);
    double g0 = gamma0_scale(base, base.radial, rep0);

    for (double cscale : {0.5, 2.0}) {
        ModelConfig scaled = base;
        for (auto& s : scaled.spectrum.sigmas) s *= cscale;
        EdgeReport rep = find_edge(scaled, SystemMode::limiting);
        CHECK(std::abs(rep.edge - cscale * rep0.edge) < 1e-6 * rep0.edge);
        double g = gamma0_scale(scaled, scaled.radial, rep);
        CHECK(std::abs(g - g0 / cscale) < 1e-6 * g0);
    }
}

TEST_CASE("edge/density consistency") {
    ModelConfig c = uniform_config(80);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    DensityCurve above = density(c, SystemMode::limiting, Variant::m,
                                 {rep.edge + 0.05, rep.edge + 0.2, rep.edge + 0.5});
    for (double v : above.values) CHECK(v < 1e-4);
    DensityCurve below = density(c, SystemMode::limiting, Variant::m, {rep.edge - 0.05});
    CHECK(below.values.front() > 1e-3);
    // concavity needed for a positive gamma0
    CHECK(partials_Fpc(c, c.radial, rep.x_star, rep.edge).d2F_dx2 < 0.0);
    CHECK(partials_Fpc(c, c.radial, rep.x_star, rep.edge).dF_dy > 0.0);
}

TEST_CASE("sqrt edge fit: MP square case") {
    ModelConfig c = mp_config(64, 64);
    SqrtFitResult fit = sqrt_edge_fit(c, SystemMode::limiting);
    CHECK(std::abs(fit.density_slope - 0.5) < 0.02);
    CHECK(std::abs(fit.m_increment_slope - 0.5) < 0.05);
}

TEST_CASE("sqrt edge fit: d=0 uniform law and variant agreement") {
    ModelConfig c = uniform_config(64);
    SqrtFitResult fit_m = sqrt_edge_fit(c, SystemMode::limiting, nullptr, Variant::m);
    CHECK(std::abs(fit_m.density_slope - 0.5) < 0.05);
    SqrtFitResult fit_m1 = sqrt_edge_fit(c, SystemMode::limiting, nullptr, Variant::m1);
    CHECK(std::abs(fit_m1.density_slope - fit_m.density_slope) < 0.02);
}

TEST_CASE("stieltjes bound diagnostics near the edge") {
    ModelConfig c = mp_config(48, 48);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    std::vector<Complex> grid = {
        {4.0, 0.01}, {rep.edge - 0.1, 1e-4}, {rep.edge + 0.2, 1e-3}, {2.0, 0.05}};
    auto rows = check_stieltjes_bounds(c, c.radial, rep, grid);
    for (const auto& row : rows) {
        CHECK(row.regime_ratio > 1.0 / 50.0);
        CHECK(row.regime_ratio < 50.0);
        CHECK(row.min_sigma_denom >= 1e-3);
        CHECK(row.min_xi_denom >= 1e-3);
        CHECK(!row.flagged);
        CHECK(row.abs_m < 10.0); // |m| ~ 1 on D_0
        CHECK(row.abs_m > 0.01);
    }
}

TEST_CASE("edge report serializes to flat json") {
    ModelConfig c = mp_config(16, 16);
    EdgeReport rep = find_edge(c, SystemMode::limiting);
    rep.gamma0 = gamma0_scale(c, c.radial, rep);
    rep.regularity = check_regularity(c, c.radial, rep);
    std::string j = rep.to_json();
    CHECK(j.find("\"x_star\"") != std::string::npos);
    CHECK(j.find("\"edge\"") != std::string::npos);
    CHECK(j.find("\"gamma0\"") != std::string::npos);
    CHECK(j.find("\"sigma1_gap\"") != std::string::npos);
    CHECK(j.find("\"case\"") != std::string::npos);
}
