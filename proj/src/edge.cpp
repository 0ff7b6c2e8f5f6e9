#include "elliptw/edge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace elliptw {

namespace {

/// F(x, .) and dF/dx(x, .) with the radial moments frozen at one x.
struct XSlice {
    const StieltjesSystem& system;
    double x;
    double gx, gpx;

    XSlice(const StieltjesSystem& sys, double x_)
        : system(sys), x(x_), gx(sys.moments().g(x_)), gpx(sys.moments().g_prime(x_)) {}

    double F(double y) const {
        const auto& sv = system.sigma_values();
        const auto& sw = system.sigma_masses();
        double acc = 0.0;
        for (std::size_t i = 0; i < sv.size(); ++i) acc += sw[i] * sv[i] / (-y + sv[i] * gx);
        return acc - x;
    }
    double Fx(double y) const {
        const auto& sv = system.sigma_values();
        const auto& sw = system.sigma_masses();
        double acc = 0.0;
        for (std::size_t i = 0; i < sv.size(); ++i) {
            double den = -y + sv[i] * gx;
            acc += sw[i] * sv[i] * sv[i] / (den * den);
        }
        return -gpx * acc - 1.0;
    }
};

/// Root of F(x, y) = 0 on the branch y > sigma_1 g(x) where F is increasing
/// in y from -inf to -x. Returns nan when the branch exceeds y_max.
double solve_y(const XSlice& slice, double y_max) {
    double lo = slice.system.sigma_max() * slice.gx;
    lo += std::abs(lo) * 1e-13;
    if (!(lo < y_max) || !(slice.F(y_max) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    double hi = y_max;
    for (int k = 0; k < 110; ++k) {
        double mid = 0.5 * (lo + hi);
        if (slice.F(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double default_y_max(const StieltjesSystem& system, double phi, double y_max_factor) {
    double mean_xi2 = 0.0;
    const auto& rule = system.moments().rule();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) mean_xi2 += rule.weights[i] * rule.nodes[i];
    return y_max_factor * (system.sigma_max() * mean_xi2 * (1.0 + 1.0 / phi) + system.support_bound());
}

struct CriticalPoint {
    double x, y;
    bool is_min; ///< h = dF/dx flips + -> -  (local minimum of y(x))
};

std::vector<CriticalPoint> scan_critical_points(const StieltjesSystem& system, double phi,
                                                const EdgeOptions& opts, double* x_lo_out,
                                                double* x_hi_out) {
    const double S = system.support_bound();
    const double eps = opts.eps_factor * S;
    const double x_lo = -1.0 / S + eps;
    const double x_hi = -eps;
    if (x_lo_out) *x_lo_out = x_lo;
    if (x_hi_out) *x_hi_out = x_hi;
    const double y_max = default_y_max(system, phi, opts.y_max_factor);

    // Quadratic clustering toward -1/S: the conditional system's y(x) varies
    // fastest where the top atoms sit.
    auto x_at = [&](double t) { return x_lo + (x_hi - x_lo) * t * t; };

    const int N = opts.scan_points;
    double prev_x = 0.0, prev_h = std::numeric_limits<double>::quiet_NaN();
    std::vector<CriticalPoint> points;
    for (int k = 0; k < N; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(N - 1);
        double x = x_at(t);
        XSlice slice(system, x);
        double y = solve_y(slice, y_max);
        double h = std::isnan(y) ? std::numeric_limits<double>::quiet_NaN() : slice.Fx(y);
        if (!std::isnan(prev_h) && !std::isnan(h) && prev_h * h < 0.0) {
            double a = prev_x, b = x;
            double sign_a = prev_h > 0.0 ? 1.0 : -1.0;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (a + b);
                XSlice sm(system, m);
                double ym = solve_y(sm, y_max);
                double hm = std::isnan(ym) ? sign_a : sm.Fx(ym); // treat rare nan as the left side
                if ((hm > 0.0 ? 1.0 : -1.0) == sign_a)
                    a = m;
                else
                    b = m;
            }
            double xc = 0.5 * (a + b);
            XSlice sc(system, xc);
            double yc = solve_y(sc, y_max);
            if (!std::isnan(yc)) points.push_back({xc, yc, prev_h > 0.0});
        }
        if (!std::isnan(h)) {
            prev_x = x;
            prev_h = h;
        }
    }
    return points;
}

double fit_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < logx.size(); ++i) {
        mx += logx[i];
        my += logy[i];
    }
    mx /= logx.size();
    my /= logy.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < logx.size(); ++i) {
        num += (logx[i] - mx) * (logy[i] - my);
        den += (logx[i] - mx) * (logx[i] - mx);
    }
    return num / den;
}

} // namespace

const char* RegularityReport::case_name(Case c) {
    switch (c) {
        case Case::d_le_1: return "d_le_1";
        case Case::d_gt_1_checked: return "d_gt_1_checked";
        default: return "d_gt_1_failed";
    }
}

std::string EdgeReport::to_json() const {
    nlohmann::json j;
    j["x_star"] = x_star;
    j["edge"] = edge;
    j["gamma0"] = gamma0;
    j["mode"] = (mode == SystemMode::empirical) ? "empirical" : "limiting";
    j["sigma1_gap"] = regularity ? nlohmann::json(regularity->sigma1_gap) : nlohmann::json();
    j["vartheta"] = (regularity && regularity->vartheta) ? nlohmann::json(*regularity->vartheta)
                                                         : nlohmann::json();
    j["case"] = regularity ? nlohmann::json(RegularityReport::case_name(regularity->condition_case))
                           : nlohmann::json();
    j["regularity_pass"] = regularity ? nlohmann::json(regularity->pass) : nlohmann::json();
    j["sqrt_fit_exponent"] = sqrt_fit_exponent;
    j["n_critical_points"] = n_critical_points;
    j["multiple_roots"] = multiple_roots;
    return j.dump(2);
}

EdgeReport find_edge(const ModelConfig& config, SystemMode mode,
                     const std::vector<double>* xi_squared, const EdgeOptions& opts) {
    StieltjesSystem system = (mode == SystemMode::empirical)
                                 ? StieltjesSystem::conditional(config, *xi_squared)
                                 : StieltjesSystem::limiting(config, opts.quadrature_nodes);

    double x_lo = 0.0, x_hi = 0.0;
    auto points = scan_critical_points(system, config.phi(), opts, &x_lo, &x_hi);

    std::vector<CriticalPoint> minima;
    for (const auto& c : points)
        if (c.is_min) minima.push_back(c);

    if (minima.empty()) {
        std::ostringstream msg;
        msg << "find_edge: no sign change of dF/dx over x in (" << x_lo << ", " << x_hi << ")";
        throw EdgeNotFound(msg.str(), x_lo, x_hi);
    }

    const CriticalPoint* best = &minima.front();
    for (const auto& c : minima)
        if (c.y > best->y) best = &c;

    EdgeReport report;
    report.x_star = best->x;
    report.edge = best->y;
    report.mode = mode;
    report.n_critical_points = static_cast<int>(minima.size());
    report.multiple_roots = minima.size() > 1;
    return report;
}

namespace {

double gamma0_from_system(const StieltjesSystem& system, double x_star, double edge) {
    double Fy = system.dF_dy(x_star, edge);
    double Fxx = system.d2F_dx2(x_star, edge);
    if (std::abs(Fxx) < 1e-12)
        throw std::domain_error("gamma0: degenerate edge, d2F/dx2 vanishes");
    const auto& m = system.moments();
    double integral = m.phi_inv() * m.rule().integrate([&](double s) {
        double u = 1.0 + s * x_star;
        return s / (edge * u * u);
    });
    double g3 = (-2.0 * Fy / Fxx) * integral * integral;
    if (!(g3 > 0.0)) {
        std::ostringstream msg;
        msg << "gamma0: gamma0^3 = " << g3 << " <= 0 (regularity violation)";
        throw std::runtime_error(msg.str());
    }
    return std::cbrt(g3);
}

} // namespace

double gamma0_scale(const ModelConfig& config, const RadialLaw& law, const EdgeReport& report,
                    int quadrature_nodes) {
    ModelConfig c = config;
    c.radial = law;
    return gamma0_from_system(StieltjesSystem::limiting(c, quadrature_nodes), report.x_star, report.edge);
}

double gamma0_empirical(const ModelConfig& config, const std::vector<double>& xi_squared,
                        const EdgeReport& report) {
    return gamma0_from_system(StieltjesSystem::conditional(config, xi_squared), report.x_star, report.edge);
}

std::pair<double, double> upsilon_integrals(const ModelConfig& config, const RadialLaw& law,
                                            int quadrature_nodes) {
    if (law.kind != RadialLaw::Kind::parametric)
        throw std::domain_error("upsilon integrals require a parametric radial law");
    if (!(law.d > 1.0))
        throw std::domain_error("upsilon integrals diverge for d <= 1: integrand (l-s)^{-2} against (l-s)^d");

    const double l = law.l;
    std::vector<double> t0, w0, t1, w1, t2, w2;
    gauss_jacobi(quadrature_nodes, law.d, law.b - 1.0, t0, w0);
    gauss_jacobi(quadrature_nodes, law.d - 1.0, law.b - 1.0, t1, w1);
    gauss_jacobi(quadrature_nodes, law.d - 2.0, law.b - 1.0, t2, w2);
    double S0 = 0.0;
    for (double w : w0) S0 += w;

    // Int f(s) (l-s)^{-k} dF = (l/2)^{-k} / S0 * sum w_k f(s_i) with the
    // (l-s)^{d-k} weight rules; the dF normalization cancels through S0.
    double I1 = 0.0; // Int s/(l-s) dF
    for (std::size_t i = 0; i < t1.size(); ++i) I1 += w1[i] * 0.5 * l * (t1[i] + 1.0);
    I1 *= (2.0 / l) / S0;
    double I2 = 0.0; // Int s^2/(l-s)^2 dF
    for (std::size_t i = 0; i < t2.size(); ++i) {
        double s = 0.5 * l * (t2[i] + 1.0);
        I2 += w2[i] * s * s;
    }
    I2 *= (4.0 / (l * l)) / S0;

    double phi_inv = 1.0 / config.phi();
    double upsilon1 = phi_inv * l * l * I2;
    double upsilon2 = phi_inv * l * I1;
    return {upsilon1, upsilon2};
}

RegularityReport check_regularity(const ModelConfig& config, const RadialLaw& law,
                                  const EdgeReport& report) {
    ModelConfig c = config;
    c.radial = law;
    StieltjesSystem system = StieltjesSystem::limiting(c);

    // m_{2n,c}(L_+) as the eta -> 0 limit along L_+ + i eta. The edge
    // expansion is in sqrt(z - L_+), so extrapolate in sqrt(eta) first
    // (ratio 10 per ladder step), then in eta.
    const double etas[3] = {1e-4, 1e-6, 1e-8};
    Complex m2[3];
    std::optional<Complex> warm;
    SolveOptions opts;
    for (int j = 0; j < 3; ++j) {
        StieltjesTriple t = system.solve(Complex(report.edge, etas[j]), opts, warm);
        warm = t.m1;
        m2[j] = t.m2;
    }
    Complex a1 = (10.0 * m2[1] - m2[0]) / 9.0;
    Complex a2 = (10.0 * m2[2] - m2[1]) / 9.0;
    Complex m2_limit = (100.0 * a2 - a1) / 99.0;

    RegularityReport reg;
    reg.tau_threshold = config.tau;
    reg.d = (law.kind == RadialLaw::Kind::parametric) ? law.d : 0.0;
    reg.sigma1_gap = std::abs(1.0 + system.sigma_max() * m2_limit);

    bool gap_ok = reg.sigma1_gap >= reg.tau_threshold;
    if (law.kind != RadialLaw::Kind::parametric || law.d <= 1.0) {
        reg.condition_case = RegularityReport::Case::d_le_1;
        reg.pass = gap_ok;
        return reg;
    }

    auto [u1, u2] = upsilon_integrals(config, law);
    const auto& sv = system.sigma_values();
    const auto& sw = system.sigma_masses();
    double phi_inv = 1.0 / config.phi();
    double vartheta = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        double den = report.edge - sv[i] * u2;
        vartheta += sw[i] * sv[i] * sv[i] * u1 / (den * den);
    }
    vartheta *= phi_inv;
    reg.vartheta = vartheta;
    bool theta_ok = phi_inv < vartheta;
    reg.condition_case = theta_ok ? RegularityReport::Case::d_gt_1_checked
                                  : RegularityReport::Case::d_gt_1_failed;
    reg.pass = gap_ok && theta_ok;
    return reg;
}

SqrtFitResult sqrt_edge_fit(const ModelConfig& config, SystemMode mode,
                            const std::vector<double>* xi_squared, Variant variant,
                            const EdgeOptions& opts) {
    EdgeReport report = find_edge(config, mode, xi_squared, opts);
    const double edge = report.edge;

    const int n_kappa = 20;
    std::vector<double> kappas(n_kappa), grid(n_kappa);
    for (int i = 0; i < n_kappa; ++i) {
        double t = static_cast<double>(i) / (n_kappa - 1);
        kappas[i] = edge * std::pow(10.0, -4.0 + 2.0 * t);
        grid[i] = edge - kappas[i];
    }

    DensityCurve curve = density(config, mode, variant, grid, 0.1, xi_squared);

    std::vector<double> lk, lr;
    for (int i = 0; i < n_kappa; ++i) {
        if (curve.values[i] > 0.0) {
            lk.push_back(std::log(kappas[i]));
            lr.push_back(std::log(curve.values[i]));
        }
    }
    if (lk.size() < 3) throw std::runtime_error("sqrt_edge_fit: density vanished near the edge");

    SqrtFitResult fit;
    fit.density_slope = fit_slope(lk, lr);
    fit.kappas = kappas;
    fit.densities = curve.values;

    // |m(edge) - m(edge - kappa)| ~ sqrt(kappa), boundary values taken at a
    // small eta reached through a warm-started geometric ladder.
    StieltjesSystem system = (mode == SystemMode::empirical)
                                 ? StieltjesSystem::conditional(config, *xi_squared)
                                 : StieltjesSystem::limiting(config);
    auto boundary_m = [&](double E) {
        std::optional<Complex> warm;
        StieltjesTriple t;
        for (double eta = 1e-2; eta >= 0.9e-7; eta *= 0.1) {
            t = system.solve(Complex(E, eta), SolveOptions{}, warm);
            warm = t.m1;
        }
        switch (variant) {
            case Variant::m1: return t.m1;
            case Variant::m2: return t.m2;
            default: return t.m;
        }
    };
    Complex m_edge = boundary_m(edge);
    std::vector<double> lk2, lm;
    for (int i = 0; i < n_kappa; i += 2) {
        double diff = std::abs(boundary_m(grid[i]) - m_edge);
        if (diff > 0.0) {
            lk2.push_back(std::log(kappas[i]));
            lm.push_back(std::log(diff));
        }
    }
    fit.m_increment_slope = fit_slope(lk2, lm);
    return fit;
}

std::vector<StieltjesBoundRow> check_stieltjes_bounds(const ModelConfig& config, const RadialLaw& law,
                                                      const EdgeReport& report,
                                                      const std::vector<Complex>& z_grid) {
    ModelConfig c = config;
    c.radial = law;
    StieltjesSystem system = StieltjesSystem::limiting(c);
    std::vector<StieltjesBoundRow> rows;
    rows.reserve(z_grid.size());
    for (Complex z : z_grid) {
        StieltjesTriple t = system.solve(z);
        StieltjesBoundRow row;
        row.z = z;
        row.abs_m = std::abs(t.m);
        row.im_m = t.m.imag();
        double kappa = std::abs(z.real() - report.edge);
        double eta = z.imag();
        double predicted = (z.real() >= report.edge) ? eta / std::sqrt(kappa + eta)
                                                     : std::sqrt(kappa + eta);
        row.regime_ratio = row.im_m / predicted;

        row.min_sigma_denom = std::numeric_limits<double>::infinity();
        for (double s : system.sigma_values())
            row.min_sigma_denom = std::min(row.min_sigma_denom, std::abs(1.0 + s * t.m2));
        row.min_xi_denom = std::abs(1.0 + system.support_bound() * t.m1);
        for (double s : system.moments().rule().nodes)
            row.min_xi_denom = std::min(row.min_xi_denom, std::abs(1.0 + s * t.m1));

        row.flagged = row.regime_ratio < 1.0 / 50.0 || row.regime_ratio > 50.0 ||
                      row.min_sigma_denom < 1e-3 || row.min_xi_denom < 1e-3;
        rows.push_back(row);
    }
    return rows;
}

} // namespace elliptw
