#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "elliptw/selfconsistent.hpp"

namespace elliptw {

class EdgeNotFound : public std::runtime_error {
public:
    EdgeNotFound(const std::string& what, double x_lo, double x_hi)
        : std::runtime_error(what), x_lo(x_lo), x_hi(x_hi) {}
    double x_lo, x_hi; ///< scanned interval
};

/// Assumption check around the right-most edge.
struct RegularityReport {
    enum class Case { d_le_1, d_gt_1_checked, d_gt_1_failed };

    double sigma1_gap = 0.0;   ///< |1 + sigma_1 m_{2n,c}(L_+)|
    double tau_threshold = 0.0;
    double d = 0.0;
    std::optional<double> vartheta; ///< only for d > 1
    Case condition_case = Case::d_le_1;
    bool pass = false;

    static const char* case_name(Case c);
};

struct EdgeReport {
    double x_star = std::numeric_limits<double>::quiet_NaN(); ///< m_1 at the edge
    double edge = std::numeric_limits<double>::quiet_NaN();   ///< lambda_+ or L_+
    double gamma0 = std::numeric_limits<double>::quiet_NaN();
    SystemMode mode = SystemMode::limiting;
    std::optional<RegularityReport> regularity;
    double sqrt_fit_exponent = std::numeric_limits<double>::quiet_NaN();
    int n_critical_points = 0; ///< local minima of y(x) found by the scan
    bool multiple_roots = false;

    std::string to_json() const; ///< flat keys per the external interface
};

struct EdgeOptions {
    int scan_points = 1024;
    double eps_factor = 1e-9;   ///< margin as a fraction of the support bound
    double y_max_factor = 10.0;
    int quadrature_nodes = 256;
};

/// Locates (x_star, edge) solving F = 0, dF/dx = 0 by the nested scheme:
/// for each x the monotone-in-y branch (all denominators negative) is
/// bisected for F(x, y) = 0; the outer scan bisects dF/dx(x, y(x)) sign
/// changes, clustered toward x = -1/support so the top-of-support structure
/// of conditional systems is resolved. The edge is the largest y over the
/// local minima of y(x); several minima set `multiple_roots`.
EdgeReport find_edge(const ModelConfig& config, SystemMode mode,
                     const std::vector<double>* xi_squared = nullptr,
                     const EdgeOptions& opts = {});

/// gamma0 from the limiting system at (m_{1n,c}(L_+), L_+):
/// gamma0^3 = [-2 dF/dy / d2F/dx2] * (phi^{-1} Int s/(L_+(1+s m1)^2) dF)^2.
/// Throws std::domain_error on a degenerate edge (d2F/dx2 = 0) and
/// std::runtime_error if gamma0^3 <= 0 (regularity violation).
double gamma0_scale(const ModelConfig& config, const RadialLaw& law, const EdgeReport& report,
                    int quadrature_nodes = 256);

/// Point-mass analogue of gamma0 for a realization (diagnostics only).
double gamma0_empirical(const ModelConfig& config, const std::vector<double>& xi_squared,
                        const EdgeReport& report);

/// upsilon_1 = phi^{-1} Int l^2 s^2/(l-s)^2 dF, upsilon_2 = phi^{-1} Int l s/(l-s) dF.
/// Requires d > 1 (the integrands need (l-s)^{d-2} integrable).
std::pair<double, double> upsilon_integrals(const ModelConfig& config, const RadialLaw& law,
                                            int quadrature_nodes = 256);

/// Fills the regularity report: sigma1 gap via the eta-ladder limit of
/// m_{2n,c}(L_+ + i eta), eta in {1e-4, 1e-6, 1e-8}, Richardson-extrapolated
/// in sqrt(eta); for d > 1 also vartheta from the upsilon integrals.
RegularityReport check_regularity(const ModelConfig& config, const RadialLaw& law,
                                  const EdgeReport& report);

struct SqrtFitResult {
    double density_slope = 0.0;      ///< expected 0.5
    double m_increment_slope = 0.0;  ///< |m(edge) - m(edge-kappa)| ~ kappa^{1/2}
    std::vector<double> kappas;
    std::vector<double> densities;
};

/// Fits log rho(edge - kappa) against log kappa for kappa in
/// [1e-4, 1e-2]*edge through the density operation.
SqrtFitResult sqrt_edge_fit(const ModelConfig& config, SystemMode mode,
                            const std::vector<double>* xi_squared = nullptr,
                            Variant variant = Variant::m,
                            const EdgeOptions& opts = {});

struct StieltjesBoundRow {
    Complex z;
    double abs_m = 0.0;
    double im_m = 0.0;
    double regime_ratio = 0.0;    ///< Im m over the predicted regime size
    double min_sigma_denom = 0.0; ///< min_i |1 + sigma_i m2|
    double min_xi_denom = 0.0;    ///< min over the support of |1 + s m1|
    bool flagged = false;
};

/// Diagnostic sweep of |m|, the Im m regimes and the denominator floors.
std::vector<StieltjesBoundRow> check_stieltjes_bounds(const ModelConfig& config, const RadialLaw& law,
                                                      const EdgeReport& report,
                                                      const std::vector<Complex>& z_grid);

} // namespace elliptw
