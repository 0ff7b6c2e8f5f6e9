#pragma once

#include <string>
#include <vector>

namespace elliptw {

/// Population eigenvalues sigma_1 >= ... >= sigma_p of the diagonal covariance.
struct PopulationSpectrum {
    std::vector<double> sigmas;

    static PopulationSpectrum identity(int p);
    /// Two-point spectrum: fraction `weight` of the eigenvalues equal sigma_a
    /// (the larger one first), the rest sigma_b.
    static PopulationSpectrum two_atom(int p, double sigma_a, double sigma_b, double weight);
    static PopulationSpectrum from_file(int p, const std::string& path);

    double max() const { return sigmas.empty() ? 0.0 : sigmas.front(); }
    double min() const { return sigmas.empty() ? 0.0 : sigmas.back(); }
};

/// Law of the squared radial factor xi^2 on (0, l].
///
/// Parametric kind: xi^2 = l*(1 - B) with B ~ Beta(d+1, b), so that
/// P(l - xi^2 <= x) ~ (x/l)^{d+1} near the upper endpoint. b = 1 has the
/// closed-form CDF F(s) = 1 - (1 - s/l)^{d+1}.
/// Empirical kind: point masses (equal weights unless given).
struct RadialLaw {
    enum class Kind { parametric, empirical };

    Kind kind = Kind::parametric;
    double l = 1.0;   ///< supremum of the support
    double d = 0.0;   ///< edge exponent, > -1
    double b = 1.0;   ///< Beta shape of the smooth factor, > 0
    std::vector<double> atoms;    ///< empirical kind only
    std::vector<double> weights;  ///< empty = equal weights

    static RadialLaw parametric(double l, double d, double b = 1.0);
    static RadialLaw point_mass(double value);
    static RadialLaw empirical(std::vector<double> atoms, std::vector<double> weights = {});

    double mean() const;  ///< E xi^2
};

/// F(x) = P(xi^2 <= x). Parametric laws only; empirical without atoms throws.
double radial_cdf(const RadialLaw& law, double x);

struct ModelConfig {
    int p = 0;
    int n = 0;
    PopulationSpectrum spectrum;
    RadialLaw radial;
    double tau = 0.05;

    double phi() const { return static_cast<double>(p) / static_cast<double>(n); }
};

/// Checks every model invariant; returns one message per violation
/// (empty = valid). Diagnostics only, never throws.
std::vector<std::string> validate(const ModelConfig& config);

} // namespace elliptw
