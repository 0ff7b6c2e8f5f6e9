#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elliptw/model.hpp"
#include "elliptw/quadrature.hpp"

namespace elliptw {

using Complex = std::complex<double>;

/// Thrown when the coupled fixed point does not reach tolerance.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), last_residual(residual), iterations(iterations) {}
    double last_residual;
    int iterations;
};

/// Thrown when an evaluation hits a vanishing denominator; `index` names the
/// offending summand.
class PoleError : public std::runtime_error {
public:
    PoleError(const std::string& what, long index) : std::runtime_error(what), index(index) {}
    long index;
};

/// Solution of the coupled system at one spectral point z in C_+.
struct StieltjesTriple {
    Complex z{};
    Complex m1{};
    Complex m2{};
    Complex m{};
    double residual = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-12;
    int max_iterations = 10000;
    double omega = 0.5;        ///< damping weight; halved on oscillation
    int newton_after = 400;    ///< switch to Newton polish on the scalar form
};

enum class SystemMode { empirical, limiting };
enum class Variant { m, m1, m2 };

/// The coupled system in its scalar form F(x, z) = p^{-1} sum_i sigma_i /
/// (-z + sigma_i g(x)) - x with g(x) = phi^{-1} Int s/(1+sx) dF(s).
/// The conditional (per-realization) and limiting systems differ only in dF:
/// point masses at the sampled xi^2 versus the parametric law's quadrature.
class StieltjesSystem {
public:
    static StieltjesSystem conditional(const ModelConfig& config, const std::vector<double>& xi_squared);
    static StieltjesSystem limiting(const ModelConfig& config, int quadrature_nodes = 256);

    /// Distinct population eigenvalues and their mass (sums to 1); repeated
    /// sigmas collapse so identity/two-atom spectra evaluate in O(1).
    const std::vector<double>& sigma_values() const { return sigma_vals_; }
    const std::vector<double>& sigma_masses() const { return sigma_wts_; }
    const RadialMoments& moments() const { return moments_; }
    double support_bound() const { return support_bound_; }  ///< max of the dF support
    double sigma_max() const { return sigma_vals_.front(); }
    SystemMode mode() const { return mode_; }

    template <class Scalar>
    Scalar F(Scalar x, Scalar y) const;
    template <class Scalar>
    Scalar dF_dx(Scalar x, Scalar y) const;
    template <class Scalar>
    Scalar dF_dy(Scalar x, Scalar y) const;
    template <class Scalar>
    Scalar d2F_dx2(Scalar x, Scalar y) const;

    /// Maps of the displayed equations: m2 from m1, m1 from m2, m from m2.
    Complex map_m2(Complex m1, Complex z) const;
    Complex map_m1(Complex m2, Complex z) const;
    Complex map_m(Complex m2, Complex z) const;

    /// Damped alternating fixed point started at m1 = m2 = i (or warm start),
    /// with a Newton polish on F(., z) once the linear phase stalls.
    StieltjesTriple solve(Complex z, const SolveOptions& opts = {},
                          std::optional<Complex> warm_m1 = std::nullopt) const;

private:
    StieltjesSystem(const std::vector<double>& sigmas, RadialMoments moments, SystemMode mode);

    std::vector<double> sigma_vals_;
    std::vector<double> sigma_wts_;
    RadialMoments moments_;
    SystemMode mode_;
    double support_bound_;
};

/// Eq.-level operations ------------------------------------------------------

/// Solve the conditional system (realization mode).
StieltjesTriple solve_system(const ModelConfig& config, const std::vector<double>& xi_squared,
                             Complex z, const SolveOptions& opts = {});
/// Solve the limiting system (quadrature mode).
StieltjesTriple solve_system(const ModelConfig& config, Complex z, const SolveOptions& opts = {});

/// F_p(x, z) exactly as displayed: p^{-1} sum_i sigma_i /
/// (-z + sigma_i p^{-1} sum_j xi_j^2/(1+xi_j^2 x)) - x.
Complex eval_Fp(const ModelConfig& config, const std::vector<double>& xi_squared, Complex x, Complex z);

/// F_{p,c}(x, y) with the integral taken against the law's quadrature rule.
double eval_Fpc(const ModelConfig& config, const RadialLaw& law, double x, double y);
Complex eval_Fpc(const ModelConfig& config, const RadialLaw& law, Complex x, Complex y);

struct FpcPartials {
    double dF_dx;
    double dF_dy;
    double d2F_dx2;
};
FpcPartials partials_Fpc(const ModelConfig& config, const RadialLaw& law, double x, double y);

/// Density reconstruction ----------------------------------------------------

struct DensityCurve {
    std::vector<double> grid;            ///< energies E
    std::vector<double> values;          ///< rho(E) >= 0
    std::vector<double> error_estimates; ///< per-point Richardson error estimate
    std::vector<double> eta_sequence;    ///< the eta ladder that was used

    double trapezoid_mass() const;
    void write_csv(const std::string& path) const;
};

/// Stieltjes inversion: rho(E) = pi^{-1} lim Im m(E + i eta) approximated on
/// the eta ladder {1e-2, 1e-3, 1e-4} * eta_scale with linear Richardson
/// extrapolation from the two smallest eta; the third point feeds the error
/// estimate. Solver failures are rethrown with the grid point annotated.
DensityCurve density(const ModelConfig& config, SystemMode mode, Variant variant,
                     const std::vector<double>& grid, double eta_scale = 1.0,
                     const std::vector<double>* xi_squared = nullptr,
                     const SolveOptions& opts = {});

/// Grid over [0, upper] with sin^2 grading (nodes clustered at both ends) so
/// that inverse-square-root endpoint behavior integrates cleanly.
std::vector<double> support_grid(double upper, int n_points, double lower = 0.0);

// template definitions -------------------------------------------------------

template <class Scalar>
Scalar StieltjesSystem::F(Scalar x, Scalar y) const {
    Scalar gx = moments_.g(x);
    Scalar acc{};
    for (std::size_t i = 0; i < sigma_vals_.size(); ++i)
        acc += sigma_wts_[i] * sigma_vals_[i] / (-y + sigma_vals_[i] * gx);
    return acc - x;
}

template <class Scalar>
Scalar StieltjesSystem::dF_dx(Scalar x, Scalar y) const {
    Scalar gx = moments_.g(x);
    Scalar gp = moments_.g_prime(x);
    Scalar acc{};
    for (std::size_t i = 0; i < sigma_vals_.size(); ++i) {
        double s = sigma_vals_[i];
        Scalar den = -y + s * gx;
        acc += sigma_wts_[i] * s * s / (den * den);
    }
    return -gp * acc - Scalar(1);
}

template <class Scalar>
Scalar StieltjesSystem::dF_dy(Scalar x, Scalar y) const {
    Scalar gx = moments_.g(x);
    Scalar acc{};
    for (std::size_t i = 0; i < sigma_vals_.size(); ++i) {
        double s = sigma_vals_[i];
        Scalar den = -y + s * gx;
        acc += sigma_wts_[i] * s / (den * den);
    }
    return acc;
}

template <class Scalar>
Scalar StieltjesSystem::d2F_dx2(Scalar x, Scalar y) const {
    Scalar gx = moments_.g(x);
    Scalar gp = moments_.g_prime(x);
    Scalar gs = moments_.g_second(x);
    Scalar acc{};
    for (std::size_t i = 0; i < sigma_vals_.size(); ++i) {
        double s = sigma_vals_[i];
        Scalar den = -y + s * gx;
        acc += sigma_wts_[i] * (2.0 * s * s * s * gp * gp / (den * den * den) - s * s * gs / (den * den));
    }
    return acc;
}

} // namespace elliptw
