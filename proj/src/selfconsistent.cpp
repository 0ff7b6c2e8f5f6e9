#include "elliptw/selfconsistent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace elliptw {

namespace {
constexpr Complex kI{0.0, 1.0};
}

StieltjesSystem::StieltjesSystem(const std::vector<double>& sigmas, RadialMoments moments, SystemMode mode)
    : moments_(std::move(moments)), mode_(mode) {
    if (sigmas.empty()) throw std::invalid_argument("StieltjesSystem: empty spectrum");
    std::vector<double> sorted = sigmas;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const double unit = 1.0 / static_cast<double>(sorted.size());
    for (double s : sorted) {
        if (!sigma_vals_.empty() && s == sigma_vals_.back()) {
            sigma_wts_.back() += unit;
        } else {
            sigma_vals_.push_back(s);
            sigma_wts_.push_back(unit);
        }
    }
    support_bound_ = 0.0;
    for (double s : moments_.rule().nodes) support_bound_ = std::max(support_bound_, s);
}

StieltjesSystem StieltjesSystem::conditional(const ModelConfig& config, const std::vector<double>& xi_squared) {
    if (static_cast<int>(xi_squared.size()) != config.n)
        throw std::invalid_argument("conditional system: realization length != n");
    RadialLaw atoms = RadialLaw::empirical(xi_squared);
    return StieltjesSystem(config.spectrum.sigmas, RadialMoments(make_rule(atoms), config.phi()),
                           SystemMode::empirical);
}

StieltjesSystem StieltjesSystem::limiting(const ModelConfig& config, int quadrature_nodes) {
    return StieltjesSystem(config.spectrum.sigmas, RadialMoments(make_rule(config.radial, quadrature_nodes), config.phi()),
                           SystemMode::limiting);
}

Complex StieltjesSystem::map_m2(Complex m1, Complex z) const {
    // p^{-1} sum_j xi_j^2 / (-z (1 + xi_j^2 m1))  ==  -g(m1)/z  in both modes
    return -moments_.g(m1) / z;
}

Complex StieltjesSystem::map_m1(Complex m2, Complex z) const {
    Complex acc{};
    for (std::size_t i = 0; i < sigma_vals_.size(); ++i)
        acc += sigma_wts_[i] * sigma_vals_[i] / (-z * (1.0 + sigma_vals_[i] * m2));
    return acc;
}

Complex StieltjesSystem::map_m(Complex m2, Complex z) const {
    Complex acc{};
    for (std::size_t i = 0; i < sigma_vals_.size(); ++i)
        acc += sigma_wts_[i] / (-z * (1.0 + sigma_vals_[i] * m2));
    return acc;
}

StieltjesTriple StieltjesSystem::solve(Complex z, const SolveOptions& opts,
                                       std::optional<Complex> warm_m1) const {
    if (!(z.imag() > 0.0)) throw std::domain_error("solve: spectral point must satisfy Im z > 0");

    Complex m1 = warm_m1.value_or(kI);
    if (!(m1.imag() > 0.0)) m1 = kI;

    // m2 and m are recovered exactly from m1 via their displayed equations,
    // so the only defect that can survive is the first equation's.
    auto residual_at = [&](Complex x) { return std::abs(map_m1(map_m2(x, z), z) - x); };

    double omega = opts.omega;
    double res = residual_at(m1);
    double prev_res = res;
    int rising = 0;
    int iter = 0;
    int next_newton = opts.newton_after;

    // Damped alternation of the two displayed maps. The composed map's
    // contraction factor degrades like 1 - O(sqrt(kappa + eta)) near the
    // edge, so periodically we polish with Newton on the scalar equation
    // F(x, z) = 0 (the system reduced to one unknown).
    while (iter < opts.max_iterations && res > opts.tol) {
        if (iter >= next_newton) {
            next_newton = iter + 300;
            Complex x = m1;
            for (int k = 0; k < 100 && iter < opts.max_iterations; ++k, ++iter) {
                Complex f = F(x, z);
                if (std::abs(f) < 0.01 * opts.tol) break;
                Complex fp = dF_dx(x, z);
                if (std::abs(fp) < 1e-300) break;
                Complex step = f / fp;
                Complex xn = x - step;
                int halvings = 0;
                while ((!(xn.imag() > 0.0) || std::abs(F(xn, z)) > std::abs(f)) && halvings < 50) {
                    step *= 0.5;
                    xn = x - step;
                    ++halvings;
                }
                if (halvings >= 50) break;
                x = xn;
            }
            if (x.imag() > 0.0) {
                double rn = residual_at(x);
                if (rn < res) {
                    m1 = x;
                    res = rn;
                    prev_res = rn;
                }
            }
            if (res <= opts.tol) break;
        }

        Complex m2 = map_m2(m1, z);
        Complex m1_next = map_m1(m2, z);
        m1 = (1.0 - omega) * m1 + omega * m1_next;
        ++iter;

        res = residual_at(m1);
        if (res > prev_res) {
            if (++rising >= 2) {
                omega = std::max(0.05, 0.5 * omega);
                rising = 0;
            }
        } else {
            rising = 0;
        }
        prev_res = res;
    }

    if (res > opts.tol) {
        std::ostringstream msg;
        msg << "self-consistent solve did not converge at z=(" << z.real() << "," << z.imag()
            << "): residual " << res << " after " << iter << " iterations";
        throw SolverFailure(msg.str(), res, iter);
    }

    StieltjesTriple triple;
    triple.z = z;
    triple.m1 = m1;
    triple.m2 = map_m2(m1, z);
    triple.m = map_m(triple.m2, z);
    triple.residual = std::max({std::abs(map_m1(triple.m2, z) - m1),
                                std::abs(map_m2(m1, z) - triple.m2),
                                std::abs(map_m(triple.m2, z) - triple.m)});
    triple.iterations = iter;
    return triple;
}

StieltjesTriple solve_system(const ModelConfig& config, const std::vector<double>& xi_squared,
                             Complex z, const SolveOptions& opts) {
    return StieltjesSystem::conditional(config, xi_squared).solve(z, opts);
}

StieltjesTriple solve_system(const ModelConfig& config, Complex z, const SolveOptions& opts) {
    return StieltjesSystem::limiting(config).solve(z, opts);
}

Complex eval_Fp(const ModelConfig& config, const std::vector<double>& xi_squared, Complex x, Complex z) {
    if (static_cast<int>(xi_squared.size()) != config.n)
        throw std::invalid_argument("eval_Fp: realization length != n");
    const double p = static_cast<double>(config.p);
    Complex inner{};
    for (std::size_t j = 0; j < xi_squared.size(); ++j) {
        Complex den = 1.0 + xi_squared[j] * x;
        if (std::abs(den) < 1e-14) {
            std::ostringstream msg;
            msg << "eval_Fp: 1 + xi_j^2 x vanishes at j=" << j;
            throw PoleError(msg.str(), static_cast<long>(j));
        }
        inner += xi_squared[j] / den;
    }
    inner /= p;
    Complex acc{};
    for (std::size_t i = 0; i < config.spectrum.sigmas.size(); ++i) {
        double s = config.spectrum.sigmas[i];
        Complex den = -z + s * inner;
        if (std::abs(den) < 1e-14) {
            std::ostringstream msg;
            msg << "eval_Fp: denominator vanishes at i=" << i;
            throw PoleError(msg.str(), static_cast<long>(i));
        }
        acc += s / den;
    }
    return acc / p - x;
}

namespace {

template <class Scalar>
Scalar eval_Fpc_impl(const ModelConfig& config, const RadialLaw& law, Scalar x, Scalar y) {
    ModelConfig c = config;
    c.radial = law;
    StieltjesSystem system = StieltjesSystem::limiting(c);
    // guard the quadrature denominators before evaluating
    for (std::size_t i = 0; i < system.moments().rule().nodes.size(); ++i) {
        Scalar den = Scalar(1) + system.moments().rule().nodes[i] * x;
        if (std::abs(den) < 1e-14) {
            std::ostringstream msg;
            msg << "eval_Fpc: 1 + s x vanishes at quadrature node " << i;
            throw PoleError(msg.str(), static_cast<long>(i));
        }
    }
    Scalar gx = system.moments().g(x);
    for (std::size_t i = 0; i < system.sigma_values().size(); ++i) {
        Scalar den = -y + system.sigma_values()[i] * gx;
        if (std::abs(den) < 1e-14) {
            std::ostringstream msg;
            msg << "eval_Fpc: denominator vanishes at i=" << i;
            throw PoleError(msg.str(), static_cast<long>(i));
        }
    }
    return system.F(x, y);
}

} // namespace

double eval_Fpc(const ModelConfig& config, const RadialLaw& law, double x, double y) {
    return eval_Fpc_impl<double>(config, law, x, y);
}

Complex eval_Fpc(const ModelConfig& config, const RadialLaw& law, Complex x, Complex y) {
    return eval_Fpc_impl<Complex>(config, law, x, y);
}

FpcPartials partials_Fpc(const ModelConfig& config, const RadialLaw& law, double x, double y) {
    ModelConfig c = config;
    c.radial = law;
    StieltjesSystem system = StieltjesSystem::limiting(c);
    FpcPartials out;
    out.dF_dx = system.dF_dx(x, y);
    out.dF_dy = system.dF_dy(x, y);
    out.d2F_dx2 = system.d2F_dx2(x, y);
    return out;
}

double DensityCurve::trapezoid_mass() const {
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        mass += 0.5 * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]);
    return mass;
}

void DensityCurve::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "E,rho,eta_error_estimate\n";
    out.precision(17);
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << grid[i] << ',' << values[i] << ',' << error_estimates[i] << '\n';
}

DensityCurve density(const ModelConfig& config, SystemMode mode, Variant variant,
                     const std::vector<double>& grid, double eta_scale,
                     const std::vector<double>* xi_squared, const SolveOptions& opts) {
    StieltjesSystem system = (mode == SystemMode::empirical)
                                 ? StieltjesSystem::conditional(config, *xi_squared)
                                 : StieltjesSystem::limiting(config);

    const std::vector<double> etas = {1e-2 * eta_scale, 1e-3 * eta_scale, 1e-4 * eta_scale};
    DensityCurve curve;
    curve.grid = grid;
    curve.eta_sequence = etas;
    curve.values.reserve(grid.size());
    curve.error_estimates.reserve(grid.size());

    auto pick = [&](const StieltjesTriple& t) {
        switch (variant) {
            case Variant::m1: return t.m1;
            case Variant::m2: return t.m2;
            default: return t.m;
        }
    };

    for (std::size_t k = 0; k < grid.size(); ++k) {
        double E = grid[k];
        double im[3];
        std::optional<Complex> warm; // ladder top starts cold at i
        for (int j = 0; j < 3; ++j) {
            try {
                StieltjesTriple t = system.solve(Complex(E, etas[j]), opts, warm);
                warm = t.m1;
                im[j] = pick(t).imag();
            } catch (const SolverFailure& e) {
                std::ostringstream msg;
                msg << "density: grid point E=" << E << ", eta=" << etas[j] << ": " << e.what();
                throw SolverFailure(msg.str(), e.last_residual, e.iterations);
            }
        }
        // linear-in-eta Richardson; finer pair is the value, coarser pair the error gauge
        auto extrap = [&](double ya, double ea, double yb, double eb) {
            return (yb * ea - ya * eb) / (ea - eb);
        };
        double fine = extrap(im[1], etas[1], im[2], etas[2]);
        double coarse = extrap(im[0], etas[0], im[1], etas[1]);
        curve.values.push_back(std::max(0.0, fine / M_PI));
        curve.error_estimates.push_back(std::abs(fine - coarse) / M_PI);
    }
    return curve;
}

std::vector<double> support_grid(double upper, int n_points, double lower) {
    std::vector<double> grid(n_points);
    for (int k = 0; k < n_points; ++k) {
        double theta = M_PI * static_cast<double>(k) / static_cast<double>(n_points - 1);
        double t = 0.5 * (1.0 - std::cos(theta)); // sin^2 grading in [0,1]
        grid[k] = lower + (upper - lower) * t;
    }
    return grid;
}

} // namespace elliptw
