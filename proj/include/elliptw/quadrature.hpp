#pragma once

#include <complex>
#include <vector>

#include "elliptw/model.hpp"

namespace elliptw {

/// Quadrature rule for integrals against dF, the law of xi^2.
///
/// For the parametric family the density is proportional to
/// s^{b-1} (l-s)^d on (0,l); nodes/weights come from Gauss-Jacobi with both
/// endpoint exponents absorbed, so smooth integrands are handled at full
/// order. Weights are normalized so that sum(weights) == 1 exactly.
/// Empirical laws become exact point-mass sums.
struct QuadratureRule {
    std::vector<double> nodes;    ///< in (0, l]
    std::vector<double> weights;  ///< positive, sum to 1
    double weight_exponent = 0.0; ///< the (l-s)^d factor absorbed by the rule

    template <class Fn>
    auto integrate(Fn&& f) const -> decltype(f(0.0)) {
        decltype(f(0.0)) acc{};
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Gauss-Jacobi nodes/weights on [-1,1] for weight (1-t)^alpha (1+t)^beta,
/// by Golub-Welsch. Weights sum to the weight-function mass mu0.
void gauss_jacobi(int n, double alpha, double beta,
                  std::vector<double>& nodes, std::vector<double>& weights);

/// Rule integrating against dF for the given law. `n_nodes` applies to the
/// parametric kind (default 256); empirical kinds use their atoms directly.
QuadratureRule make_rule(const RadialLaw& law, int n_nodes = 256);

/// Moment evaluations g(x) = phi^{-1} Int s/(1+sx) dF and its first two
/// derivatives, shared by the conditional (point mass) and limiting
/// (quadrature) systems. x may be real or complex; 1 + s x must stay away
/// from zero on the support.
class RadialMoments {
public:
    RadialMoments(QuadratureRule rule, double phi) : rule_(std::move(rule)), inv_phi_(1.0 / phi) {}

    double phi_inv() const { return inv_phi_; }
    const QuadratureRule& rule() const { return rule_; }

    template <class Scalar>
    Scalar g(Scalar x) const {
        return inv_phi_ * rule_.integrate([&](double s) { return s / (Scalar(1) + s * x); });
    }
    template <class Scalar>
    Scalar g_prime(Scalar x) const {
        return -inv_phi_ * rule_.integrate([&](double s) {
            Scalar u = Scalar(1) + s * x;
            return s * s / (u * u);
        });
    }
    template <class Scalar>
    Scalar g_second(Scalar x) const {
        return 2.0 * inv_phi_ * rule_.integrate([&](double s) {
            Scalar u = Scalar(1) + s * x;
            return s * s * s / (u * u * u);
        });
    }

private:
    QuadratureRule rule_;
    double inv_phi_;
};

} // namespace elliptw
