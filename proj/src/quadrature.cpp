#include "elliptw/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace elliptw {

void gauss_jacobi(int n, double alpha, double beta,
                  std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
    if (alpha <= -1.0 || beta <= -1.0) throw std::invalid_argument("gauss_jacobi: exponents must exceed -1");

    // Golub-Welsch: recurrence coefficients of the monic Jacobi polynomials.
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
    double ab = alpha + beta;
    diag(0) = (ab + 2.0 != 0.0) ? (beta - alpha) / (ab + 2.0) : 0.0;
    for (int k = 1; k < n; ++k) {
        double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        diag(k) = (beta * beta - alpha * alpha) / den;
    }
    if (n > 1) {
        sub(0) = std::sqrt(4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)));
        for (int k = 2; k < n; ++k) {
            double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
            double den = (2.0 * k + ab) * (2.0 * k + ab);
            den *= (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
            sub(k - 1) = std::sqrt(num / den);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub);
    if (solver.info() != Eigen::Success) throw std::runtime_error("gauss_jacobi: eigen decomposition failed");

    // mu0 = Int_{-1}^{1} (1-t)^alpha (1+t)^beta dt = 2^{ab+1} B(alpha+1, beta+1)
    double log_mu0 = (ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                     std::lgamma(ab + 2.0);
    double mu0 = std::exp(log_mu0);

    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = solver.eigenvalues()(i);
        double v0 = solver.eigenvectors()(0, i);
        weights[i] = mu0 * v0 * v0;
    }
}

QuadratureRule make_rule(const RadialLaw& law, int n_nodes) {
    QuadratureRule rule;
    if (law.kind == RadialLaw::Kind::empirical) {
        if (law.atoms.empty()) throw std::logic_error("make_rule: empirical law without point masses");
        rule.nodes = law.atoms;
        if (law.weights.empty()) {
            rule.weights.assign(law.atoms.size(), 1.0 / static_cast<double>(law.atoms.size()));
        } else {
            double total = std::accumulate(law.weights.begin(), law.weights.end(), 0.0);
            rule.weights.resize(law.weights.size());
            for (std::size_t i = 0; i < law.weights.size(); ++i) rule.weights[i] = law.weights[i] / total;
        }
        rule.weight_exponent = 0.0;
        return rule;
    }

    // density of xi^2 = l(1-B), B ~ Beta(d+1, b): proportional to s^{b-1}(l-s)^d
    std::vector<double> t, w;
    gauss_jacobi(n_nodes, law.d, law.b - 1.0, t, w);
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    rule.nodes.resize(t.size());
    rule.weights.resize(w.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        rule.nodes[i] = 0.5 * law.l * (t[i] + 1.0);
        rule.weights[i] = w[i] / total; // exact: the normalizing constant cancels
    }
    rule.weight_exponent = law.d;
    return rule;
}

} // namespace elliptw
