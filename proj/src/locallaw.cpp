#include "elliptw/locallaw.hpp"

#include <algorithm>
#include <cmath>

namespace elliptw {

SpectralDomain SpectralDomain::around(double lambda_plus, Kind kind) {
    SpectralDomain d;
    d.lambda_plus = lambda_plus;
    d.c_left = 0.5 * lambda_plus;
    d.kind = kind;
    return d;
}

double SpectralDomain::eta_min(int p) const {
    if (kind == Kind::D0) return 0.0;
    return std::pow(static_cast<double>(p), -1.0 + epsilon_e);
}

bool SpectralDomain::contains(Complex z, int p) const {
    double E = z.real(), eta = z.imag();
    if (E < lambda_plus - c_left || E > lambda_plus + C_right) return false;
    if (eta > C_right) return false;
    return kind == Kind::D0 ? eta > 0.0 : eta >= eta_min(p);
}

Eigen::MatrixXd sample_W(const ModelConfig& config, std::mt19937_64& rng, bool gaussian) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd W(config.p, config.n);
    const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(config.p));
    for (int j = 0; j < config.n; ++j) {
        for (int i = 0; i < config.p; ++i) W(i, j) = gauss(rng);
        if (gaussian)
            W.col(j) *= inv_sqrt_p;
        else
            W.col(j) /= W.col(j).norm();
    }
    return W;
}

Eigen::MatrixXd assemble_V(const ModelConfig& config, const std::vector<double>& xi_squared,
                           const Eigen::MatrixXd& W) {
    Eigen::MatrixXd V = W;
    for (int i = 0; i < config.p; ++i) V.row(i) *= std::sqrt(config.spectrum.sigmas[i]);
    for (int j = 0; j < config.n; ++j) V.col(j) *= std::sqrt(xi_squared[j]);
    return V;
}

ResolventPair resolvent_pair(const ModelConfig& config, const std::vector<double>& xi_squared,
                             const Eigen::MatrixXd& W, Complex z) {
    if (!(z.imag() > 0.0)) throw std::domain_error("resolvent_pair: Im z must be positive");
    Eigen::MatrixXd V = assemble_V(config, xi_squared, W);
    const int p = config.p, n = config.n;

    Eigen::MatrixXcd A = (V * V.transpose()).cast<Complex>();
    A.diagonal().array() -= z;
    Eigen::MatrixXcd B = (V.transpose() * V).cast<Complex>();
    B.diagonal().array() -= z;

    ResolventPair pair;
    pair.z = z;
    Eigen::PartialPivLU<Eigen::MatrixXcd> luA(A);
    pair.G = luA.inverse();
    {
        double rcond_proxy = pair.G.diagonal().cwiseAbs().maxCoeff();
        if (!std::isfinite(rcond_proxy) || rcond_proxy > 1e14)
            throw std::runtime_error("resolvent_pair: (S - z) numerically singular");
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> luB(B);
    pair.calG = luB.inverse();

    pair.m = pair.G.trace() / static_cast<double>(p);
    Complex m1{};
    for (int i = 0; i < p; ++i) m1 += config.spectrum.sigmas[i] * pair.G(i, i);
    pair.m1 = m1 / static_cast<double>(p);
    Complex m2{};
    for (int j = 0; j < n; ++j) m2 += xi_squared[j] * pair.calG(j, j);
    pair.m2 = m2 / static_cast<double>(p);
    return pair;
}

WardCheck ward_check(const ModelConfig& config, const ResolventPair& pair) {
    const double eta = pair.z.imag();
    const Complex z = pair.z;
    WardCheck out;

    // The displayed p-side identity is stated for the z-scaled resolvent
    // z (S - z)^{-1} (the convention of the singular-value decomposition with
    // the z factor); both sides below reduce to |z|^2 Im G_jj / eta.
    for (int j = 0; j < pair.G.rows(); ++j) {
        double lhs = std::norm(z) * pair.G.row(j).squaredNorm();
        double rhs = std::norm(z) / eta * ((z * pair.G(j, j)) / z).imag();
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        out.row_identity_G = std::max(out.row_identity_G, std::abs(lhs - rhs) / scale);
        out.max_abs_err = std::max(out.max_abs_err, std::abs(lhs - rhs));
    }
    for (int nu = 0; nu < pair.calG.rows(); ++nu) {
        double lhs = pair.calG.row(nu).squaredNorm();
        double rhs = pair.calG(nu, nu).imag() / eta;
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        out.row_identity_calG = std::max(out.row_identity_calG, std::abs(lhs - rhs) / scale);
        out.max_abs_err = std::max(out.max_abs_err, std::abs(lhs - rhs));
    }
    {
        const auto& sig = config.spectrum.sigmas;
        double lhs = 0.0;
        Complex tr{};
        for (int i = 0; i < pair.G.rows(); ++i) {
            lhs += pair.G.col(i).squaredNorm() * sig[i] * sig[i];
            tr += pair.G(i, i) * sig[i] * sig[i];
        }
        double rhs = tr.imag() / eta;
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        out.frobenius_identity = std::abs(lhs - rhs) / scale;
        out.max_abs_err = std::max(out.max_abs_err, std::abs(lhs - rhs));
    }
    return out;
}

Eigen::VectorXcd profile_Pi2(const ModelConfig& config, const std::vector<double>& xi_squared,
                             Complex z, Complex* m1n_out) {
    StieltjesTriple t = solve_system(config, xi_squared, z);
    if (m1n_out) *m1n_out = t.m1;
    Eigen::VectorXcd pi2(config.n);
    for (int j = 0; j < config.n; ++j)
        pi2(j) = -1.0 / (z * (1.0 + t.m1 * xi_squared[j]));
    return pi2;
}

std::vector<EntrywiseRow> verify_entrywise(const ModelConfig& config,
                                           const std::vector<double>& xi_squared,
                                           const Eigen::MatrixXd& W,
                                           const std::vector<Complex>& z_grid) {
    const double p = config.p;
    const double slack = std::pow(static_cast<double>(config.n), 0.1);
    std::vector<EntrywiseRow> rows;
    rows.reserve(z_grid.size());
    for (Complex z : z_grid) {
        ResolventPair pair = resolvent_pair(config, xi_squared, W, z);
        Complex m1n;
        Eigen::VectorXcd pi2 = profile_Pi2(config, xi_squared, z, &m1n);

        EntrywiseRow row;
        row.z = z;
        Eigen::MatrixXcd diff = pair.calG;
        diff.diagonal() -= pi2;
        row.max_err = diff.cwiseAbs().maxCoeff();
        Eigen::MatrixXcd off = pair.calG;
        off.diagonal().setZero();
        row.off_diag_max = off.cwiseAbs().maxCoeff();
        double eta = z.imag();
        row.bound = std::sqrt(std::max(0.0, m1n.imag()) / (p * eta)) + 1.0 / (p * eta);
        row.ratio = row.max_err / row.bound;
        row.flagged = row.ratio > slack;
        rows.push_back(row);
    }
    return rows;
}

std::vector<AveragedRow> verify_averaged(const ModelConfig& config,
                                         const std::vector<double>& xi_squared,
                                         const Eigen::MatrixXd& W,
                                         const std::vector<Complex>& z_grid, double lambda_plus) {
    const double p = config.p;
    const double slack = std::pow(static_cast<double>(config.n), 0.1);
    const double eps_e = 0.1;
    StieltjesSystem system = StieltjesSystem::conditional(config, xi_squared);

    std::vector<AveragedRow> rows;
    rows.reserve(z_grid.size());
    for (Complex z : z_grid) {
        ResolventPair pair = resolvent_pair(config, xi_squared, W, z);
        StieltjesTriple t = system.solve(z);

        AveragedRow row;
        row.z = z;
        row.err = std::abs(t.m1 - pair.m1) + std::abs(t.m - pair.m);
        double eta = z.imag();
        row.bound_peta = 1.0 / (p * eta);
        row.ratio_peta = row.err / row.bound_peta;
        double kappa = std::abs(z.real() - lambda_plus);
        bool edge_grid = z.real() >= lambda_plus &&
                         p * eta * std::sqrt(kappa + eta) >= std::pow(p, eps_e);
        if (edge_grid) {
            row.bound_edge = 1.0 / (p * (kappa + eta)) +
                             1.0 / ((p * eta) * (p * eta) * std::sqrt(kappa + eta));
            row.ratio_edge = row.err / row.bound_edge;
        }
        row.flagged = row.ratio_peta > slack || (edge_grid && row.ratio_edge > slack);
        rows.push_back(row);
    }
    return rows;
}

Complex minor_m1(const ModelConfig& config, const std::vector<double>& xi_squared,
                 const Eigen::MatrixXd& W, Complex z, int removed_column) {
    Eigen::MatrixXd V = assemble_V(config, xi_squared, W);
    Eigen::MatrixXd Vm(V.rows(), V.cols() - 1);
    int c = 0;
    for (int j = 0; j < V.cols(); ++j)
        if (j != removed_column) Vm.col(c++) = V.col(j);
    Eigen::MatrixXcd A = (Vm * Vm.transpose()).cast<Complex>();
    A.diagonal().array() -= z;
    Eigen::MatrixXcd G = Eigen::PartialPivLU<Eigen::MatrixXcd>(A).inverse();
    Complex m1{};
    for (int i = 0; i < config.p; ++i) m1 += config.spectrum.sigmas[i] * G(i, i);
    return m1 / static_cast<double>(config.p);
}

std::vector<ComparisonRow> compare_ensembles_greenfn(
    const ModelConfig& config, const std::vector<double>& xi_squared,
    const std::function<double(double)>& F, const std::vector<double>& E_grid, double lambda_plus,
    int n_pairs, std::mt19937_64& rng, double epsilon) {
    const double n = static_cast<double>(config.n);
    const double eta0 = std::pow(n, -2.0 / 3.0 - epsilon);
    const double window = std::pow(n, -2.0 / 3.0 + epsilon);
    for (double E : E_grid)
        if (std::abs(E - lambda_plus) > window * (1.0 + 1e-9))
            throw std::invalid_argument("compare_ensembles_greenfn: E outside the edge window");

    // integrated variant over [E1, E2] = grid extremes
    const double E1 = *std::min_element(E_grid.begin(), E_grid.end());
    const double E2 = *std::max_element(E_grid.begin(), E_grid.end());
    const int n_int = 17;

    auto m_of = [&](const Eigen::VectorXd& eigs, Complex z) {
        Complex acc{};
        for (int i = 0; i < eigs.size(); ++i) acc += 1.0 / (eigs(i) - z);
        return acc / static_cast<double>(config.p);
    };

    std::vector<std::vector<double>> diffs(E_grid.size());
    std::vector<double> diffs_int;
    diffs_int.reserve(n_pairs);

    for (int pair = 0; pair < n_pairs; ++pair) {
        Eigen::VectorXd eigs[2];
        for (int which = 0; which < 2; ++which) {
            Eigen::MatrixXd W = sample_W(config, rng, which == 1);
            Eigen::MatrixXd V = assemble_V(config, xi_squared, W);
            Eigen::MatrixXd gram = (config.n <= config.p) ? Eigen::MatrixXd(V.transpose() * V)
                                                          : Eigen::MatrixXd(V * V.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
            Eigen::VectorXd ev = es.eigenvalues();
            if (config.n <= config.p) {
                // pad the p x p spectrum's zeros; they contribute 1/(0 - z)
                Eigen::VectorXd full(config.p);
                int zeros = config.p - config.n;
                full.head(zeros).setZero();
                full.tail(config.n) = ev;
                ev = full;
            }
            eigs[which] = ev;
        }
        for (std::size_t k = 0; k < E_grid.size(); ++k) {
            Complex z(E_grid[k], eta0);
            double a = F(n * eta0 * m_of(eigs[0], z).imag());
            double b = F(n * eta0 * m_of(eigs[1], z).imag());
            diffs[k].push_back(a - b);
        }
        double acc[2] = {0.0, 0.0};
        for (int which = 0; which < 2; ++which) {
            double integral = 0.0, prev = 0.0;
            for (int j = 0; j < n_int; ++j) {
                double E = E1 + (E2 - E1) * j / (n_int - 1.0);
                double val = n * m_of(eigs[which], Complex(E, eta0)).imag();
                if (j > 0) integral += 0.5 * (val + prev) * (E2 - E1) / (n_int - 1.0);
                prev = val;
            }
            acc[which] = F(integral);
        }
        diffs_int.push_back(acc[0] - acc[1]);
    }

    auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        s2 = v.size() > 1 ? s2 / (v.size() - 1.0) : 0.0;
        return std::pair<double, double>(m, std::sqrt(s2 / v.size()));
    };

    std::vector<ComparisonRow> rows;
    auto [mi, si] = mean_se(diffs_int);
    for (std::size_t k = 0; k < E_grid.size(); ++k) {
        auto [m, s] = mean_se(diffs[k]);
        ComparisonRow row;
        row.E = E_grid[k];
        row.diff = m;
        row.se = s;
        row.diff_int = mi;
        row.se_int = si;
        rows.push_back(row);
    }
    return rows;
}

} // namespace elliptw
