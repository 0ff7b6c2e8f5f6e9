#include "elliptw/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "elliptw/rng.hpp"

namespace elliptw {

Eigen::VectorXd sample_sphere(int p, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd u(p);
    for (int i = 0; i < p; ++i) u(i) = gauss(rng);
    u /= u.norm();
    return u;
}

Realization sample_realization(const ModelConfig& config, std::mt19937_64& rng) {
    const RadialLaw& law = config.radial;
    Realization r;
    r.xi_squared.resize(config.n);

    if (law.kind == RadialLaw::Kind::empirical) {
        if (law.atoms.empty()) throw std::logic_error("sample_realization: empirical law without atoms");
        if (law.weights.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, law.atoms.size() - 1);
            for (auto& x : r.xi_squared) x = law.atoms[pick(rng)];
        } else {
            std::discrete_distribution<std::size_t> pick(law.weights.begin(), law.weights.end());
            for (auto& x : r.xi_squared) x = law.atoms[pick(rng)];
        }
    } else if (law.b == 1.0) {
        // closed-form inverse CDF: B = U^{1/(d+1)}
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double inv_a = 1.0 / (law.d + 1.0);
        for (auto& x : r.xi_squared) {
            double u = unif(rng);
            x = law.l * (1.0 - std::pow(u, inv_a));
            if (x <= 0.0) x = law.l * 1e-300;
        }
    } else {
        std::gamma_distribution<double> ga(law.d + 1.0, 1.0), gb(law.b, 1.0);
        for (auto& x : r.xi_squared) {
            double a = ga(rng), b = gb(rng);
            double beta = a / (a + b);
            x = law.l * (1.0 - beta);
            if (x <= 0.0) x = law.l * 1e-300;
        }
    }

    // order-statistics part of the omega report is free
    double m1 = 0.0, m2 = 0.0;
    for (double x : r.xi_squared) {
        if (x > m1) {
            m2 = m1;
            m1 = x;
        } else if (x > m2) {
            m2 = x;
        }
    }
    r.omega.gap1 = law.l - m1;
    r.omega.spacing = m1 - m2;
    const double n = static_cast<double>(config.n);
    const double d = (law.kind == RadialLaw::Kind::parametric) ? law.d : 0.0;
    const double scale = std::pow(n, -1.0 / (d + 1.0));
    const double logn = std::log(n);
    r.omega.gap1_pass = r.omega.gap1 > scale / logn && r.omega.gap1 < scale * logn;
    r.omega.spacing_pass = r.omega.spacing > scale / logn;
    return r;
}

std::vector<Complex> default_omega_grid(const ModelConfig& config, double edge) {
    const double eta = std::pow(static_cast<double>(config.n), -2.0 / 3.0);
    std::vector<Complex> grid;
    grid.reserve(20);
    for (int k = 0; k < 20; ++k)
        grid.emplace_back(edge - 0.5 + k * (1.0 / 19.0), eta);
    return grid;
}

OmegaReport check_omega(const ModelConfig& config, const Realization& realization,
                        const std::vector<Complex>& z_grid, const OmegaOptions& opts) {
    OmegaReport report = realization.omega;
    if (z_grid.empty()) {
        report.lln_pass = true;
        report.lln_sup_error = 0.0;
        return report;
    }

    StieltjesSystem conditional = StieltjesSystem::conditional(config, realization.xi_squared);
    RadialMoments limit_moments(make_rule(config.radial), config.phi());

    const double n = static_cast<double>(config.n);
    double sup_err = 0.0;
    bool solver_ok = true;
    std::optional<Complex> warm;
    for (Complex z : z_grid) {
        try {
            StieltjesTriple t = conditional.solve(z, SolveOptions{}, warm);
            warm = t.m1;
            // phi * g(m1) is exactly n^{-1} sum xi^2/(1+xi^2 m1) resp. the integral
            Complex emp = config.phi() * conditional.moments().g(t.m1);
            Complex lim = config.phi() * limit_moments.g(t.m1);
            sup_err = std::max(sup_err, std::abs(emp - lim));
        } catch (const SolverFailure&) {
            solver_ok = false;
        }
    }
    report.lln_sup_error = sup_err;
    double threshold = opts.C * std::pow(n, opts.epsilon) / std::sqrt(n);
    report.lln_pass = solver_ok && sup_err <= threshold;
    return report;
}

std::vector<double> build_Q(const ModelConfig& config, const Realization& realization,
                            std::mt19937_64& rng, Ensemble ensemble, int k) {
    const int p = config.p, n = config.n;
    if (k > std::min(p, n)) throw std::invalid_argument("build_Q: k exceeds min(p,n)");

    Eigen::MatrixXd Y(p, n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd col(p);
        for (int i = 0; i < p; ++i) col(i) = gauss(rng);
        if (ensemble == Ensemble::elliptical)
            col /= col.norm();
        else
            col *= inv_sqrt_p;
        col *= std::sqrt(realization.xi_squared[j]);
        Y.col(j) = col;
    }
    for (int i = 0; i < p; ++i) Y.row(i) *= std::sqrt(config.spectrum.sigmas[i]);

    Eigen::MatrixXd gram;
    if (n <= p)
        gram.noalias() = Y.transpose() * Y;
    else
        gram.noalias() = Y * Y.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues(); // increasing
    std::vector<double> top(k);
    for (int i = 0; i < k; ++i) top[i] = std::max(0.0, ev(ev.size() - 1 - i));
    return top;
}

TrialRecord run_trial(const ModelConfig& config, double gamma0, std::uint64_t seed_base,
                      std::uint64_t trial_index, const TrialOptions& opts) {
    std::mt19937_64 rng = make_stream(seed_base, trial_index);
    TrialRecord record;
    record.seed = trial_index;

    Realization realization = sample_realization(config, rng);
    realization.seed = trial_index;

    try {
        EdgeReport edge = find_edge(config, SystemMode::empirical, &realization.xi_squared, opts.edge);
        record.lambda_plus = edge.edge;
    } catch (const std::exception&) {
        record.edge_failed = true;
    }

    const double scale = gamma0 * std::pow(static_cast<double>(config.n), 2.0 / 3.0);
    if (opts.elliptical) {
        record.top_eigs_Q = build_Q(config, realization, rng, Ensemble::elliptical, opts.k_top);
        if (!record.edge_failed)
            record.rescaled_stat = scale * (record.top_eigs_Q.front() - record.lambda_plus);
    }
    if (opts.gaussian) {
        record.top_eigs_QG = build_Q(config, realization, rng, Ensemble::gaussian, opts.k_top);
        if (!record.edge_failed) {
            record.rescaled_stat_gaussian = scale * (record.top_eigs_QG.front() - record.lambda_plus);
            if (!opts.elliptical) record.rescaled_stat = record.rescaled_stat_gaussian;
        }
    }

    OmegaReport omega = check_omega(config, realization, opts.omega_grid);
    record.omega_pass = omega.gap1_pass && omega.spacing_pass && omega.lln_pass;
    return record;
}

} // namespace elliptw
