#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "elliptw/edge.hpp"
#include "elliptw/selfconsistent.hpp"

namespace elliptw {

struct OmegaReport {
    double gap1 = 0.0;    ///< l - xi^2_(1)
    double spacing = 0.0; ///< xi^2_(1) - xi^2_(2)
    bool gap1_pass = false;
    bool spacing_pass = false;
    bool lln_pass = true; ///< trivially true on an empty z-grid
    double lln_sup_error = 0.0;
};

struct Realization {
    std::vector<double> xi_squared;
    std::uint64_t seed = 0;
    OmegaReport omega;
};

struct TrialRecord {
    std::uint64_t seed = 0;
    std::vector<double> top_eigs_Q;   ///< decreasing; empty if ensemble skipped
    std::vector<double> top_eigs_QG;
    double lambda_plus = 0.0;         ///< conditional edge for this realization
    double rescaled_stat = 0.0;       ///< gamma0 n^{2/3} (lambda_1 - lambda_plus)
    double rescaled_stat_gaussian = 0.0;
    bool omega_pass = false;
    bool edge_failed = false;         ///< excluded from statistics when set
};

enum class Ensemble { elliptical, gaussian };

/// Uniform draw from the unit sphere S^{p-1} (normalized Gaussian vector).
Eigen::VectorXd sample_sphere(int p, std::mt19937_64& rng);

/// n i.i.d. draws of xi^2 = l(1 - B), B ~ Beta(d+1, b); the b = 1 case uses
/// the closed-form inverse CDF. Empirical laws resample their atoms.
Realization sample_realization(const ModelConfig& config, std::mt19937_64& rng);

struct OmegaOptions {
    double C = 1.0;
    double epsilon = 0.05;
};

/// Default LLN grid: 20 points with E spanning [edge-0.5, edge+0.5] at
/// eta = n^{-2/3}.
std::vector<Complex> default_omega_grid(const ModelConfig& config, double edge);

/// Order-statistics windows and the law-of-large-numbers error of the
/// realization, per the high-probability event. The LLN term solves the
/// conditional system for m_1n(z) on the grid and compares the point-mass
/// average against the parametric-law integral at the same m_1n(z).
OmegaReport check_omega(const ModelConfig& config, const Realization& realization,
                        const std::vector<Complex>& z_grid, const OmegaOptions& opts = {});

/// Assembles Y = T W D (columns xi_i T w_i) and returns the top k eigenvalues
/// of Y Y^T via a dense symmetric eigensolver on the smaller Gram matrix.
std::vector<double> build_Q(const ModelConfig& config, const Realization& realization,
                            std::mt19937_64& rng, Ensemble ensemble, int k);

struct TrialOptions {
    int k_top = 3;
    bool elliptical = true;
    bool gaussian = false;
    std::vector<Complex> omega_grid; ///< empty = order-statistics flags only
    EdgeOptions edge;
};

/// One Monte-Carlo draw: sample a realization, locate its conditional edge,
/// build the requested ensembles (shared realization) and fill the rescaled
/// statistic with the limiting-system gamma0. Edge failures mark the record
/// excluded instead of throwing.
TrialRecord run_trial(const ModelConfig& config, double gamma0, std::uint64_t seed_base,
                      std::uint64_t trial_index, const TrialOptions& opts);

} // namespace elliptw
