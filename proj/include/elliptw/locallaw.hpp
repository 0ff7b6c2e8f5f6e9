#pragma once

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "elliptw/selfconsistent.hpp"

namespace elliptw {

/// Spectral parameter sets around the right-most edge.
struct SpectralDomain {
    enum class Kind { D, D0 };

    double lambda_plus = 0.0;
    double c_left = 0.0;      ///< default 0.5 * lambda_plus
    double C_right = 1.0;
    double epsilon_e = 0.1;
    Kind kind = Kind::D;

    static SpectralDomain around(double lambda_plus, Kind kind = Kind::D);

    double eta_min(int p) const; ///< p^{-1+epsilon_e} for kind D, 0 for D0
    bool contains(Complex z, int p) const;
    double kappa(double E) const { return std::abs(E - lambda_plus); }
};

struct ResolventPair {
    Complex z;
    Eigen::MatrixXcd G;    ///< (S - z)^{-1}, p x p
    Eigen::MatrixXcd calG; ///< (curly S - z)^{-1}, n x n
    Complex m;             ///< p^{-1} tr G
    Complex m1;            ///< p^{-1} tr(G Sigma)
    Complex m2;            ///< p^{-1} sum_i xi_i^2 calG_ii
};

/// Data matrix V = T W D for a stored W (p x n); W columns are sphere or
/// Gaussian vectors depending on how the caller sampled them.
Eigen::MatrixXd assemble_V(const ModelConfig& config, const std::vector<double>& xi_squared,
                           const Eigen::MatrixXd& W);
Eigen::MatrixXd sample_W(const ModelConfig& config, std::mt19937_64& rng, bool gaussian);

/// Dense complex factorizations of (S - z) and (curly S - z).
ResolventPair resolvent_pair(const ModelConfig& config, const std::vector<double>& xi_squared,
                             const Eigen::MatrixXd& W, Complex z);

struct WardCheck {
    double row_identity_G = 0.0;    ///< max_j rel err of sum_i |G_ji|^2 = |z|^2/eta Im(G_jj/z)
    double row_identity_calG = 0.0; ///< max_nu rel err of sum_mu |calG_numu|^2 = Im calG_nunu/eta
    double frobenius_identity = 0.0;///< rel err of ||G Sigma||_F^2 = Im tr(G Sigma^2)/eta
    double max_abs_err = 0.0;       ///< worst absolute defect across the three
};
WardCheck ward_check(const ModelConfig& config, const ResolventPair& pair);

/// Pi_2(z) = -z^{-1} (1 + m_1n(z) D^2)^{-1}; m_1n from the conditional system.
Eigen::VectorXcd profile_Pi2(const ModelConfig& config, const std::vector<double>& xi_squared,
                             Complex z, Complex* m1n_out = nullptr);

struct EntrywiseRow {
    Complex z;
    double max_err = 0.0;      ///< max_ij |calG - Pi2|_ij
    double off_diag_max = 0.0; ///< max_{i != j} |calG_ij|
    double bound = 0.0;        ///< sqrt(Im m_1n/(p eta)) + 1/(p eta)
    double ratio = 0.0;
    bool flagged = false;      ///< ratio > n^{0.1}
};
std::vector<EntrywiseRow> verify_entrywise(const ModelConfig& config,
                                           const std::vector<double>& xi_squared,
                                           const Eigen::MatrixXd& W,
                                           const std::vector<Complex>& z_grid);

struct AveragedRow {
    Complex z;
    double err = 0.0;           ///< |m_1n - m_1| + |m_n - m|
    double bound_peta = 0.0;    ///< (p eta)^{-1}
    double ratio_peta = 0.0;
    double bound_edge = 0.0;    ///< 1/(p(kappa+eta)) + 1/((p eta)^2 sqrt(kappa+eta)); right-of-edge grid only
    double ratio_edge = 0.0;    ///< 0 when the bound does not apply
    bool flagged = false;
};
std::vector<AveragedRow> verify_averaged(const ModelConfig& config,
                                         const std::vector<double>& xi_squared,
                                         const Eigen::MatrixXd& W,
                                         const std::vector<Complex>& z_grid, double lambda_plus);

/// m_1 of the column-deleted minor (test support for the |T|/(n eta) bound).
Complex minor_m1(const ModelConfig& config, const std::vector<double>& xi_squared,
                 const Eigen::MatrixXd& W, Complex z, int removed_column);

struct ComparisonRow {
    double E = 0.0;
    double diff = 0.0;     ///< mean F(n eta0 Im m) difference, elliptical - gaussian
    double se = 0.0;       ///< standard error of the paired difference
    double diff_int = 0.0; ///< integrated variant over [E1, E2]
    double se_int = 0.0;
};

/// Paired Monte-Carlo comparison of E F(n eta0 Im m(z)) between the sphere
/// and Gaussian ensembles, conditional on one realization of D. eta0 =
/// n^{-2/3-eps}; E-grid points must sit within n^{-2/3+eps} of the edge.
std::vector<ComparisonRow> compare_ensembles_greenfn(
    const ModelConfig& config, const std::vector<double>& xi_squared,
    const std::function<double(double)>& F, const std::vector<double>& E_grid, double lambda_plus,
    int n_pairs, std::mt19937_64& rng, double epsilon = 0.1);

} // namespace elliptw
