#pragma once

#include <string>
#include <vector>

namespace elliptw {

/// Airy functions, self-contained: Maclaurin series for |x| <= 2.5,
/// asymptotic expansions for large arguments, and a stable-direction ODE
/// bridge in between (backward from the asymptotic region for Ai, forward
/// from 0 for Bi). Valid for x >= -2.5.
double airy_ai(double x);
double airy_ai_prime(double x);
double airy_bi(double x);
double airy_bi_prime(double x);
/// Integral of Ai over [x, infinity), x >= 2.5.
double airy_ai_tail_integral(double x);

/// Numerical table of the type-1 Tracy-Widom CDF built from the
/// Hastings-McLeod solution of q'' = s q + 2 q^3:
///   F2(s) = exp(-Int_s^inf (x-s) q(x)^2 dx),
///   F1(s) = sqrt(F2(s)) * exp(-1/2 Int_s^inf q(x) dx).
struct TW1Table {
    std::vector<double> s_grid;   ///< uniform, increasing
    std::vector<double> q_values; ///< Hastings-McLeod q(s)
    std::vector<double> F1_values;
    double step = 0.0;

    double mean() const;     ///< Int s dF1 by the Stieltjes sum over the table
    double variance() const;

    void write_csv(const std::string& path) const;
    static TW1Table read_csv(const std::string& path);
};

struct TWBuildOptions {
    double s_min = -10.0;
    double s_max = 6.0;
    double step = 1e-3;
    double rel_tol = 1e-13; ///< adaptive integrator tolerance
    double abs_tol = 1e-16;
};

/// Integrates the Hastings-McLeod branch backward from s_max with boundary
/// data q = Ai, q' = Ai', carrying the three tail integrals in the same
/// adaptive pass; tails at s_max close analytically via Airy asymptotics.
/// Throws std::runtime_error naming the blow-up location if the branch is
/// lost before s_min.
TW1Table build_table(const TWBuildOptions& opts = {});

/// Monotone cubic (Fritsch-Carlson) interpolation of the table; clamped to
/// {0, 1} outside the grid.
double tw1_cdf(const TW1Table& table, double s);
/// Inverse by bisection on the monotone interpolant; u must be in (0,1).
double tw1_quantile(const TW1Table& table, double u);

/// sup_x |empirical CDF - F1| over the sorted samples.
double ks_distance(std::vector<double> samples, const TW1Table& table);
/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

} // namespace elliptw
