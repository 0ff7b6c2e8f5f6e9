#include "elliptw/tracy_widom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace elliptw {

namespace {

// --------------------------------------------------------------------------
// Dormand-Prince 5(4) adaptive stepper, direction-agnostic. Per-component
// absolute tolerances: the Painleve pass needs pure relative control on the
// exponentially small q (an absolute floor would license relative slips that
// the backward instability amplifies), while the slaved integral components
// keep an absolute floor near their zeros.
template <class Real, std::size_t N, class RHS>
void rk45_integrate_v(RHS&& f, Real t0, Real t1, std::array<Real, N>& y,
                      Real rtol, const std::array<Real, N>& atol) {
    if (t0 == t1) return;
    const Real dir = (t1 > t0) ? Real(1) : Real(-1);
    Real t = t0;
    Real h = dir * std::min(Real(0.1), std::abs(t1 - t0));

    std::array<Real, N> k1, k2, k3, k4, k5, k6, k7, tmp, y5, y4;
    f(t, y, k1);
    int guard = 0;
    while (dir * (t1 - t) > 0.0) {
        if (++guard > 2000000) throw std::runtime_error("rk45: step limit exceeded");
        if (dir * (t + h - t1) > 0.0) h = t1 - t;

        auto stage = [&](const std::array<Real, N>& base, Real tt, std::array<Real, N>& out) {
            f(tt, base, out);
        };
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (1.0 / 5.0) * k1[i];
        stage(tmp, t + h / 5.0, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
        stage(tmp, t + 3.0 * h / 10.0, k3);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] + 32.0 / 9.0 * k3[i]);
        stage(tmp, t + 4.0 * h / 5.0, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] +
                                 64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i]);
        stage(tmp, t + 8.0 * h / 9.0, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] +
                                 46732.0 / 5247.0 * k3[i] + 49.0 / 176.0 * k4[i] -
                                 5103.0 / 18656.0 * k5[i]);
        stage(tmp, t + h, k6);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] + 125.0 / 192.0 * k4[i] -
                                2187.0 / 6784.0 * k5[i] + 11.0 / 84.0 * k6[i]);
        stage(y5, t + h, k7);
        for (std::size_t i = 0; i < N; ++i)
            y4[i] = y[i] + h * (5179.0 / 57600.0 * k1[i] + 7571.0 / 16695.0 * k3[i] +
                                393.0 / 640.0 * k4[i] - 92097.0 / 339200.0 * k5[i] +
                                187.0 / 2100.0 * k6[i] + 1.0 / 40.0 * k7[i]);

        Real err = Real(0);
        for (std::size_t i = 0; i < N; ++i) {
            Real sc = atol[i] + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            Real e = (y5[i] - y4[i]) / sc;
            err += e * e;
        }
        err = std::sqrt(err / Real(N));

        if (err <= Real(1) || std::abs(h) < Real(1e-14)) {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        Real fac = (err > Real(0)) ? Real(0.9) * std::pow(err, Real(-0.2)) : Real(5);
        h *= std::clamp(fac, Real(0.2), Real(5));
        if (!std::isfinite(static_cast<double>(err))) throw std::runtime_error("rk45: non-finite state");
    }
}

template <std::size_t N, class RHS>
void rk45_integrate(RHS&& f, double t0, double t1, std::array<double, N>& y,
                    double rtol, double atol_all) {
    std::array<double, N> atol;
    atol.fill(atol_all);
    rk45_integrate_v<double, N>(f, t0, t1, y, rtol, atol);
}

// --------------------------------------------------------------------------
// Airy pieces.
constexpr double kAi0 = 0.35502805388781723926;  // Ai(0)
constexpr double kAip0 = 0.25881940379280679840; // -Ai'(0)
constexpr double kSeriesEdge = 2.5;
constexpr double kAsymEdge = 26.0;

struct AiryPair {
    double v, vp;
};

AiryPair airy_series(double x, bool bi) {
    // Ai = c1 f - c2 g, Bi = sqrt(3)(c1 f + c2 g)
    double f = 1.0, fp = 0.0, g = x, gp = 1.0;
    double tf = 1.0, tg = x;
    const double x3 = x * x * x;
    for (int k = 1; k < 80; ++k) {
        tf *= x3 / ((3.0 * k) * (3.0 * k - 1.0));
        tg *= x3 / ((3.0 * k + 1.0) * (3.0 * k));
        f += tf;
        g += tg;
        if (x != 0.0) {
            fp += tf * 3.0 * k / x;
            gp += tg * (3.0 * k + 1.0) / x;
        }
        if (std::abs(tf) < 1e-18 * std::abs(f) && std::abs(tg) < 1e-18 * std::max(1.0, std::abs(g)))
            break;
    }
    if (!bi) return {kAi0 * f - kAip0 * g, kAi0 * fp - kAip0 * gp};
    const double s3 = std::sqrt(3.0);
    return {s3 * (kAi0 * f + kAip0 * g), s3 * (kAi0 * fp + kAip0 * gp)};
}

AiryPair airy_asymptotic(double x, bool bi) {
    // DLMF 9.7: Ai ~ e^{-z}/(2 sqrt(pi) x^{1/4}) sum (-1)^k u_k z^{-k}, etc.
    const double zeta = (2.0 / 3.0) * std::pow(x, 1.5);
    double u = 1.0, su = 1.0, sv = 1.0;
    double term = 1.0;
    for (int k = 1; k < 30; ++k) {
        u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0));
        double tu = u / std::pow(zeta, k);
        double tv = tu * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        double sgn = bi ? 1.0 : ((k % 2) ? -1.0 : 1.0);
        su += sgn * tu;
        sv += sgn * tv;
        if (tu < 1e-18) break;
        term = tu;
    }
    (void)term;
    const double sq = std::sqrt(M_PI);
    const double x4 = std::pow(x, 0.25);
    if (!bi) {
        double e = std::exp(-zeta);
        return {e / (2.0 * sq * x4) * su, -x4 * e / (2.0 * sq) * sv};
    }
    double e = std::exp(zeta);
    return {e / (sq * x4) * su, x4 * e / sq * sv};
}

AiryPair airy_ai_pair(double x) {
    if (x < -kSeriesEdge) throw std::domain_error("airy: argument below -2.5 unsupported");
    if (x <= kSeriesEdge) return airy_series(x, false);
    if (x >= kAsymEdge) return airy_asymptotic(x, false);
    // Bridge: Ai grows relative to Bi when integrating backward, so the
    // asymptotic boundary data stays accurate down to x.
    std::array<double, 2> y{};
    AiryPair start = airy_asymptotic(kAsymEdge, false);
    y[0] = start.v;
    y[1] = start.vp;
    rk45_integrate<2>([](double t, const std::array<double, 2>& s, std::array<double, 2>& d) {
        d[0] = s[1];
        d[1] = t * s[0];
    }, kAsymEdge, x, y, 1e-13, 0.0);
    return {y[0], y[1]};
}

AiryPair airy_bi_pair(double x) {
    if (x < -kSeriesEdge) throw std::domain_error("airy: argument below -2.5 unsupported");
    if (x <= kSeriesEdge) return airy_series(x, true);
    if (x >= kAsymEdge) return airy_asymptotic(x, true);
    // Bi is the forward-growing solution; start from the series edge.
    std::array<double, 2> y{};
    AiryPair start = airy_series(kSeriesEdge, true);
    y[0] = start.v;
    y[1] = start.vp;
    rk45_integrate<2>([](double t, const std::array<double, 2>& s, std::array<double, 2>& d) {
        d[0] = s[1];
        d[1] = t * s[0];
    }, kSeriesEdge, x, y, 1e-13, 0.0);
    return {y[0], y[1]};
}

/// Airy boundary data at x >= 10 in extended precision: asymptotic series at
/// the far edge, then the stable backward bridge. Relative accuracy ~1e-17,
/// which the backward Painleve instability needs to keep q(-10) meaningful.
void airy_ai_longdouble(long double x, long double& ai, long double& aip) {
    const long double edge = 26.0L;
    long double xs = std::max(x, edge);
    const long double zeta = (2.0L / 3.0L) * std::pow(xs, 1.5L);
    long double u = 1.0L, su = 1.0L, sv = 1.0L, zp = 1.0L;
    for (int k = 1; k < 40; ++k) {
        u *= (6.0L * k - 5.0L) * (6.0L * k - 3.0L) * (6.0L * k - 1.0L) /
             (216.0L * k * (2.0L * k - 1.0L));
        zp *= zeta;
        long double tu = u / zp;
        long double tv = tu * (6.0L * k + 1.0L) / (1.0L - 6.0L * k);
        long double sgn = (k % 2) ? -1.0L : 1.0L;
        su += sgn * tu;
        sv += sgn * tv;
        if (tu < 1e-22L) break;
    }
    const long double sq = std::sqrt(static_cast<long double>(M_PI));
    const long double x4 = std::pow(xs, 0.25L);
    long double e = std::exp(-zeta);
    ai = e / (2.0L * sq * x4) * su;
    aip = -x4 * e / (2.0L * sq) * sv;
    if (x < edge) {
        std::array<long double, 2> y{ai, aip};
        rk45_integrate_v<long double, 2>(
            [](long double t, const std::array<long double, 2>& s, std::array<long double, 2>& d) {
                d[0] = s[1];
                d[1] = t * s[0];
            },
            edge, x, y, 2e-18L, {0.0L, 0.0L});
        ai = y[0];
        aip = y[1];
    }
}

double ai_tail_integral_asymptotic(double x) {
    // Int_x^inf Ai = (1/(2 sqrt(pi))) sqrt(2/3) Gamma(1/2, zeta) plus Airy
    // series corrections; at the asymptotic edge the first terms suffice.
    const double zeta = (2.0 / 3.0) * std::pow(x, 1.5);
    double s = 1.0 - 1.0 / (2.0 * zeta) + 3.0 / (4.0 * zeta * zeta) - 15.0 / (8.0 * zeta * zeta * zeta);
    return std::exp(-zeta) / (2.0 * std::sqrt(M_PI)) * std::sqrt(2.0 / 3.0) / std::sqrt(zeta) * s;
}

} // namespace

double airy_ai(double x) { return airy_ai_pair(x).v; }
double airy_ai_prime(double x) { return airy_ai_pair(x).vp; }
double airy_bi(double x) { return airy_bi_pair(x).v; }
double airy_bi_prime(double x) { return airy_bi_pair(x).vp; }

double airy_ai_tail_integral(double x) {
    if (x < kSeriesEdge) throw std::domain_error("airy_ai_tail_integral: x below 2.5");
    if (x >= kAsymEdge) return ai_tail_integral_asymptotic(x);
    // carry the integral along the stable backward pass
    std::array<double, 3> y{};
    AiryPair start = airy_asymptotic(kAsymEdge, false);
    y[0] = start.v;
    y[1] = start.vp;
    y[2] = ai_tail_integral_asymptotic(kAsymEdge);
    rk45_integrate<3>([](double t, const std::array<double, 3>& s, std::array<double, 3>& d) {
        d[0] = s[1];
        d[1] = t * s[0];
        d[2] = -s[0];
    }, kAsymEdge, x, y, 1e-13, 0.0);
    return y[2];
}

// --------------------------------------------------------------------------

TW1Table build_table(const TWBuildOptions& opts) {
    if (!(opts.s_min < -8.0)) throw std::invalid_argument("build_table: s_min must be < -8");
    if (!(opts.s_max > 5.0)) throw std::invalid_argument("build_table: s_max must be > 5");

    const int n = static_cast<int>(std::llround((opts.s_max - opts.s_min) / opts.step)) + 1;
    TW1Table table;
    table.step = opts.step;
    table.s_grid.resize(n);
    table.q_values.resize(n);
    table.F1_values.resize(n);
    for (int i = 0; i < n; ++i) table.s_grid[i] = opts.s_min + i * opts.step;

    // Boundary data sit at s0 >= 10 even when the table stops earlier: the
    // Hastings-McLeod solution differs from Ai by a relative
    // O(exp(-(4/3) s^{3/2})) term (1e-10 at s = 6, 5e-19 at s = 10), and the
    // backward instability amplifies boundary errors by exp(0.94 |s|^{3/2}).
    // The pass runs in long double for the same reason; with both, q stays
    // on the branch to a few 1e-4 at s = -10.
    const long double s0 = std::max(10.0, opts.s_max);
    long double ai0, aip0;
    airy_ai_longdouble(s0, ai0, aip0);

    // state: q, q', I1 = Int q, J = Int q^2, K = Int x q^2 (all over [s, inf))
    std::array<long double, 5> y{};
    y[0] = ai0;
    y[1] = aip0;
    y[2] = ai_tail_integral_asymptotic(static_cast<double>(s0));
    y[3] = aip0 * aip0 - s0 * ai0 * ai0;                                // Int Ai^2
    y[4] = (s0 * aip0 * aip0 - s0 * s0 * ai0 * ai0 - ai0 * aip0) / 3.0L; // Int x Ai^2

    auto rhs = [](long double s, const std::array<long double, 5>& v,
                  std::array<long double, 5>& d) {
        d[0] = v[1];
        d[1] = s * v[0] + 2.0L * v[0] * v[0] * v[0];
        d[2] = -v[0];
        d[3] = -v[0] * v[0];
        d[4] = -s * v[0] * v[0];
    };

    // pure relative control on (q, q'); absolute floor only on the slaved
    // integrals, whose errors do not feed back into the trajectory
    const long double rtol = std::min(static_cast<long double>(opts.rel_tol), 2e-18L);
    const long double ifloor = static_cast<long double>(opts.abs_tol);
    const std::array<long double, 5> atol = {0.0L, 0.0L, ifloor, ifloor, ifloor};
    if (s0 > opts.s_max)
        rk45_integrate_v<long double, 5>(rhs, s0, static_cast<long double>(opts.s_max), y, rtol, atol);

    for (int i = n - 1; i >= 0; --i) {
        long double s = table.s_grid[i];
        if (i < n - 1)
            rk45_integrate_v<long double, 5>(rhs, static_cast<long double>(table.s_grid[i + 1]), s,
                                             y, rtol, atol);

        double q = static_cast<double>(y[0]);
        double envelope = 3.0 * (1.0 + std::sqrt(std::max(0.0, -static_cast<double>(s)) / 2.0));
        if (!std::isfinite(q) || std::abs(q) > envelope || q < -0.5) {
            std::ostringstream msg;
            msg << "build_table: Hastings-McLeod branch lost near s=" << static_cast<double>(s)
                << " (q=" << q << ")";
            throw std::runtime_error(msg.str());
        }
        table.q_values[i] = q;
        double I2 = static_cast<double>(y[4] - s * y[3]);
        table.F1_values[i] = std::exp(-0.5 * (I2 + static_cast<double>(y[2])));
    }
    return table;
}

double TW1Table::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s_grid.size(); ++i)
        acc += 0.5 * (s_grid[i] + s_grid[i + 1]) * (F1_values[i + 1] - F1_values[i]);
    return acc;
}

double TW1Table::variance() const {
    double m = mean(), acc = 0.0;
    for (std::size_t i = 0; i + 1 < s_grid.size(); ++i) {
        double mid = 0.5 * (s_grid[i] + s_grid[i + 1]);
        acc += mid * mid * (F1_values[i + 1] - F1_values[i]);
    }
    return acc - m * m;
}

void TW1Table::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "s,q,F1\n";
    out.precision(17);
    for (std::size_t i = 0; i < s_grid.size(); ++i)
        out << s_grid[i] << ',' << q_values[i] << ',' << F1_values[i] << '\n';
}

TW1Table TW1Table::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    TW1Table table;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double s, q, f;
        row >> s >> q >> f;
        table.s_grid.push_back(s);
        table.q_values.push_back(q);
        table.F1_values.push_back(f);
    }
    if (table.s_grid.size() > 1) table.step = table.s_grid[1] - table.s_grid[0];
    return table;
}

namespace {

/// Fritsch-Carlson slopes keep the interpolant monotone wherever the data is.
double hermite_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const std::size_t n = xs.size();
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    std::size_t i = static_cast<std::size_t>((x - xs.front()) / (xs[1] - xs[0]));
    i = std::min(i, n - 2);
    while (x < xs[i]) --i;
    while (x > xs[i + 1]) ++i;

    auto secant = [&](std::size_t k) { return (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]); };
    auto slope = [&](std::size_t k) -> double {
        if (k == 0) return secant(0);
        if (k == n - 1) return secant(n - 2);
        double dl = secant(k - 1), dr = secant(k);
        if (dl * dr <= 0.0) return 0.0;
        double m = 0.5 * (dl + dr);
        double cap = 3.0 * std::min(std::abs(dl), std::abs(dr)); // keeps the cubic monotone
        if (std::abs(m) > cap) m = (m > 0 ? cap : -cap);
        return m;
    };

    double h = xs[i + 1] - xs[i];
    double t = (x - xs[i]) / h;
    double y0 = ys[i], y1 = ys[i + 1], m0 = slope(i) * h, m1 = slope(i + 1) * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * m1;
}

} // namespace

double tw1_cdf(const TW1Table& table, double s) {
    if (s <= table.s_grid.front()) return 0.0;
    if (s >= table.s_grid.back()) return 1.0;
    return std::clamp(hermite_eval(table.s_grid, table.F1_values, s), 0.0, 1.0);
}

double tw1_quantile(const TW1Table& table, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("tw1_quantile: u must be in (0,1)");
    double lo = table.s_grid.front(), hi = table.s_grid.back();
    if (u <= tw1_cdf(table, lo)) return lo;
    if (u >= tw1_cdf(table, hi)) return hi;
    for (int k = 0; k < 100; ++k) {
        double mid = 0.5 * (lo + hi);
        if (tw1_cdf(table, mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double ks_distance(std::vector<double> samples, const TW1Table& table) {
    if (samples.size() < 1) throw std::invalid_argument("ks_distance: need samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double F = tw1_cdf(table, samples[i]);
        ks = std::max(ks, std::max(F - static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n - F));
    }
    return ks;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        ks = std::max(ks, std::abs(static_cast<double>(i) / a.size() -
                                   static_cast<double>(j) / b.size()));
    }
    return ks;
}

} // namespace elliptw
