#include "elliptw/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace elliptw {

PopulationSpectrum PopulationSpectrum::identity(int p) {
    PopulationSpectrum s;
    s.sigmas.assign(static_cast<std::size_t>(p), 1.0);
    return s;
}

PopulationSpectrum PopulationSpectrum::two_atom(int p, double sigma_a, double sigma_b, double weight) {
    if (weight < 0.0 || weight > 1.0) throw std::invalid_argument("two_atom: weight must be in [0,1]");
    PopulationSpectrum s;
    double hi = std::max(sigma_a, sigma_b), lo = std::min(sigma_a, sigma_b);
    double w_hi = (sigma_a >= sigma_b) ? weight : 1.0 - weight;
    int n_hi = static_cast<int>(std::lround(w_hi * p));
    s.sigmas.assign(static_cast<std::size_t>(n_hi), hi);
    s.sigmas.resize(static_cast<std::size_t>(p), lo);
    return s;
}

PopulationSpectrum PopulationSpectrum::from_file(int p, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("spectrum file not readable: " + path);
    PopulationSpectrum s;
    double v;
    while (in >> v) s.sigmas.push_back(v);
    if (static_cast<int>(s.sigmas.size()) != p) {
        std::ostringstream msg;
        msg << "spectrum file " << path << " holds " << s.sigmas.size() << " values, expected p=" << p;
        throw std::runtime_error(msg.str());
    }
    std::sort(s.sigmas.begin(), s.sigmas.end(), std::greater<double>());
    return s;
}

RadialLaw RadialLaw::parametric(double l, double d, double b) {
    RadialLaw law;
    law.kind = Kind::parametric;
    law.l = l;
    law.d = d;
    law.b = b;
    return law;
}

RadialLaw RadialLaw::point_mass(double value) {
    return empirical({value});
}

RadialLaw RadialLaw::empirical(std::vector<double> atoms, std::vector<double> weights) {
    RadialLaw law;
    law.kind = Kind::empirical;
    law.atoms = std::move(atoms);
    law.weights = std::move(weights);
    law.l = law.atoms.empty() ? 0.0 : *std::max_element(law.atoms.begin(), law.atoms.end());
    law.d = 0.0;
    law.b = 1.0;
    return law;
}

double RadialLaw::mean() const {
    if (kind == Kind::parametric) {
        // E[l(1-B)] with B ~ Beta(d+1, b)
        return l * b / (d + 1.0 + b);
    }
    if (atoms.empty()) return 0.0;
    if (weights.empty())
        return std::accumulate(atoms.begin(), atoms.end(), 0.0) / static_cast<double>(atoms.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        num += weights[i] * atoms[i];
        den += weights[i];
    }
    return num / den;
}

double radial_cdf(const RadialLaw& law, double x) {
    if (law.kind == RadialLaw::Kind::empirical) {
        if (law.atoms.empty()) throw std::logic_error("radial_cdf: empirical law without point masses");
        double mass = 0.0, total = 0.0;
        for (std::size_t i = 0; i < law.atoms.size(); ++i) {
            double w = law.weights.empty() ? 1.0 : law.weights[i];
            total += w;
            if (law.atoms[i] <= x) mass += w;
        }
        return mass / total;
    }
    if (x <= 0.0) return 0.0;
    if (x >= law.l) return 1.0;
    double u = x / law.l;
    if (law.b == 1.0) return 1.0 - std::pow(1.0 - u, law.d + 1.0);
    // P(xi^2 <= x) = P(B >= 1 - x/l) = I_{x/l}(b, d+1)
    return boost::math::ibeta(law.b, law.d + 1.0, u);
}

std::vector<std::string> validate(const ModelConfig& config) {
    std::vector<std::string> violations;
    std::ostringstream msg;
    auto emit = [&]() {
        violations.push_back(msg.str());
        msg.str("");
    };

    if (config.p <= 0 || config.n <= 0) {
        msg << "dimensions must be positive: p=" << config.p << ", n=" << config.n;
        emit();
        return violations;
    }
    if (!(config.tau > 0.0 && config.tau < 1.0)) {
        msg << "tau=" << config.tau << " outside (0,1)";
        emit();
    }

    double phi = config.phi();
    if (config.tau > 0.0 && config.tau < 1.0) {
        if (phi < config.tau) {
            msg << "phi=" << phi << " below tau=" << config.tau;
            emit();
        }
        if (phi > 1.0 / config.tau) {
            msg << "phi=" << phi << " exceeds tau^-1=" << 1.0 / config.tau;
            emit();
        }
    }

    const auto& sig = config.spectrum.sigmas;
    if (static_cast<int>(sig.size()) != config.p) {
        msg << "spectrum has " << sig.size() << " eigenvalues, expected p=" << config.p;
        emit();
    }
    for (std::size_t i = 0; i + 1 < sig.size(); ++i) {
        if (sig[i] < sig[i + 1]) {
            msg << "spectrum not nonincreasing at index " << i + 1 << " (" << sig[i] << " < " << sig[i + 1] << ")";
            emit();
            break;
        }
    }
    if (!sig.empty() && config.tau > 0.0 && config.tau < 1.0) {
        if (sig.back() < config.tau) {
            msg << "sigma_p=" << sig.back() << " below tau=" << config.tau;
            emit();
        }
        if (sig.front() > 1.0 / config.tau) {
            msg << "sigma_1=" << sig.front() << " exceeds tau^-1=" << 1.0 / config.tau;
            emit();
        }
    }

    const auto& law = config.radial;
    if (!(law.l > 0.0)) {
        msg << "radial support bound l=" << law.l << " not positive";
        emit();
    }
    if (law.kind == RadialLaw::Kind::parametric) {
        if (!(law.d > -1.0)) {
            msg << "edge exponent d=" << law.d << " not greater than -1";
            emit();
        }
        if (!(law.b > 0.0)) {
            msg << "shape b=" << law.b << " not positive";
            emit();
        }
    } else {
        if (law.atoms.empty()) {
            msg << "empirical radial law without point masses";
            emit();
        }
        for (double a : law.atoms) {
            if (a <= 0.0 || a > law.l) {
                msg << "radial atom " << a << " outside (0, l=" << law.l << "]";
                emit();
                break;
            }
        }
    }
    return violations;
}

} // namespace elliptw
