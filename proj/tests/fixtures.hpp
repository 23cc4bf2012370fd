#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ruin/ruin.hpp"

namespace fixtures {

inline ruin::LevyComponent component(double r, double sigma2, double lambda, double mu) {
    ruin::LevyComponent c;
    c.drift = r;
    c.sigma2 = sigma2;
    c.lambda = lambda;
    c.claims = ruin::ClaimDistribution::exponential(mu);
    return c;
}

// Two-state model of the numerical study: p = (2/3, 1/3), r = sigma2 = 1,
// lambda = (0.45, 1.8), Exp(mu) claims. The tables correspond to mu = 1.
inline ruin::RiskModel table_model(double q, double mu = 1.0) {
    ruin::RiskModel m;
    m.q = q;
    m.p = {2.0 / 3.0, 1.0 / 3.0};
    m.components = {component(1, 1, 0.45, mu), component(1, 1, 1.8, mu)};
    return m;
}

inline ruin::RiskModel single(double r, double sigma2, double lambda, double mu, double q = 1.0) {
    ruin::RiskModel m;
    m.q = q;
    m.p = {1.0};
    m.components = {component(r, sigma2, lambda, mu)};
    return m;
}

inline ruin::RiskModel symmetric(double q, double p1 = 0.5) {
    ruin::RiskModel m;
    m.q = q;
    m.p = {p1, 1.0 - p1};
    m.components = {component(2, 1, 1, 1), component(2, 1, 1, 1)};
    return m;
}

inline std::string data_path(const std::string& name) { return std::string(RUIN_TEST_DATA) + "/" + name; }

inline const std::vector<std::string>& corpus() {
    static const std::vector<std::string> names{"two_state_q075.json", "three_state.json", "symmetric.json",
                                                "single.json", "four_state.json"};
    return names;
}

inline ruin::RiskModel corpus_model(const std::string& name) { return ruin::load_model(data_path(name)); }

}  // namespace fixtures

namespace fixtures {

// Exact ruin probability of r t + sigma W - compound Poisson(lambda, Exp(mu)) claims:
// 1 - psi(u) = kappa W(u) with the scale function W read off 1/phi by partial fractions.
inline double exact_single_ruin(double r, double sigma2, double lambda, double mu, double u) {
    const double kappa = r - lambda / mu;
    // nonzero roots of phi(-w) = 0: sigma2/2 w^2 - (sigma2 mu/2 + r) w + (r mu - lambda) = 0
    const double a = 0.5 * sigma2, b = -(0.5 * sigma2 * mu + r), c = r * mu - lambda;
    const double disc = std::sqrt(b * b - 4 * a * c);
    const double r2 = (-b + disc) / (2 * a);
    const double r1 = c / (a * r2);
    const double w = (2.0 / sigma2) * (mu / (r1 * r2) + (mu - r1) / (-r1 * (r2 - r1)) * std::exp(-r1 * u) +
                                       (mu - r2) / (-r2 * (r1 - r2)) * std::exp(-r2 * u));
    return 1.0 - kappa * w;
}

}  // namespace fixtures
