#pragma once

// Exponential change of measure at omega* and the Lundberg-type constant Omega.
//
// Under Q the environment draws state i with p_i^Q = p_i q / (q - phi_i(-omega*)) and
// leaves it at rate q_i^Q = q - phi_i(-omega*); each regime is tilted so that
// phi_i^Q(a) = phi_i(a - omega*) - phi_i(-omega*).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "ruin/errors.hpp"
#include "ruin/model.hpp"
#include "ruin/spectral.hpp"

namespace ruin {

// Rates of the running maximum (plus) and of the drop from it (minus) for a Brownian
// motion with exponent r a + sigma2 a^2 / 2, watched over an Exp(f) horizon.
struct WienerHopfRates {
    double plus = 0.0;
    double minus = 0.0;
};

inline WienerHopfRates wiener_hopf_rates(double r, double sigma2, double f) {
    if (!(sigma2 > 0.0)) throw ValidationError("Wiener-Hopf rates need a positive Brownian variance");
    if (!(f > 0.0)) throw ValidationError("Wiener-Hopf rates need a positive horizon rate");
    const double s = std::sqrt(r * r + 2.0 * f * sigma2);
    // the larger root by its own formula, the smaller through plus * minus = 2 f / sigma2
    if (r >= 0.0) {
        const double plus = (s + r) / sigma2;
        return {plus, 2.0 * f / (s + r)};
    }
    const double minus = (s - r) / sigma2;
    return {2.0 * f / (s - r), minus};
}

struct TwistedModel {
    double omega_star = 0.0;
    double q = 0.0;
    std::vector<double> p;
    std::vector<double> p_q;
    std::vector<double> q_q;          // state exit rates under Q
    std::vector<double> b_at_twist;   // b_i(-omega*), 1 for states without claims
    std::vector<LevyComponent> components;
    std::vector<LevyComponent> components_q;
    std::vector<double> f;            // lambda_i + q
    std::vector<double> f_q;          // lambda_i^Q + q_i^Q
    std::vector<WienerHopfRates> wh;
    std::vector<WienerHopfRates> wh_q;
    std::vector<double> gamma;        // (lambda/lambda^Q)(f^Q/f)(alpha_+/alpha_+^Q)
    std::vector<double> gamma_alt;    // (1/b(-omega*)) alpha_-^Q / alpha_-
    double omega_big = 0.0;
    double cycle_drift_q = 0.0;       // E_Q Y, the mean cycle increment under Q

    std::size_t dim() const noexcept { return p.size(); }

    // alpha_-^Q / alpha_-: the terminal likelihood factor when u is reached by the
    // Brownian maximum inside the interval that ends with a resampling epoch.
    double switch_crossing_factor(std::size_t i) const { return wh_q[i].minus / wh[i].minus; }

    // Largest terminal factor L exp(omega* X(tau)) any path can carry.
    double path_bound_constant() const {
        double c = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) {
            const double pr = p[i] / p_q[i];
            c = std::max({c, pr, pr * gamma[i], switch_crossing_factor(i)});
        }
        return c;
    }
};

inline TwistedModel twist_model(const RiskModel& model, double omega_star) {
    const std::size_t d = model.dim();
    for (const auto& c : model.components)
        if (!(c.sigma2 > 0.0))
            throw ValidationError("the change of measure needs sigma2 > 0 in every state (use a small epsilon)");

    TwistedModel tw;
    tw.omega_star = omega_star;
    tw.q = model.q;
    tw.p = model.p;
    tw.components = model.components;
    double simplex = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const LevyComponent& c = model.components[i];
        if (!c.in_domain(-omega_star)) {
            std::ostringstream os;
            os << "twist " << omega_star << " leaves the claim family of state " << i;
            throw DomainError(os.str());
        }
        const double phi_w = laplace_exponent(c, -omega_star);
        const double qq = model.q - phi_w;
        if (!(qq > 0.0)) throw DomainError("twisted switch rate q - phi_i(-omega*) must be positive");
        tw.q_q.push_back(qq);
        tw.p_q.push_back(model.p[i] * model.q / qq);
        simplex += tw.p_q.back();

        LevyComponent cq = c;
        cq.drift = c.drift - omega_star * c.sigma2;
        double b = 1.0;
        if (c.has_claims()) {
            b = c.claims.laplace(-omega_star);
            cq.lambda = c.lambda * b;
            cq.claims = c.claims.twisted(omega_star);
        }
        tw.b_at_twist.push_back(b);
        tw.components_q.push_back(cq);

        tw.f.push_back(c.lambda + model.q);
        tw.f_q.push_back(cq.lambda + qq);
        tw.wh.push_back(wiener_hopf_rates(c.drift, c.sigma2, tw.f.back()));
        tw.wh_q.push_back(wiener_hopf_rates(cq.drift, c.sigma2, tw.f_q.back()));

        const WienerHopfRates& a = tw.wh.back();
        const WienerHopfRates& aq = tw.wh_q.back();
        const double tol = 1e-8;
        if (std::abs(aq.plus - (a.plus - omega_star)) > tol * std::max(1.0, a.plus) ||
            std::abs(aq.minus - (a.minus + omega_star)) > tol * std::max(1.0, a.minus)) {
            std::ostringstream os;
            os << "state " << i << ": twisted Wiener-Hopf rates are not the omega*-shift of the originals";
            throw NumericalError(NumericalError::Kind::Consistency, os.str());
        }

        const double lambda_ratio = c.has_claims() ? c.lambda / cq.lambda : 1.0 / b;
        const double g = lambda_ratio * (tw.f_q.back() / tw.f.back()) * (a.plus / aq.plus);
        const double g_alt = aq.minus / (a.minus * b);
        if (std::abs(g - g_alt) > 1e-10 * std::max(std::abs(g), std::abs(g_alt))) {
            std::ostringstream os;
            os << "state " << i << ": the two expressions for gamma disagree (" << g << " vs " << g_alt << ")";
            throw NumericalError(NumericalError::Kind::Consistency, os.str());
        }
        tw.gamma.push_back(g);
        tw.gamma_alt.push_back(g_alt);

        tw.cycle_drift_q -= model.p[i] * model.q * laplace_exponent_derivative(c, -omega_star) / (qq * qq);
    }
    if (std::abs(simplex - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "twisted resampling law sums to " << simplex << "; omega = " << omega_star
           << " is not the adjustment coefficient";
        throw ValidationError(os.str());
    }

    for (std::size_t i = 0; i < d; ++i)
        tw.omega_big = std::max(tw.omega_big, tw.q_q[i] / model.q * std::max(tw.gamma[i], 1.0));
    return tw;
}

inline TwistedModel twist_model(const RiskModel& model) {
    require_valid(model);
    return twist_model(model, adjustment_coefficient(model));
}

inline double lundberg_constant(const TwistedModel& tw) { return tw.omega_big; }

// min(1, Omega exp(-omega* u)).
inline double lundberg_bound(const TwistedModel& tw, double u) {
    return std::min(1.0, tw.omega_big * std::exp(-tw.omega_star * u));
}

}  // namespace ruin
