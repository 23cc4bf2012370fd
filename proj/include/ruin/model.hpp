#pragma once

// Resampled Levy risk model: claim laws, per-state Laplace exponents and the
// admissibility checks every downstream computation relies on.
//
// Sign convention: X is the net cumulative claim process (claims minus
// premium), and phi(alpha) = log E exp(-alpha X(1)). The drift condition
// kappa = sum_i p_i phi_i'(0) > 0 says X drifts to -infinity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ruin/errors.hpp"
#include "ruin/random.hpp"

namespace ruin {

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kDomainMargin = 1e-9;
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

class ClaimDistribution {
public:
    enum class Kind { Exponential, Hyperexponential };

    static ClaimDistribution exponential(double rate) {
        return ClaimDistribution(Kind::Exponential, {1.0}, {rate});
    }

    static ClaimDistribution hyperexponential(std::vector<double> weights, std::vector<double> rates) {
        return ClaimDistribution(Kind::Hyperexponential, std::move(weights), std::move(rates));
    }

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& rates() const noexcept { return rates_; }

    double min_rate() const { return *std::min_element(rates_.begin(), rates_.end()); }

    double mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) m += weights_[k] / rates_[k];
        return m;
    }

    bool in_domain(double alpha) const noexcept { return alpha > -min_rate(); }

    // E exp(-alpha B).
    double laplace(double alpha) const {
        check_domain(alpha);
        double b = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) b += weights_[k] * rates_[k] / (rates_[k] + alpha);
        return b;
    }

    double laplace_derivative(double alpha) const {
        check_domain(alpha);
        double db = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            const double s = rates_[k] + alpha;
            db -= weights_[k] * rates_[k] / (s * s);
        }
        return db;
    }

    // Law with density proportional to exp(omega x) times the original density.
    // Exp(mu) -> Exp(mu - omega); mixtures reweight by mu_k / (mu_k - omega).
    ClaimDistribution twisted(double omega) const {
        if (!(omega < min_rate())) {
            std::ostringstream os;
            os << "exponential twist " << omega << " leaves the claim family (min rate " << min_rate() << ")";
            throw DomainError(os.str());
        }
        std::vector<double> w(weights_.size());
        std::vector<double> r(rates_.size());
        double total = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            r[k] = rates_[k] - omega;
            w[k] = weights_[k] * rates_[k] / r[k];
            total += w[k];
        }
        for (double& wk : w) wk /= total;
        return ClaimDistribution(kind_, std::move(w), std::move(r));
    }

    double sample(RandomStream& gen) const {
        std::size_t k = 0;
        if (rates_.size() > 1) {
            double u = uniform01(gen);
            while (k + 1 < weights_.size() && u >= weights_[k]) {
                u -= weights_[k];
                ++k;
            }
        }
        return standard_exponential(gen) / rates_[k];
    }

private:
    ClaimDistribution(Kind kind, std::vector<double> weights, std::vector<double> rates)
        : kind_(kind), weights_(std::move(weights)), rates_(std::move(rates)) {
        if (rates_.empty() || rates_.size() != weights_.size())
            throw ValidationError("claim distribution needs matching, non-empty weights and rates");
        double total = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            if (!(rates_[k] > 0.0) || !std::isfinite(rates_[k]))
                throw ValidationError("claim rates must be positive and finite");
            if (!(weights_[k] >= 0.0)) throw ValidationError("claim weights must be non-negative");
            total += weights_[k];
        }
        if (std::abs(total - 1.0) > kSimplexTolerance)
            throw ValidationError("claim weights must sum to 1");
    }

    void check_domain(double alpha) const {
        if (!in_domain(alpha)) {
            std::ostringstream os;
            os << "claim transform undefined at alpha = " << alpha << " (pole at " << -min_rate() << ")";
            throw DomainError(os.str());
        }
    }

    Kind kind_;
    std::vector<double> weights_;
    std::vector<double> rates_;
};

struct LevyComponent {
    double drift = 0.0;   // premium rate r
    double sigma2 = 0.0;  // Brownian variance per unit time
    double lambda = 0.0;  // claim arrival rate
    ClaimDistribution claims = ClaimDistribution::exponential(1.0);

    bool has_claims() const noexcept { return lambda > 0.0; }

    // Claims only restrict the domain when they actually arrive.
    bool in_domain(double alpha) const noexcept { return !has_claims() || claims.in_domain(alpha); }
};

// phi(alpha) = r alpha + sigma^2 alpha^2 / 2 - lambda + lambda b(alpha).
inline double laplace_exponent(const LevyComponent& c, double alpha) {
    double v = c.drift * alpha + 0.5 * c.sigma2 * alpha * alpha;
    if (c.has_claims()) v += c.lambda * (c.claims.laplace(alpha) - 1.0);
    return v;
}

inline double laplace_exponent_derivative(const LevyComponent& c, double alpha) {
    double v = c.drift + c.sigma2 * alpha;
    if (c.has_claims()) v += c.lambda * c.claims.laplace_derivative(alpha);
    return v;
}

struct RiskModel {
    double q = 1.0;                          // resampling intensity
    std::vector<double> p;                   // resampling law over states
    std::vector<LevyComponent> components;   // one Levy regime per state

    std::size_t dim() const noexcept { return components.size(); }

    double phi(std::size_t i, double alpha) const { return laplace_exponent(components[i], alpha); }
    double dphi(std::size_t i, double alpha) const { return laplace_exponent_derivative(components[i], alpha); }

    bool in_domain(double alpha) const noexcept {
        return std::all_of(components.begin(), components.end(),
                           [alpha](const LevyComponent& c) { return c.in_domain(alpha); });
    }
};

// kappa = sum_i p_i phi_i'(0).
inline double mean_drift(const RiskModel& model) {
    double kappa = 0.0;
    for (std::size_t i = 0; i < model.dim(); ++i) kappa += model.p[i] * model.dphi(i, 0.0);
    return kappa;
}

// Supremum of omega > 0 with b_i(-omega) finite and phi_i(-omega) < q - margin for
// every state. Each phi_i(-omega) is convex in omega and starts at 0, so the
// admissible set is an interval (0, omega_max). Returns kUnbounded when no cap exists.
inline double domain_bound(const RiskModel& model) {
    const auto admissible = [&model](double omega) {
        for (std::size_t i = 0; i < model.dim(); ++i) {
            const LevyComponent& c = model.components[i];
            if (!c.in_domain(-omega)) return false;
            if (!(laplace_exponent(c, -omega) < model.q - kDomainMargin)) return false;
        }
        return true;
    };

    double lo = 0.0;
    double hi = 1.0;
    while (admissible(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) return kUnbounded;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (admissible(mid) ? lo : hi) = mid;
    }
    return lo;
}

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }

    std::string summary() const {
        if (ok()) return "valid";
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v;
        }
        return s;
    }
};

inline ValidationReport validate(const RiskModel& model) {
    ValidationReport report;
    auto fail = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };

    const std::size_t d = model.dim();
    if (d == 0) fail("model needs at least one state");
    if (model.p.size() != d) fail("probability vector length differs from the number of states");
    if (!(model.q > 0.0) || !std::isfinite(model.q)) fail("resampling intensity q must be positive and finite");

    bool simplex_ok = model.p.size() == d && d > 0;
    for (double pi : model.p) {
        if (!(pi >= 0.0 && pi <= 1.0)) {
            fail("probabilities must lie in [0, 1]");
            simplex_ok = false;
            break;
        }
    }
    const double total = std::accumulate(model.p.begin(), model.p.end(), 0.0);
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        fail("probabilities do not sum to 1");
        simplex_ok = false;
    }

    bool components_ok = true;
    for (std::size_t i = 0; i < d; ++i) {
        const LevyComponent& c = model.components[i];
        if (!(c.sigma2 >= 0.0) || !std::isfinite(c.sigma2)) {
            fail("state " + std::to_string(i) + ": Brownian variance must be non-negative");
            components_ok = false;
        }
        if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) {
            fail("state " + std::to_string(i) + ": claim arrival rate must be non-negative");
            components_ok = false;
        }
        if (!std::isfinite(c.drift)) {
            fail("state " + std::to_string(i) + ": drift must be finite");
            components_ok = false;
        }
    }

    if (simplex_ok && components_ok && model.q > 0.0) {
        const double kappa = mean_drift(model);
        if (!(kappa > 0.0)) {
            std::ostringstream os;
            os << "drift condition violated: kappa = " << kappa << " <= 0";
            fail(os.str());
        }
        if (!(domain_bound(model) > 0.0)) fail("no admissible exponential moment: omega_max = 0");
    }
    return report;
}

inline void require_valid(const RiskModel& model) {
    const ValidationReport report = validate(model);
    if (!report.ok()) throw ValidationError(report.summary());
}

// The Levy process with exponent sum_i p_i phi_i, i.e. the model with resampling
// ignored. Claims become the p_i lambda_i mixture of the state claim laws. The
// result has one state; its q only sets the (irrelevant) cycle length.
inline RiskModel averaged_model(const RiskModel& model, double q = 1.0) {
    LevyComponent avg;
    std::vector<double> weights;
    std::vector<double> rates;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const LevyComponent& c = model.components[i];
        avg.drift += model.p[i] * c.drift;
        avg.sigma2 += model.p[i] * c.sigma2;
        if (!c.has_claims()) continue;
        avg.lambda += model.p[i] * c.lambda;
        for (std::size_t k = 0; k < c.claims.rates().size(); ++k) {
            const double w = model.p[i] * c.lambda * c.claims.weights()[k];
            const auto same = std::find(rates.begin(), rates.end(), c.claims.rates()[k]);
            if (same != rates.end()) {
                weights[static_cast<std::size_t>(same - rates.begin())] += w;
            } else {
                rates.push_back(c.claims.rates()[k]);
                weights.push_back(w);
            }
        }
    }
    if (rates.size() == 1) {
        avg.claims = ClaimDistribution::exponential(rates.front());
    } else if (!rates.empty()) {
        for (double& w : weights) w /= avg.lambda;
        avg.claims = ClaimDistribution::hyperexponential(weights, rates);
    }
    RiskModel out;
    out.q = q;
    out.p = {1.0};
    out.components = {avg};
    return out;
}

}  // namespace ruin
