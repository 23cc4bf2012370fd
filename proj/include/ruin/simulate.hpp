#pragma once

// Path simulation of the resampled risk process.
//
// Inside one state the process is cut at the next claim or resampling epoch (an
// Exp(f_i) horizon). Over such an interval the Brownian part contributes an
// exponential maximum A+ followed by an exponential drop A-, then the claim B (if
// the interval ended with a claim). Ruin is detected at the interval maximum and
// right after each claim.
//
// run_importance_sampling draws these pieces under the twisted measure Q and carries
// the likelihood ratio dP/dQ in log space; run_crude draws them under P.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "ruin/errors.hpp"
#include "ruin/model.hpp"
#include "ruin/random.hpp"
#include "ruin/spectral.hpp"
#include "ruin/twist.hpp"

namespace ruin {

inline constexpr std::size_t kDefaultEventCap = 10'000'000;

enum class Crossing { DiffusionMax, ClaimJump };

struct RunOutcome {
    double likelihood = 1.0;
    double log_likelihood = 0.0;
    Crossing crossing = Crossing::DiffusionMax;
    bool in_switch_interval = false;  // diffusion crossing inside the interval closed by resampling
    std::size_t cycles = 0;           // environment draws, counting the first
    std::size_t final_state = 0;
    double x_at_crossing = 0.0;
    std::size_t claims_seen = 0;
    std::size_t events = 0;
};

namespace detail {

struct StateDynamics {
    double claim_probability = 0.0;  // lambda / f: the interval ends with a claim
    double rate_plus = 0.0;
    double rate_minus = 0.0;
    const ClaimDistribution* claims = nullptr;
};

inline std::size_t draw_state(const std::vector<double>& cumulative, RandomStream& gen) {
    const double u = uniform01(gen);
    std::size_t i = 0;
    while (i + 1 < cumulative.size() && u >= cumulative[i]) ++i;
    return i;
}

inline std::vector<double> cumulative(const std::vector<double>& p) {
    std::vector<double> c(p.size());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = (s += p[i]);
    return c;
}

inline void require_positive_level(double u) {
    if (!(u > 0.0) || !std::isfinite(u)) throw ValidationError("initial reserve u must be positive and finite");
}

}  // namespace detail

class ImportanceSampler {
public:
    ImportanceSampler(const TwistedModel& tw, double u, std::size_t event_cap = kDefaultEventCap)
        : u_(u), omega_(tw.omega_star), event_cap_(event_cap), cum_p_q_(detail::cumulative(tw.p_q)) {
        detail::require_positive_level(u);
        if (!(tw.cycle_drift_q > 0.0))
            throw ValidationError("twisted cycle drift is not positive; ruin is not certain under Q");
        for (std::size_t i = 0; i < tw.dim(); ++i) {
            State s;
            const LevyComponent& c = tw.components[i];
            const LevyComponent& cq = tw.components_q[i];
            s.dyn = {cq.lambda / tw.f_q[i], tw.wh_q[i].plus, tw.wh_q[i].minus, &cq.claims};
            s.log_draw = std::log(tw.p[i] / tw.p_q[i]);
            s.log_claim_event = c.has_claims() ? std::log(tw.f_q[i] / tw.f[i]) + std::log(c.lambda / cq.lambda) : 0.0;
            s.log_switch_event = std::log(tw.f_q[i] / tw.f[i]) + std::log(tw.q / tw.q_q[i]);
            s.log_plus = std::log(tw.wh[i].plus / tw.wh_q[i].plus);
            s.excess_plus = tw.wh[i].plus - tw.wh_q[i].plus;
            s.log_minus = std::log(tw.wh[i].minus / tw.wh_q[i].minus);
            s.excess_minus = tw.wh[i].minus - tw.wh_q[i].minus;
            s.log_b = std::log(tw.b_at_twist[i]);
            states_.push_back(s);
        }
    }

    double level() const noexcept { return u_; }

    RunOutcome run(RandomStream& gen) const {
        RunOutcome out;
        double x = 0.0;
        double log_l = 0.0;
        auto finish = [&](Crossing how, bool switching, std::size_t state) {
            out.crossing = how;
            out.in_switch_interval = switching;
            out.final_state = state;
            out.x_at_crossing = x;
            out.log_likelihood = log_l;
            out.likelihood = std::exp(log_l);
            return out;
        };
        auto count_event = [&]() {
            if (++out.events > event_cap_) {
                std::ostringstream os;
                os << "importance-sampling run exceeded " << event_cap_ << " events; check the twisted model";
                throw NumericalError(NumericalError::Kind::EventCap, os.str());
            }
        };

        for (;;) {
            const std::size_t i = detail::draw_state(cum_p_q_, gen);
            const State& s = states_[i];
            ++out.cycles;
            log_l += s.log_draw;

            while (uniform01(gen) < s.dyn.claim_probability) {
                count_event();
                log_l += s.log_claim_event;
                const double up = standard_exponential(gen) / s.dyn.rate_plus;
                x += up;
                log_l += s.log_plus - s.excess_plus * up;
                if (x >= u_) return finish(Crossing::DiffusionMax, false, i);
                const double down = standard_exponential(gen) / s.dyn.rate_minus;
                x -= down;
                log_l += s.log_minus - s.excess_minus * down;
                const double claim = s.dyn.claims->sample(gen);
                ++out.claims_seen;
                x += claim;
                log_l += s.log_b - omega_ * claim;
                if (x >= u_) return finish(Crossing::ClaimJump, false, i);
            }

            count_event();
            log_l += s.log_switch_event;
            const double up = standard_exponential(gen) / s.dyn.rate_plus;
            x += up;
            log_l += s.log_plus - s.excess_plus * up;
            if (x >= u_) return finish(Crossing::DiffusionMax, true, i);
            const double down = standard_exponential(gen) / s.dyn.rate_minus;
            x -= down;
            log_l += s.log_minus - s.excess_minus * down;
        }
    }

private:
    struct State {
        detail::StateDynamics dyn;
        double log_draw = 0.0;
        double log_claim_event = 0.0;
        double log_switch_event = 0.0;
        double log_plus = 0.0;
        double excess_plus = 0.0;
        double log_minus = 0.0;
        double excess_minus = 0.0;
        double log_b = 0.0;
    };

    double u_;
    double omega_;
    std::size_t event_cap_;
    std::vector<double> cum_p_q_;
    std::vector<State> states_;
};

// log L + omega* X(tau) for a finished run. Complete cycles contribute nothing, so only
// the interval in which u was reached is left over:
//   claim jump                              log(p_I / p_I^Q)
//   Brownian maximum, claim interval        log(p_I / p_I^Q) + log gamma_I
//   Brownian maximum, resampling interval   log(alpha_-^Q / alpha_-)
inline double terminal_log_factor(const TwistedModel& tw, const RunOutcome& run) {
    const std::size_t i = run.final_state;
    if (run.crossing == Crossing::DiffusionMax && run.in_switch_interval) return std::log(tw.switch_crossing_factor(i));
    double v = std::log(tw.p[i] / tw.p_q[i]);
    if (run.crossing == Crossing::DiffusionMax) v += std::log(tw.gamma[i]);
    return v;
}

// Residual of log L = -omega* X(tau) + terminal_log_factor, scaled by 1 + |log L|.
inline double reconciliation_residual(const TwistedModel& tw, const RunOutcome& run) {
    const double expect = -tw.omega_star * run.x_at_crossing + terminal_log_factor(tw, run);
    return std::abs(run.log_likelihood - expect) / (1.0 + std::abs(run.log_likelihood));
}

inline RunOutcome run_importance_sampling(const TwistedModel& tw, double u, RandomStream& gen) {
    return ImportanceSampler(tw, u).run(gen);
}

// Plain simulation under P. A run is declared safe once X falls below
// -max(50/omega*, 25u); the Lundberg bound makes the truncation bias negligible.
class CrudeSampler {
public:
    CrudeSampler(const TwistedModel& tw, double u, std::size_t event_cap = kDefaultEventCap)
        : u_(u), floor_(-std::max(50.0 / tw.omega_star, 25.0 * u)), event_cap_(event_cap),
          cum_p_(detail::cumulative(tw.p)) {
        detail::require_positive_level(u);
        for (std::size_t i = 0; i < tw.dim(); ++i) {
            const LevyComponent& c = tw.components[i];
            states_.push_back({c.lambda / tw.f[i], tw.wh[i].plus, tw.wh[i].minus, &c.claims});
        }
    }

    double floor() const noexcept { return floor_; }

    int run(RandomStream& gen) const {
        double x = 0.0;
        std::size_t events = 0;
        auto count_event = [&]() {
            if (++events > event_cap_) {
                std::ostringstream os;
                os << "crude run exceeded " << event_cap_ << " events";
                throw NumericalError(NumericalError::Kind::EventCap, os.str());
            }
        };
        for (;;) {
            const detail::StateDynamics& s = states_[detail::draw_state(cum_p_, gen)];
            while (uniform01(gen) < s.claim_probability) {
                count_event();
                x += standard_exponential(gen) / s.rate_plus;
                if (x >= u_) return 1;
                x -= standard_exponential(gen) / s.rate_minus;
                if (x < floor_) return 0;
                x += s.claims->sample(gen);
                if (x >= u_) return 1;
            }
            count_event();
            x += standard_exponential(gen) / s.rate_plus;
            if (x >= u_) return 1;
            x -= standard_exponential(gen) / s.rate_minus;
            if (x < floor_) return 0;
        }
    }

private:
    double u_;
    double floor_;
    std::size_t event_cap_;
    std::vector<double> cum_p_;
    std::vector<detail::StateDynamics> states_;
};

inline int run_crude(const TwistedModel& tw, double u, RandomStream& gen) { return CrudeSampler(tw, u).run(gen); }

// One complete resampling cycle Y = X(T_n) - X(T_{n-1}) without any barrier, under Q
// (twisted = true) or P.
inline double sample_cycle_increment(const TwistedModel& tw, bool twisted, RandomStream& gen) {
    const std::vector<double>& p = twisted ? tw.p_q : tw.p;
    const std::size_t i = detail::draw_state(detail::cumulative(p), gen);
    const LevyComponent& c = twisted ? tw.components_q[i] : tw.components[i];
    const double f = twisted ? tw.f_q[i] : tw.f[i];
    const WienerHopfRates& wh = twisted ? tw.wh_q[i] : tw.wh[i];
    double y = 0.0;
    while (uniform01(gen) < c.lambda / f) {
        y += standard_exponential(gen) / wh.plus - standard_exponential(gen) / wh.minus;
        y += c.claims.sample(gen);
    }
    return y + standard_exponential(gen) / wh.plus - standard_exponential(gen) / wh.minus;
}

enum class Method { ImportanceSampling, Crude };

inline const char* method_name(Method m) { return m == Method::ImportanceSampling ? "is" : "crude"; }

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t runs = 0;
    double relative_error = 0.0;
    Method method = Method::ImportanceSampling;
    std::uint64_t seed = 0;
};

// Mean, standard error and 95% normal interval of per-run values, summed in index order.
inline Estimate summarize(const std::vector<double>& values, Method method, std::uint64_t seed) {
    Estimate e;
    e.method = method;
    e.seed = seed;
    e.runs = values.size();
    if (values.empty()) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double n = static_cast<double>(values.size());
    e.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    constexpr double z = 1.959963984540054;
    e.ci_low = e.mean - z * e.std_error;
    e.ci_high = e.mean + z * e.std_error;
    e.relative_error = e.mean > 0.0 ? e.std_error / e.mean : std::numeric_limits<double>::infinity();
    return e;
}

// Calls body(index) for every index in [0, n) on `jobs` threads; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t j = 0; j < n; ++j) body(j);
        return;
    }
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t j = w; j < n; j += jobs) body(j);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct EstimateOptions {
    std::size_t runs = 10000;
    std::uint64_t seed = 1;
    Method method = Method::ImportanceSampling;
    unsigned jobs = 1;
};

// Run j always uses substream(seed, j), so the result does not depend on `jobs`.
inline Estimate estimate(const TwistedModel& tw, double u, const EstimateOptions& opt) {
    if (opt.runs < 2) throw ValidationError("an estimate needs at least two runs");
    std::vector<double> values(opt.runs);
    if (opt.method == Method::ImportanceSampling) {
        const ImportanceSampler sampler(tw, u);
        parallel_for(opt.runs, opt.jobs, [&](std::size_t j) {
            RandomStream gen = substream(opt.seed, j);
            values[j] = sampler.run(gen).likelihood;
        });
    } else {
        const CrudeSampler sampler(tw, u);
        parallel_for(opt.runs, opt.jobs, [&](std::size_t j) {
            RandomStream gen = substream(opt.seed, j);
            values[j] = sampler.run(gen);
        });
    }
    return summarize(values, opt.method, opt.seed);
}

inline Estimate estimate(const RiskModel& model, double u, const EstimateOptions& opt) {
    return estimate(twist_model(model), u, opt);
}

struct RelativeErrorPoint {
    double u = 0.0;
    double relative_error = 0.0;
};

inline std::vector<RelativeErrorPoint> relative_error_profile(const RiskModel& model, const std::vector<double>& levels,
                                                              std::size_t runs, std::uint64_t seed, unsigned jobs = 1) {
    const TwistedModel tw = twist_model(model);
    std::vector<RelativeErrorPoint> out;
    for (double u : levels) {
        const Estimate e = estimate(tw, u, {runs, seed, Method::ImportanceSampling, jobs});
        out.push_back({u, e.relative_error});
    }
    return out;
}

}  // namespace ruin
