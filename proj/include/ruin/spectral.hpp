#pragma once

// Eigen-structure of the matrix exponent M(alpha) = q e p^T - q I + diag(phi_i(alpha)).
//
// M is diagonal plus rank one, so its eigenvalues are the roots of the secular
// equation Psi_alpha(theta) = sum_i p_i / (q - phi_i(alpha) + theta) = 1/q,
// interlaced with the poles c_i = phi_i(alpha) - q. Poles that coincide (or carry
// zero weight) are deflated: the pole value itself is an eigenvalue, with
// eigenvectors supported on the merged states and orthogonal to p.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruin/errors.hpp"
#include "ruin/model.hpp"

namespace ruin {

inline constexpr double kPoleMergeTolerance = 1e-9;
inline constexpr double kPoleCollisionTolerance = 1e-12;

struct SpectralData {
    double alpha = 0.0;
    std::vector<double> theta;   // ascending
    std::vector<bool> deflated;  // true where theta[k] sits on a merged or zero-weight pole
    Eigen::MatrixXd S;           // columns are right eigenvectors, ordered as theta
    Eigen::MatrixXd S_inv;

    std::size_t dominant_index() const { return theta.size() - 1; }
    double dominant() const { return theta.back(); }
};

inline Eigen::MatrixXd matrix_exponent(const RiskModel& model, double alpha) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = model.q * model.p[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) += model.phi(static_cast<std::size_t>(i), alpha) - model.q;
    return m;
}

// Psi_alpha(theta).
inline double secular_function(const RiskModel& model, double alpha, double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.dim(); ++i) s += model.p[i] / (model.q - model.phi(i, alpha) + theta);
    return s;
}

// |Psi_alpha(theta) - 1/q| relative to the size of its terms, sum_i p_i/|q - phi_i + theta|.
// Near a pole the absolute residual is dominated by the rounding of theta itself.
inline double secular_residual(const RiskModel& model, double alpha, double theta) {
    double s = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const double x = model.q - model.phi(i, alpha) + theta;
        s += model.p[i] / x;
        mass += model.p[i] / std::abs(x);
    }
    return std::abs(s - 1.0 / model.q) / mass;
}

namespace detail {

struct PoleCluster {
    double center = 0.0;
    double weight = 0.0;
    std::vector<std::size_t> members;
};

inline void require_alpha_in_domain(const RiskModel& model, double alpha) {
    if (!model.in_domain(alpha)) {
        std::ostringstream os;
        os << "alpha = " << alpha << " lies outside the domain of the Laplace exponents";
        throw DomainError(os.str());
    }
}

// Poles c_i = phi_i(alpha) - q, sorted and merged when within the tolerance.
inline std::vector<PoleCluster> pole_clusters(const RiskModel& model, double alpha, std::vector<double>& poles) {
    const std::size_t d = model.dim();
    poles.resize(d);
    for (std::size_t i = 0; i < d; ++i) poles[i] = model.phi(i, alpha) - model.q;
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&poles](auto a, auto b) { return poles[a] < poles[b]; });

    std::vector<PoleCluster> clusters;
    for (std::size_t idx : order) {
        const double c = poles[idx];
        if (!clusters.empty()) {
            PoleCluster& last = clusters.back();
            const double first = poles[last.members.front()];
            if (c - first <= kPoleMergeTolerance * std::max(1.0, std::abs(first))) {
                last.members.push_back(idx);
                last.weight += model.p[idx];
                continue;
            }
        }
        clusters.push_back({c, model.p[idx], {idx}});
    }
    for (PoleCluster& cl : clusters) {
        double s = 0.0;
        for (std::size_t m : cl.members) s += poles[m];
        cl.center = s / static_cast<double>(cl.members.size());
    }
    return clusters;
}

// Root of sum_k w_k / (theta - c_k) = 1/q, located in (c[left], c[left] + width).
// The root is carried as an offset from the nearer pole to keep theta - c_k accurate.
inline double secular_root(const std::vector<double>& centers, const std::vector<double>& weights, double q,
                           std::size_t left, double width, bool top) {
    const double inv_q = 1.0 / q;
    auto eval = [&](std::size_t origin, double t, double* deriv) {
        double f = -inv_q;
        double df = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const double delta = (centers[origin] - centers[k]) + t;
            f += weights[k] / delta;
            df -= weights[k] / (delta * delta);
        }
        if (deriv) *deriv = df;
        return f;
    };

    std::size_t origin = left;
    double lo = 0.0;
    double hi = width;
    if (!top && eval(left, 0.5 * width, nullptr) > 0.0) {
        origin = left + 1;
        lo = -width;
        hi = 0.0;
    }
    // F is decreasing on the bracket: F(lo+) = +inf, F(hi-) < 0.
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (eval(origin, mid, nullptr) > 0.0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    double best = std::abs(eval(origin, t, nullptr));
    for (int it = 0; it < 5; ++it) {
        double df = 0.0;
        const double f = eval(origin, t, &df);
        if (f == 0.0 || df == 0.0) break;
        const double next = t - f / df;
        if (!(next > lo && next < hi)) break;
        const double fn = std::abs(eval(origin, next, nullptr));
        if (!(fn < best)) break;
        best = fn;
        t = next;
    }
    return centers[origin] + t;
}

struct Spectrum {
    std::vector<double> theta;
    std::vector<int> cluster;  // -1 for secular roots, else index of the deflated cluster
    std::vector<detail::PoleCluster> clusters;
    std::vector<double> poles;
};

inline Spectrum spectrum(const RiskModel& model, double alpha) {
    require_alpha_in_domain(model, alpha);
    Spectrum sp;
    sp.clusters = pole_clusters(model, alpha, sp.poles);

    std::vector<double> centers;
    std::vector<double> weights;
    std::vector<std::pair<double, int>> found;
    for (std::size_t c = 0; c < sp.clusters.size(); ++c) {
        const PoleCluster& cl = sp.clusters[c];
        const std::size_t copies = cl.weight > 0.0 ? cl.members.size() - 1 : cl.members.size();
        for (std::size_t k = 0; k < copies; ++k) found.emplace_back(cl.center, static_cast<int>(c));
        if (cl.weight > 0.0) {
            centers.push_back(cl.center);
            weights.push_back(cl.weight);
        }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const bool top = k + 1 == centers.size();
        const double width = top ? model.q : centers[k + 1] - centers[k];
        found.emplace_back(secular_root(centers, weights, model.q, k, width, top), -1);
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [value, cl] : found) {
        sp.theta.push_back(value);
        sp.cluster.push_back(cl);
    }
    return sp;
}

}  // namespace detail

// All d eigenvalues of M(alpha), ascending; the last one is the dominant eigenvalue.
inline std::vector<double> eigenvalues(const RiskModel& model, double alpha) {
    return detail::spectrum(model, alpha).theta;
}

inline double dominant_eigenvalue(const RiskModel& model, double alpha) {
    return detail::spectrum(model, alpha).theta.back();
}

// Two-state closed form: theta = (phi_1 + phi_2 - q)/2 -+ sqrt(Delta)/2, minus root first.
inline std::pair<double, double> d2_closed_eigenvalues(const RiskModel& model, double alpha) {
    if (model.dim() != 2) throw ValidationError("closed-form eigenvalues need exactly two states");
    detail::require_alpha_in_domain(model, alpha);
    const double f1 = model.phi(0, alpha);
    const double f2 = model.phi(1, alpha);
    const double q = model.q;
    double delta = (f1 - f2) * (f1 - f2) - 2.0 * q * (f1 + f2) + q * q + 4.0 * q * (f1 * model.p[0] + f2 * model.p[1]);
    if (delta < 0.0) {
        if (delta < -1e-12 * std::max(1.0, q * q))
            throw NumericalError(NumericalError::Kind::Consistency, "negative discriminant for a real alpha");
        delta = 0.0;
    }
    const double mid = 0.5 * (f1 + f2 - q);
    const double half = 0.5 * std::sqrt(delta);
    return {mid - half, mid + half};
}

// Right eigenvectors S_jk = 1/(q - phi_j(alpha) + theta_k) for secular roots; deflated
// eigenvalues get vectors supported on their cluster with p^T x = 0.
inline SpectralData spectral_data(const RiskModel& model, double alpha) {
    const detail::Spectrum sp = detail::spectrum(model, alpha);
    const auto d = static_cast<Eigen::Index>(model.dim());
    SpectralData out;
    out.alpha = alpha;
    out.theta = sp.theta;
    out.S = Eigen::MatrixXd::Zero(d, d);

    std::vector<std::size_t> used(sp.clusters.size(), 0);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const int c = sp.cluster[ku];
        out.deflated.push_back(c >= 0);
        if (c < 0) {
            for (Eigen::Index j = 0; j < d; ++j) {
                const double den = sp.theta[ku] - sp.poles[static_cast<std::size_t>(j)];
                if (std::abs(den) < kPoleCollisionTolerance) {
                    std::ostringstream os;
                    os << "eigenvalue " << sp.theta[ku] << " collides with pole of state " << j << " at alpha = "
                       << alpha;
                    throw NumericalError(NumericalError::Kind::Singularity, os.str());
                }
                out.S(j, k) = 1.0 / den;
            }
            continue;
        }
        const detail::PoleCluster& cl = sp.clusters[static_cast<std::size_t>(c)];
        const std::size_t n = used[static_cast<std::size_t>(c)]++;
        if (cl.weight > 0.0) {
            // pivot on the heaviest member, pair it with the n-th of the others
            const auto pivot = *std::max_element(cl.members.begin(), cl.members.end(),
                                                 [&model](auto a, auto b) { return model.p[a] < model.p[b]; });
            std::vector<std::size_t> others;
            for (std::size_t m : cl.members)
                if (m != pivot) others.push_back(m);
            const std::size_t j = others[n];
            out.S(static_cast<Eigen::Index>(pivot), k) = model.p[j];
            out.S(static_cast<Eigen::Index>(j), k) = -model.p[pivot];
            const double norm = std::hypot(model.p[j], model.p[pivot]);
            out.S.col(k) /= norm;
        } else {
            out.S(static_cast<Eigen::Index>(cl.members[n]), k) = 1.0;
        }
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(out.S);
    if (!lu.isInvertible())
        throw NumericalError(NumericalError::Kind::Singularity, "eigenvector matrix is singular");
    out.S_inv = lu.inverse();
    return out;
}

// Eigenvector matrix for a given set of eigenvalues, without deflation.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eigenvector_matrix(const RiskModel& model, double alpha,
                                                                      const std::vector<double>& theta) {
    detail::require_alpha_in_domain(model, alpha);
    const auto d = static_cast<Eigen::Index>(model.dim());
    Eigen::MatrixXd s(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double den = model.q - model.phi(static_cast<std::size_t>(j), alpha) + theta[static_cast<std::size_t>(k)];
            if (std::abs(den) < kPoleCollisionTolerance)
                throw NumericalError(NumericalError::Kind::Singularity, "eigenvalue collides with a pole");
            s(j, k) = 1.0 / den;
        }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
    if (!lu.isInvertible())
        throw NumericalError(NumericalError::Kind::Singularity, "eigenvector matrix is singular");
    return {s, lu.inverse()};
}

// d theta_k / d alpha by implicit differentiation of Psi_alpha(theta(alpha)) = 1/q.
inline double eigenvalue_derivative(const RiskModel& model, double alpha, double theta) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const double x = model.q - model.phi(i, alpha) + theta;
        const double w = model.p[i] / (x * x);
        num += w * model.dphi(i, alpha);
        den += w;
    }
    if (!(den > 0.0) || !std::isfinite(den) || !std::isfinite(num))
        throw NumericalError(NumericalError::Kind::Singularity, "implicit eigenvalue derivative is undefined");
    return num / den;
}

inline double dominant_derivative(const RiskModel& model, double alpha) {
    const detail::Spectrum sp = detail::spectrum(model, alpha);
    const int c = sp.cluster.back();
    if (c >= 0) {
        // dominant eigenvalue on a zero-weight pole: it moves with that state's exponent
        const auto& cl = sp.clusters[static_cast<std::size_t>(c)];
        double s = 0.0;
        for (std::size_t m : cl.members) s += model.dphi(m, alpha);
        return s / static_cast<double>(cl.members.size());
    }
    return eigenvalue_derivative(model, alpha, sp.theta.back());
}

// g(omega) = E exp(omega Y) - 1 = sum_i p_i phi_i(-omega) / (q - phi_i(-omega)).
inline double cycle_mgf_minus_one(const RiskModel& model, double omega) {
    double g = 0.0;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const double f = model.phi(i, -omega);
        g += model.p[i] * f / (model.q - f);
    }
    return g;
}

inline double cycle_mgf_derivative(const RiskModel& model, double omega) {
    double dg = 0.0;
    for (std::size_t i = 0; i < model.dim(); ++i) {
        const double x = model.q - model.phi(i, -omega);
        dg -= model.p[i] * model.q * model.dphi(i, -omega) / (x * x);
    }
    return dg;
}

// omega*: the positive root of sum_i p_i q / (q - phi_i(-omega)) = 1 inside (0, omega_max).
inline double adjustment_coefficient(const RiskModel& model) {
    const double cap = domain_bound(model);
    if (!(cap > 0.0))
        throw NumericalError(NumericalError::Kind::NoRoot,
                             "adjustment coefficient does not exist; asymptotics unavailable (omega_max = 0)");
    double hi = cap;
    if (std::isinf(cap)) {
        hi = 1.0;
        while (!(cycle_mgf_minus_one(model, hi) > 0.0)) {
            hi *= 2.0;
            if (hi > 1e12)
                throw NumericalError(NumericalError::Kind::NoRoot,
                                     "adjustment coefficient does not exist; asymptotics unavailable");
        }
    }
    if (!(cycle_mgf_minus_one(model, hi) > 0.0))
        throw NumericalError(NumericalError::Kind::NoRoot,
                             "adjustment coefficient does not exist; asymptotics unavailable");

    // g is convex with g(0) = 0 and g'(0) = -kappa/q < 0: negative on (0, omega*), positive after.
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi || hi - lo <= 1e-10 * hi) break;
        (cycle_mgf_minus_one(model, mid) < 0.0 ? lo : hi) = mid;
    }
    double omega = 0.5 * (lo + hi);
    for (int it = 0; it < 5; ++it) {
        const double g = cycle_mgf_minus_one(model, omega);
        const double dg = cycle_mgf_derivative(model, omega);
        if (g == 0.0 || !(dg > 0.0)) break;
        const double next = omega - g / dg;
        if (!(next > 0.0 && next < cap)) break;
        omega = next;
    }
    if (!(std::abs(cycle_mgf_minus_one(model, omega)) <= 1e-12)) {
        std::ostringstream os;
        os << "adjustment coefficient polish failed: residual " << cycle_mgf_minus_one(model, omega);
        throw NumericalError(NumericalError::Kind::Convergence, os.str());
    }
    return omega;
}

// Scale for the alpha grid: the fastest claim rate 1/mean, or 1 without claims.
inline double natural_alpha_scale(const RiskModel& model) {
    double scale = 0.0;
    for (const auto& c : model.components)
        if (c.has_claims()) scale = std::max(scale, 1.0 / c.claims.mean());
    return scale > 0.0 ? scale : 1.0;
}

// Positive zeros of det M(alpha) = prod_k theta_k(alpha), ascending. Each of the d-1
// non-dominant branches is scanned on an alpha grid and refined by bisection.
inline std::vector<double> positive_det_roots(const RiskModel& model) {
    const std::size_t d = model.dim();
    std::vector<double> roots;
    if (d < 2) return roots;
    const double h = 0.01 * natural_alpha_scale(model);
    constexpr int kMaxSteps = 200000;

    for (std::size_t k = 0; k + 1 < d; ++k) {
        double prev = 0.0;
        bool bracketed = false;
        double a = h;
        for (int step = 1; step <= kMaxSteps; ++step, a = step * h) {
            if (eigenvalues(model, a)[k] >= 0.0) {
                bracketed = true;
                break;
            }
            prev = a;
        }
        if (!bracketed) {
            std::ostringstream os;
            os << "no positive zero of eigenvalue branch " << k << " below alpha = " << kMaxSteps * h;
            throw NumericalError(NumericalError::Kind::NoRoot, os.str());
        }
        double lo = prev;
        double hi = a;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (eigenvalues(model, mid)[k] < 0.0 ? lo : hi) = mid;
        }
        const double root = 0.5 * (lo + hi);
        const Eigen::MatrixXd m = matrix_exponent(model, root);
        const double scale = std::pow(std::max(1.0, m.cwiseAbs().maxCoeff()), static_cast<double>(d));
        if (!(std::abs(m.determinant()) <= 1e-10 * scale))
            throw NumericalError(NumericalError::Kind::Consistency, "det M does not vanish at a scanned root");
        roots.push_back(root);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// alpha*: the smallest positive zero of det M(alpha). None exists for a single state.
inline double alpha_star(const RiskModel& model) {
    const std::vector<double> roots = positive_det_roots(model);
    if (roots.empty())
        throw NumericalError(NumericalError::Kind::NoRoot, "det M(alpha) has no positive zero for a single state");
    const double a = roots.front();
    if (model.dim() == 2) {
        const double f1 = model.phi(0, a);
        const double f2 = model.phi(1, a);
        const double m = f1 * f2 - model.q * (model.p[0] * f1 + model.p[1] * f2);
        const double scale = std::max({1.0, std::abs(f1 * f2), model.q * (std::abs(f1) + std::abs(f2))});
        if (!(std::abs(m) <= 1e-9 * scale))
            throw NumericalError(NumericalError::Kind::Consistency, "branch-scan root fails the two-state determinant");
    }
    return a;
}

struct SpectrumPoint {
    double alpha;
    std::vector<double> theta;
};

// (alpha, theta_k(alpha)) on a uniform grid; points outside the domain are skipped.
inline std::vector<SpectrumPoint> spectrum_curve(const RiskModel& model, double alpha_lo, double alpha_hi,
                                                 std::size_t points) {
    std::vector<SpectrumPoint> out;
    if (points == 0) return out;
    for (std::size_t n = 0; n < points; ++n) {
        const double a =
            points == 1 ? alpha_lo
                        : alpha_lo + (alpha_hi - alpha_lo) * static_cast<double>(n) / static_cast<double>(points - 1);
        if (!model.in_domain(a)) continue;
        out.push_back({a, eigenvalues(model, a)});
    }
    return out;
}

}  // namespace ruin
