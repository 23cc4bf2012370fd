#pragma once

// Exact asymptotics pi(u) ~ A exp(-omega* u).
//
// A = -(l^T u)(v^T e) / theta'_{i*}(-omega*), where u and v are the dominant right
// eigenvector and the matching row of S^{-1} at alpha = -omega*, and l = kappa * pi_bar
// with pi_bar the stationary law of the background state seen at new infima of X.
// That law comes from the ladder generator Lambda = -V Gamma V^{-1}, built from the
// non-negative zeros of det M(alpha) and their null vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "ruin/errors.hpp"
#include "ruin/model.hpp"
#include "ruin/spectral.hpp"

namespace ruin {

struct LadderData {
    std::vector<double> roots;  // non-negative zeros of det M, starting with 0
    Eigen::MatrixXd V;          // matching right null vectors as columns
    Eigen::MatrixXd Lambda;     // generator of the ladder background chain
};

inline LadderData ladder_generator(const RiskModel& model) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    LadderData out;
    out.roots.push_back(0.0);
    for (double r : positive_det_roots(model)) out.roots.push_back(r);
    if (static_cast<Eigen::Index>(out.roots.size()) != d) {
        std::ostringstream os;
        os << "expected " << d << " non-negative zeros of det M, found " << out.roots.size();
        throw NumericalError(NumericalError::Kind::Consistency, os.str());
    }

    out.V = Eigen::MatrixXd::Ones(d, d);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index k = 1; k < d; ++k) {
        const double a = out.roots[static_cast<std::size_t>(k)];
        const SpectralData sd = spectral_data(model, a);
        std::size_t zero = 0;
        for (std::size_t j = 1; j < sd.theta.size(); ++j)
            if (std::abs(sd.theta[j]) < std::abs(sd.theta[zero])) zero = j;
        out.V.col(k) = sd.S.col(static_cast<Eigen::Index>(zero));
        gamma(k, k) = a;
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(out.V);
    if (!lu.isInvertible())
        throw NumericalError(NumericalError::Kind::Singularity, "null-vector matrix V is singular");
    out.Lambda = -out.V * gamma * lu.inverse();

    const double scale = std::max(1.0, out.Lambda.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            double& x = out.Lambda(i, j);
            if (x < 0.0) {
                if (x < -1e-10 * scale)
                    throw NumericalError(NumericalError::Kind::Consistency,
                                         "ladder generator has a negative off-diagonal rate");
                x = 0.0;
            }
        }
        if (std::abs(out.Lambda.row(i).sum()) > 1e-9 * scale)
            throw NumericalError(NumericalError::Kind::Consistency, "ladder generator rows do not sum to zero");
    }
    return out;
}

// Stationary vector of a generator: pi Lambda = 0, sum(pi) = 1.
inline std::vector<double> stationary_distribution(const Eigen::MatrixXd& lambda) {
    const Eigen::Index d = lambda.rows();
    Eigen::MatrixXd a = lambda.transpose();
    a.row(d - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    rhs(d - 1) = 1.0;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw NumericalError(NumericalError::Kind::Singularity, "ladder generator has no unique stationary law");
    const Eigen::VectorXd pi = lu.solve(rhs);
    std::vector<double> out(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        double x = pi(i);
        if (x < 0.0) {
            if (x < -1e-10) throw NumericalError(NumericalError::Kind::Consistency, "negative stationary mass");
            x = 0.0;
        }
        out[static_cast<std::size_t>(i)] = x;
    }
    return out;
}

inline std::vector<double> ladder_distribution(const RiskModel& model) {
    return stationary_distribution(ladder_generator(model).Lambda);
}

// Same law read off the first row of V^{-1} (the left null vector of Lambda).
inline std::vector<double> ladder_distribution_from_null_vectors(const LadderData& ladder) {
    const Eigen::MatrixXd vinv = ladder.V.fullPivLu().inverse();
    const double norm = vinv.row(0).sum();
    std::vector<double> out(static_cast<std::size_t>(vinv.cols()));
    for (Eigen::Index j = 0; j < vinv.cols(); ++j) out[static_cast<std::size_t>(j)] = vinv(0, j) / norm;
    return out;
}

struct AsymptoticResult {
    double omega_star = 0.0;
    double kappa = 0.0;
    double A = 0.0;
    double theta_prime = 0.0;  // derivative of the dominant eigenvalue at -omega*
    std::size_t i_star = 0;
    std::vector<double> ell;
    std::vector<double> pi_bar;
    std::vector<double> det_roots;  // positive zeros of det M (alpha* first)
};

inline AsymptoticResult cramer_constant(const RiskModel& model) {
    require_valid(model);
    AsymptoticResult res;
    res.kappa = mean_drift(model);
    res.omega_star = adjustment_coefficient(model);

    const LadderData ladder = ladder_generator(model);
    res.det_roots.assign(ladder.roots.begin() + 1, ladder.roots.end());
    res.pi_bar = stationary_distribution(ladder.Lambda);
    for (double x : res.pi_bar) res.ell.push_back(res.kappa * x);

    const double alpha = -res.omega_star;
    const SpectralData sd = spectral_data(model, alpha);
    res.i_star = sd.dominant_index();
    for (std::size_t k = 0; k + 1 < sd.theta.size(); ++k) {
        if (std::abs(sd.theta[res.i_star] - sd.theta[k]) < 1e-8)
            throw NumericalError(NumericalError::Kind::Singularity,
                                 "dominant eigenvalue at -omega* is not simple");
    }
    if (sd.deflated[res.i_star])
        throw NumericalError(NumericalError::Kind::Singularity, "dominant eigenvalue at -omega* sits on a pole");

    res.theta_prime = eigenvalue_derivative(model, alpha, sd.theta[res.i_star]);
    const auto col = static_cast<Eigen::Index>(res.i_star);
    double ell_u = 0.0;
    for (std::size_t i = 0; i < res.ell.size(); ++i) ell_u += res.ell[i] * sd.S(static_cast<Eigen::Index>(i), col);
    const double v_e = sd.S_inv.row(col).sum();
    res.A = -ell_u * v_e / res.theta_prime;
    if (!(res.A > 0.0) || !std::isfinite(res.A)) {
        std::ostringstream os;
        os << "internal consistency failure: asymptotic constant A = " << res.A;
        throw NumericalError(NumericalError::Kind::Consistency, os.str());
    }
    return res;
}

struct ApproxRuin {
    double value = 0.0;
    bool clamped = false;  // A exp(-omega* u) exceeded 1
};

inline ApproxRuin approx_ruin_probability(const AsymptoticResult& result, double u) {
    const double v = result.A * std::exp(-result.omega_star * u);
    if (v > 1.0) return {1.0, true};
    return {std::max(0.0, v), false};
}

}  // namespace ruin
