#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tailmix/copula.hpp"
#include "tailmix/rng.hpp"

namespace tailmix {

// The law F_Lambda of the threshold. Three variants:
//   discrete            atoms 0 = x_1 < ... < x_n < 1 with masses p_k, p_1 > 0
//                       (usable by both algorithms);
//   continuous_rejection F(l) = (1-gamma) + gamma(1 - (1-l^alpha)^beta), where
//                       alpha is pinned to the copula's diagonal exponent;
//   continuous_direct    same with alpha = 1 (any copula).
// gamma = 1 is refused: the weight function would be unbounded and the weight
// variance infinite.
class MixingDistribution {
public:
    enum class Kind { Discrete, ContinuousRejection, ContinuousDirect };

    static MixingDistribution discrete(std::vector<double> atoms, std::vector<double> probs);
    static MixingDistribution continuous_rejection(const Copula& copula, double beta, double gamma);
    static MixingDistribution continuous_rejection(double alpha, double beta, double gamma);
    static MixingDistribution continuous_direct(double beta, double gamma);

    Kind kind() const { return kind_; }
    bool is_discrete() const { return kind_ == Kind::Discrete; }

    double sample_lambda(RngStream& rng) const;
    double prob_lambda_zero() const; // P[Lambda = 0]

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& probs() const { return probs_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double gamma() const { return gamma_; }

    // E[1/(1-Lambda)]; finite by construction.
    double expected_inverse_gap() const;

private:
    MixingDistribution() = default;
    Kind kind_ = Kind::Discrete;
    std::vector<double> atoms_, probs_, cum_; // discrete
    double alpha_ = 1.0, beta_ = 2.0, gamma_ = 0.0;
};

// Rejection weight w(u) = w~(max u) with the step/closed form evaluated from a
// table built once per (mix, copula): the diagonal values C(x_k 1) are cached
// for the whole sample.
class RejectionWeight {
public:
    RejectionWeight(const MixingDistribution& mix, const Copula& copula);

    double from_max(double t) const;
    double operator()(std::span<const double> u) const;
    double bound() const { return bound_; } // 1/P[Lambda=0]
    double expected_draws() const { return expected_draws_; }

private:
    const MixingDistribution* mix_;
    std::vector<double> atoms_, prefix_; // prefix_k = sum_{l<=k} p_l/(1-C(x_l 1))
    double alpha_ = 1.0, beta_ = 2.0, gamma_ = 0.0;
    bool discrete_ = true;
    double bound_ = 1.0, expected_draws_ = 1.0;
};

// Direct weight w(u) = d (sum_i sum_k 1{x_k<=u_i} p_k/(1-x_k))^-1 or its
// continuous closed form; no copula evaluation involved.
class DirectWeight {
public:
    DirectWeight(const MixingDistribution& mix, std::size_t dimension);

    double operator()(std::span<const double> u) const;
    double bound() const { return bound_; }

private:
    std::vector<double> atoms_, prefix_; // prefix_k = sum_{l<=k} p_l/(1-x_l)
    double beta_ = 2.0, gamma_ = 0.0;
    std::size_t d_;
    bool discrete_ = true;
    double bound_ = 1.0;
};

// Spec-level convenience wrappers (the samplers keep the cached objects).
double weight_rejection(const MixingDistribution& mix, const Copula& copula,
                        std::span<const double> u);
double weight_direct(const MixingDistribution& mix, std::span<const double> u, std::size_t d);

// Expected waiting time E[N_V] of the rejection sampler: the exact sum for a
// discrete mix, 1 + gamma/(beta-1) for the continuous one.
double expected_draws(const MixingDistribution& mix, const Copula& copula);

} // namespace tailmix
