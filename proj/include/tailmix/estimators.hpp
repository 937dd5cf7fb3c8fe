#pragma once

#include <span>
#include <string>
#include <vector>

#include "tailmix/margins.hpp"

namespace tailmix {

// The objective Psi mapping copula uniforms through margin quantiles.
class Functional {
public:
    enum class Kind { StopLoss, IndicatorSumLeq, RareMaxIndicator, ProductMoment };

    static Functional stop_loss(double deductible, std::vector<Margin> margins);
    static Functional indicator_sum_leq(double x, std::vector<Margin> margins);
    static Functional rare_max_indicator(double s);
    static Functional product_moment(std::vector<Margin> margins);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    std::size_t dim() const { return margins_.size(); }
    const std::vector<Margin>& margins() const { return margins_; }

    double operator()(std::span<const double> u) const;
    // Psi on the diagonal, for proposal calibration.
    double diagonal(double t) const;

private:
    Functional(Kind k, double p, std::vector<Margin> m)
        : kind_(k), param_(p), margins_(std::move(m)) {}
    Kind kind_;
    double param_;
    std::vector<Margin> margins_;
};

enum class EstimatorTag { Mc, IsRaw, IsSelfNormalized };

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    EstimatorTag tag = EstimatorTag::Mc;
};

// Mean of psi values: plain MC when weights is empty; otherwise the raw IS
// estimator, or the self-normalized ratio (delta-method standard error) when
// `normalize` is set.
Estimate estimate_mean(std::span<const double> psi, std::span<const double> weights,
                       bool normalize);

// Rescales weights to sum to one.
std::vector<double> normalize_weights(std::span<const double> weights);

// Quantile of the weighted empirical distribution: smallest s whose cumulative
// normalized weight reaches alpha. Weights must already sum to one.
double weighted_var(std::span<const double> losses, std::span<const double> weights, double alpha);

// Exact tail average of the weighted empirical distribution:
// q + (1-alpha)^-1 sum_i w_i (s_i - q)^+ with q the weighted VaR.
double weighted_es(std::span<const double> losses, std::span<const double> weights, double alpha);

// Euler allocation E[X_j | S > VaR_alpha(S)] over a weighted multivariate
// sample (row-major n x d).
double euler_allocation(std::span<const double> x, std::size_t n, std::size_t d,
                        std::span<const double> weights, std::size_t margin_index, double alpha);

} // namespace tailmix
