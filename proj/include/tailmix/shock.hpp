#pragma once

#include <memory>
#include <vector>

#include "tailmix/copula.hpp"

namespace tailmix {

// One independent shock with a continuous cdf on (0, inf).
// Frechet: F(x) = exp(-scale/x); Exponential: F(x) = 1 - exp(-rate x).
struct Shock {
    enum class Family { Frechet, Exponential };
    Family family;
    double param;

    double cdf(double x) const;
    double quantile(double p) const;
};

// Component j takes the maximum over its exposure set of shocks:
// X_j = max_{k in I_j} Z_k, so F_{X_j}(x) = prod_{k in I_j} F_{Z_k}(x).
class ShockModel {
public:
    ShockModel(std::vector<Shock> shocks, std::vector<std::vector<std::size_t>> exposures);

    std::size_t shock_count() const { return shocks_.size(); }
    std::size_t dim() const { return exposures_.size(); }
    const std::vector<std::size_t>& exposure(std::size_t j) const { return exposures_[j]; }
    const Shock& shock(std::size_t k) const { return shocks_[k]; }
    bool all_frechet() const { return all_frechet_; }

    double margin_cdf(std::size_t k, double x) const;
    // Analytic for Frechet margins, otherwise a bracketed inversion to 1e-12.
    double margin_quantile(std::size_t k, double u) const;

private:
    std::vector<Shock> shocks_;
    std::vector<std::vector<std::size_t>> exposures_;
    std::vector<double> frechet_scale_sum_; // s-hat per component when all Frechet
    bool all_frechet_;
};

// The induced copula C(u) = prod_j F_{Z_j}(min_{k: j in I_k} F_{X_k}^{-1}(u_k)).
// Overrides sample_exceeding with the exact conditional sampler (no retries).
class ShockCopula final : public Copula {
public:
    explicit ShockCopula(ShockModel model);

    CopulaFamily family() const override { return CopulaFamily::Shock; }
    std::size_t dim() const override { return model_.dim(); }
    double cdf(std::span<const double> u) const override;
    std::optional<double> diagonal_exponent() const override;
    void sample(RngStream& rng, std::span<double> out) const override;
    bool has_conditional() const override { return false; }
    long sample_exceeding(double lambda, RngStream& rng, std::span<double> out,
                          long max_attempts) const override;

    const ShockModel& model() const { return model_; }

private:
    ShockModel model_;
};

// One exact draw from the law of U given max_j U_j > lambda: Bernoulli
// exceedance chain over the shocks, then restricted inverse-cdf shock draws.
std::vector<double> shock_conditional_sample(const ShockModel& model, double lambda,
                                             RngStream& rng);

// Marshall-Olkin convenience: Frechet shocks with the given scales.
std::unique_ptr<Copula> marshall_olkin_copula(std::vector<double> scales,
                                              std::vector<std::vector<std::size_t>> exposures);

} // namespace tailmix
