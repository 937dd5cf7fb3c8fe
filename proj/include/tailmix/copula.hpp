#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tailmix/rng.hpp"

namespace tailmix {

enum class CopulaFamily { Independence, Clayton, Gumbel, Frank, Fgm, Shock };

// The conditional law C_{u_k}: distribution of the remaining d-1 coordinates
// given that coordinate k equals u_k. Created via Copula::condition_on, which
// builds the family-specific reduced representation (reduced FGM parameter,
// AMH generator for Frank, prefix accumulators for Clayton/Gumbel).
class ConditionalDistribution {
public:
    virtual ~ConditionalDistribution() = default;
    virtual std::size_t dim() const = 0; // d-1
    virtual void sample(RngStream& rng, std::span<double> out) const = 0;
};

class Copula {
public:
    virtual ~Copula() = default;

    virtual CopulaFamily family() const = 0;
    virtual std::size_t dim() const = 0;

    // C(u). Exact closed form for every built-in family.
    virtual double cdf(std::span<const double> u) const = 0;

    // Diagonal section C(t,...,t).
    virtual double diagonal(double t) const;

    // The exponent alpha when the diagonal is exactly t^alpha, else absent.
    virtual std::optional<double> diagonal_exponent() const { return std::nullopt; }

    // One draw from C into out (size d).
    virtual void sample(RngStream& rng, std::span<double> out) const = 0;

    virtual bool has_conditional() const { return true; }
    virtual std::unique_ptr<ConditionalDistribution> condition_on(std::size_t k, double u_k) const;

    // C^{-1}(q | given): quantile of the next coordinate given the already
    // fixed ones. Analytic where the family allows, otherwise a bracketed
    // root-find on the conditional cdf to 1e-10 in the argument. `target` is
    // the coordinate index being drawn (only meaningful for non-exchangeable
    // families).
    virtual double conditional_quantile(std::size_t target, std::span<const double> given,
                                        double q) const;

    // Draws V ~ C conditioned on max_j V_j > lambda and returns the number of
    // plain copula draws consumed. The base implementation is the retry loop;
    // shock copulas override it with an exact conditional sampler.
    virtual long sample_exceeding(double lambda, RngStream& rng, std::span<double> out,
                                  long max_attempts) const;

protected:
    void check_point(std::span<const double> u) const;
};

std::unique_ptr<Copula> independence_copula(std::size_t d);
std::unique_ptr<Copula> clayton_copula(double theta, std::size_t d);
std::unique_ptr<Copula> gumbel_copula(double theta, std::size_t d);
std::unique_ptr<Copula> frank_copula(double alpha, std::size_t d);
std::unique_ptr<Copula> fgm_copula(double theta, std::size_t d);

// Closed-form Kendall tau inversion: Clayton theta = 2 tau/(1-tau),
// Gumbel theta = 1/(1-tau).
double kendall_tau_to_param(CopulaFamily family, double tau);

// Reduced AMH parameter of the Frank conditional law, theta(alpha,u_k) = 1 - exp(-alpha u_k).
double frank_amh_parameter(double alpha, double u_k);

} // namespace tailmix
