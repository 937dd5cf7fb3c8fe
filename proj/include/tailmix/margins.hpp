#pragma once

#include <cstddef>
#include <vector>

namespace tailmix {

// Parametric marginal loss distribution. Lognormal is parametrized by
// (location mu, variance sigma2) of the underlying normal; Pareto by
// F(x) = 1 - (1 + x/scale)^(-shape).
class Margin {
public:
    enum class Family { Lognormal, Pareto };

    static Margin lognormal(double mu, double sigma2);
    static Margin pareto(double scale, double shape);

    Family family() const { return family_; }

    // Generalized inverse inf{x : F(x) >= p}. quantile(0) = 0 for both
    // families (infimum convention); p = 1 signals an unbounded quantile.
    double quantile(double p) const;
    double cdf(double x) const;

    double param1() const { return a_; }
    double param2() const { return b_; }

private:
    Margin(Family f, double a, double b) : family_(f), a_(a), b_(b) {}
    Family family_;
    double a_, b_; // lognormal: mu, sigma; pareto: scale, shape
};

// The case-study margins: margin j is lognormal(10 - 0.1j, 1 + 0.2j), j = 1..d.
std::vector<Margin> case_study_margins(std::size_t d);

// The matching stop-loss deductible, 1e5 * d.
double case_study_deductible(std::size_t d);

} // namespace tailmix
