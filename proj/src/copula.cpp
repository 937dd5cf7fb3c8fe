#include "tailmix/copula.hpp"
#include "tailmix/errors.hpp"
#include "tailmix/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tailmix {

namespace {

constexpr double kUnitEps = 0x1.0p-52;

double clamp_unit(double u) {
    return std::min(std::max(u, kUnitEps), 1.0 - kUnitEps);
}

} // namespace

// ---------------------------------------------------------------------------
// Base class defaults
// ---------------------------------------------------------------------------

void Copula::check_point(std::span<const double> u) const {
    if (u.size() != dim())
        throw std::domain_error("copula: point dimension mismatch");
    for (double v : u)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::domain_error("copula: coordinate outside [0,1]");
}

double Copula::diagonal(double t) const {
    std::vector<double> u(dim(), t);
    return cdf(u);
}

std::unique_ptr<ConditionalDistribution> Copula::condition_on(std::size_t, double) const {
    throw std::domain_error("copula family does not support conditional sampling");
}

double Copula::conditional_quantile(std::size_t, std::span<const double>, double) const {
    throw std::domain_error("copula family does not support conditional quantiles");
}

long Copula::sample_exceeding(double lambda, RngStream& rng, std::span<double> out,
                              long max_attempts) const {
    for (long n = 1; n <= max_attempts; ++n) {
        sample(rng, out);
        double mx = *std::max_element(out.begin(), out.end());
        if (mx > lambda) return n;
    }
    throw RunawayRejectionError(lambda, max_attempts);
}

// ---------------------------------------------------------------------------
// Independence
// ---------------------------------------------------------------------------

namespace {

class IidConditional final : public ConditionalDistribution {
public:
    explicit IidConditional(std::size_t d) : d_(d) {}
    std::size_t dim() const override { return d_; }
    void sample(RngStream& rng, std::span<double> out) const override {
        for (std::size_t i = 0; i < d_; ++i) out[i] = rng.uniform01();
    }

private:
    std::size_t d_;
};

class IndependenceCopula final : public Copula {
public:
    explicit IndependenceCopula(std::size_t d) : d_(d) {}
    CopulaFamily family() const override { return CopulaFamily::Independence; }
    std::size_t dim() const override { return d_; }

    double cdf(std::span<const double> u) const override {
        check_point(u);
        double p = 1.0;
        for (double v : u) p *= v;
        return p;
    }
    double diagonal(double t) const override { return std::pow(t, static_cast<double>(d_)); }
    std::optional<double> diagonal_exponent() const override {
        return static_cast<double>(d_);
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        for (std::size_t i = 0; i < d_; ++i) out[i] = rng.uniform01();
    }
    std::unique_ptr<ConditionalDistribution> condition_on(std::size_t, double) const override {
        return std::make_unique<IidConditional>(d_ - 1);
    }
    double conditional_quantile(std::size_t, std::span<const double>, double q) const override {
        return q;
    }

private:
    std::size_t d_;
};

// ---------------------------------------------------------------------------
// Clayton: C(u) = (1 + sum(u_i^-theta - 1))^(-1/theta), theta > 0.
// Gamma(1/theta) frailty for unconditional draws; closed-form sequential
// conditionals for the conditional machinery.
// ---------------------------------------------------------------------------

class ClaytonCopula;

class ClaytonConditional final : public ConditionalDistribution {
public:
    ClaytonConditional(double theta, std::size_t d, double u_k)
        : theta_(theta), d_(d), t0_(std::pow(u_k, -theta)) {}
    std::size_t dim() const override { return d_ - 1; }
    void sample(RngStream& rng, std::span<double> out) const override;

private:
    double theta_;
    std::size_t d_;
    double t0_; // u_k^-theta
};

class ClaytonCopula final : public Copula {
public:
    ClaytonCopula(double theta, std::size_t d) : theta_(theta), d_(d) {}
    CopulaFamily family() const override { return CopulaFamily::Clayton; }
    std::size_t dim() const override { return d_; }

    double cdf(std::span<const double> u) const override {
        check_point(u);
        double s = 1.0;
        for (double v : u) {
            if (v == 0.0) return 0.0;
            s += std::pow(v, -theta_) - 1.0;
        }
        return std::pow(s, -1.0 / theta_);
    }
    double diagonal(double t) const override {
        if (t == 0.0) return 0.0;
        double dd = static_cast<double>(d_);
        return std::pow(dd * std::pow(t, -theta_) - dd + 1.0, -1.0 / theta_);
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        std::gamma_distribution<double> gamma(1.0 / theta_, 1.0);
        double w = gamma(rng.engine());
        for (std::size_t i = 0; i < d_; ++i)
            out[i] = clamp_unit(std::pow(1.0 + rng.exponential() / w, -1.0 / theta_));
    }
    std::unique_ptr<ConditionalDistribution> condition_on(std::size_t, double u_k) const override {
        return std::make_unique<ClaytonConditional>(theta_, d_, u_k);
    }

    // Given m fixed values with T = sum w_i^-theta, the next coordinate solves
    // q = ((1+t+s)/(1+t))^-(1/theta+m); inverting gives the closed form below.
    static double next_quantile(double theta, double t_sum, std::size_t m, double q) {
        double mm = static_cast<double>(m);
        double big_t = 1.0 - mm + t_sum;
        double e = 1.0 / (mm + 1.0 / theta);
        return std::pow(1.0 + big_t * (std::pow(q, -e) - 1.0), -1.0 / theta);
    }

    double conditional_quantile(std::size_t, std::span<const double> given,
                                double q) const override {
        if (given.empty() || given.size() >= d_)
            throw std::domain_error("conditional_quantile: need 1..d-1 conditioned values");
        if (!(q > 0.0 && q < 1.0))
            throw std::domain_error("conditional_quantile: q outside (0,1)");
        double t = 0.0;
        for (double w : given) {
            if (!(w > 0.0 && w < 1.0))
                throw std::domain_error("conditional_quantile: conditioned value outside (0,1)");
            t += std::pow(w, -theta_);
        }
        return next_quantile(theta_, t, given.size(), q);
    }

private:
    double theta_;
    std::size_t d_;
};

void ClaytonConditional::sample(RngStream& rng, std::span<double> out) const {
    double t = t0_;
    for (std::size_t i = 0; i < d_ - 1; ++i) {
        double v = ClaytonCopula::next_quantile(theta_, t, i + 1, rng.uniform01());
        out[i] = v;
        t += std::pow(v, -theta_);
    }
}

// ---------------------------------------------------------------------------
// Gumbel: C(u) = exp(-(sum (-ln u_i)^theta)^(1/theta)), theta >= 1.
// Positive-stable frailty (Kanter) for unconditional draws. Conditionals use
// the derivative recursion of psi(t) = exp(-t^beta), beta = 1/theta:
//   psi^(m)(t) = psi(t) t^-m P_m(t^beta),
// where all coefficients of P_m share the sign (-1)^m, so working with
// absolute values keeps the conditional-cdf ratio cancellation-free.
// ---------------------------------------------------------------------------

class GumbelCopula final : public Copula {
public:
    GumbelCopula(double theta, std::size_t d) : theta_(theta), beta_(1.0 / theta), d_(d) {
        // |P_{m+1}|_k = beta |P_m|_{k-1} + (m - beta k) |P_m|_k, rows normalized.
        coeff_.resize(d_);
        if (d_ >= 2 && theta_ > 1.0) {
            coeff_[1] = {0.0, 1.0}; // P_1 ~ x (up to sign/scale)
            for (std::size_t m = 1; m + 1 < d_; ++m) {
                const auto& a = coeff_[m];
                std::vector<double> b(m + 2, 0.0);
                for (std::size_t k = 1; k <= m + 1; ++k) {
                    double lower = (k - 1 < a.size()) ? a[k - 1] : 0.0;
                    double same = (k < a.size()) ? a[k] : 0.0;
                    b[k] = beta_ * lower +
                           (static_cast<double>(m) - beta_ * static_cast<double>(k)) * same;
                }
                double mx = *std::max_element(b.begin(), b.end());
                for (double& c : b) c /= mx;
                coeff_[m + 1] = std::move(b);
            }
        }
    }

    CopulaFamily family() const override { return CopulaFamily::Gumbel; }
    std::size_t dim() const override { return d_; }

    double cdf(std::span<const double> u) const override {
        check_point(u);
        double s = 0.0;
        for (double v : u) {
            if (v == 0.0) return 0.0;
            s += std::pow(-std::log(v), theta_);
        }
        return std::exp(-std::pow(s, beta_));
    }
    double diagonal(double t) const override {
        if (t == 0.0) return 0.0;
        return std::pow(t, std::pow(static_cast<double>(d_), beta_));
    }
    std::optional<double> diagonal_exponent() const override {
        return std::pow(static_cast<double>(d_), beta_);
    }

    void sample(RngStream& rng, std::span<double> out) const override {
        if (theta_ == 1.0) {
            for (std::size_t i = 0; i < d_; ++i) out[i] = rng.uniform01();
            return;
        }
        double w = positive_stable(rng);
        for (std::size_t i = 0; i < d_; ++i)
            out[i] = clamp_unit(std::exp(-std::pow(rng.exponential() / w, beta_)));
    }

    std::unique_ptr<ConditionalDistribution> condition_on(std::size_t k, double u_k) const override;

    double conditional_quantile(std::size_t, std::span<const double> given,
                                double q) const override {
        if (given.empty() || given.size() >= d_)
            throw std::domain_error("conditional_quantile: need 1..d-1 conditioned values");
        if (!(q > 0.0 && q < 1.0))
            throw std::domain_error("conditional_quantile: q outside (0,1)");
        if (theta_ == 1.0) return q;
        double t = 0.0;
        for (double w : given) {
            if (!(w > 0.0 && w < 1.0))
                throw std::domain_error("conditional_quantile: conditioned value outside (0,1)");
            t += std::pow(-std::log(w), theta_);
        }
        return invert_conditional(t, given.size(), q);
    }

    // F(u | m values, t = sum psi^-1) via the derivative recursion.
    double conditional_cdf(double u, double t, std::size_t m) const {
        double s = std::pow(-std::log(u), theta_);
        double mm = static_cast<double>(m);
        double log_ratio = std::pow(t, beta_) - std::pow(t + s, beta_) +
                           mm * (std::log(t) - std::log(t + s));
        double num = poly(m, std::pow(t + s, beta_));
        double den = poly(m, std::pow(t, beta_));
        return std::exp(log_ratio) * num / den;
    }

    // Bisection then secant polish, tolerance 1e-10 in the argument.
    double invert_conditional(double t, std::size_t m, double q) const {
        return solve_increasing([&](double u) { return conditional_cdf(u, t, m); }, q,
                                1e-300, 1.0 - 1e-16, 1e-10);
    }

    double theta() const { return theta_; }

private:
    double poly(std::size_t m, double x) const {
        const auto& c = coeff_[m];
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 1;) acc = acc * x + c[k];
        return acc * x;
    }

    // Kanter's representation of the positive alpha-stable law with Laplace
    // transform exp(-t^alpha), alpha = 1/theta; evaluated in logs to survive
    // theta close to 1.
    double positive_stable(RngStream& rng) const {
        double a = beta_;
        double th = rng.uniform(0.0, M_PI);
        double e = rng.exponential();
        double log_a = (a / (1.0 - a)) * std::log(std::sin(a * th)) +
                       std::log(std::sin((1.0 - a) * th)) -
                       (1.0 / (1.0 - a)) * std::log(std::sin(th));
        return std::exp((log_a - std::log(e)) * (1.0 - a) / a);
    }

    double theta_, beta_;
    std::size_t d_;
    std::vector<std::vector<double>> coeff_; // coeff_[m] = |P_m|, index = power of x
};

class GumbelConditional final : public ConditionalDistribution {
public:
    GumbelConditional(const GumbelCopula& parent, std::size_t d, double u_k)
        : parent_(parent), d_(d), t0_(std::pow(-std::log(u_k), parent.theta())) {}
    std::size_t dim() const override { return d_ - 1; }
    void sample(RngStream& rng, std::span<double> out) const override {
        double t = t0_;
        for (std::size_t i = 0; i < d_ - 1; ++i) {
            double v = parent_.invert_conditional(t, i + 1, rng.uniform01());
            out[i] = v;
            t += std::pow(-std::log(v), parent_.theta());
        }
    }

private:
    const GumbelCopula& parent_;
    std::size_t d_;
    double t0_;
};

std::unique_ptr<ConditionalDistribution> GumbelCopula::condition_on(std::size_t,
                                                                    double u_k) const {
    if (theta_ == 1.0) return std::make_unique<IidConditional>(d_ - 1);
    return std::make_unique<GumbelConditional>(*this, d_, u_k);
}

// ---------------------------------------------------------------------------
// Frank: generator psi(t) = -log(1 - (1-exp(-alpha)) exp(-t))/alpha.
// Logarithmic-series frailty for d >= 3 (alpha > 0); the d = 2 sampler uses
// the closed-form conditional inverse and also admits alpha < 0. The
// conditional law C_{u_k} is AMH-coupled with Frank margins.
// ---------------------------------------------------------------------------

class FrankCopula;

class FrankConditional final : public ConditionalDistribution {
public:
    FrankConditional(double alpha, std::size_t d, double u_k)
        : alpha_(alpha), d_(d), amh_(frank_amh_parameter(alpha, u_k)),
          e_mau_(std::exp(-alpha * u_k)) {}
    std::size_t dim() const override { return d_ - 1; }
    void sample(RngStream& rng, std::span<double> out) const override {
        std::size_t n = d_ - 1;
        if (n == 1) {
            out[0] = margin_quantile(rng.uniform01());
            return;
        }
        // AMH copula via geometric frailty, then the Frank conditional margins.
        double w = 1.0;
        if (amh_ > 0.0)
            w = 1.0 + std::floor(std::log(rng.uniform01()) / std::log(amh_));
        for (std::size_t i = 0; i < n; ++i) {
            double t = rng.exponential() / w;
            double v = (1.0 - amh_) / (std::exp(t) - amh_);
            out[i] = margin_quantile(v);
        }
    }

    // Quantile of the single-coordinate conditional law (paper's closed form).
    double margin_quantile(double u) const {
        double r = std::expm1(-alpha_) / (1.0 + e_mau_ * (1.0 / u - 1.0));
        return -std::log1p(r) / alpha_;
    }

private:
    double alpha_;
    std::size_t d_;
    double amh_;   // theta(alpha, u_k)
    double e_mau_; // exp(-alpha u_k)
};

class FrankCopula final : public Copula {
public:
    FrankCopula(double alpha, std::size_t d) : alpha_(alpha), d_(d), p_(-std::expm1(-alpha)) {}
    CopulaFamily family() const override { return CopulaFamily::Frank; }
    std::size_t dim() const override { return d_; }

    double gen(double t) const { return -std::log1p(std::expm1(-alpha_) * std::exp(-t)) / alpha_; }
    double gen_inv(double u) const { return -std::log(std::expm1(-alpha_ * u) / std::expm1(-alpha_)); }

    double cdf(std::span<const double> u) const override {
        check_point(u);
        double s = 0.0;
        for (double v : u) {
            if (v == 0.0) return 0.0;
            s += gen_inv(v);
        }
        return gen(s);
    }

    void sample(RngStream& rng, std::span<double> out) const override {
        if (d_ == 2) {
            double u1 = rng.uniform01();
            out[0] = u1;
            out[1] = FrankConditional(alpha_, 2, u1).margin_quantile(rng.uniform01());
            return;
        }
        double w = log_series(rng);
        for (std::size_t i = 0; i < d_; ++i)
            out[i] = clamp_unit(gen(rng.exponential() / w));
    }

    std::unique_ptr<ConditionalDistribution> condition_on(std::size_t, double u_k) const override {
        return std::make_unique<FrankConditional>(alpha_, d_, u_k);
    }

    double conditional_quantile(std::size_t, std::span<const double> given,
                                double q) const override {
        if (given.empty() || given.size() >= d_)
            throw std::domain_error("conditional_quantile: need 1..d-1 conditioned values");
        if (!(q > 0.0 && q < 1.0))
            throw std::domain_error("conditional_quantile: q outside (0,1)");
        if (given.size() == 1)
            return FrankConditional(alpha_, 2, given[0]).margin_quantile(q);
        // psi^(m)(t) ~ Q_m(y), y = x/(1-x), x = p exp(-t); |Q| recursion
        // |Q_{m+1}|_k = k|Q_m|_k + (k-1)|Q_m|_{k-1} keeps all terms positive.
        std::size_t m = given.size();
        std::vector<double> c{0.0, 1.0};
        for (std::size_t mm = 1; mm < m; ++mm) {
            std::vector<double> b(mm + 2, 0.0);
            for (std::size_t k = 1; k <= mm + 1; ++k) {
                double same = (k < c.size()) ? c[k] : 0.0;
                double lower = (k - 1 < c.size()) ? c[k - 1] : 0.0;
                b[k] = static_cast<double>(k) * same + static_cast<double>(k - 1) * lower;
            }
            c = std::move(b);
        }
        double t = 0.0;
        for (double w : given) t += gen_inv(w);
        auto poly_y = [&](double tt) {
            double x = p_ * std::exp(-tt);
            double y = x / (1.0 - x);
            double acc = 0.0;
            for (std::size_t k = c.size(); k-- > 1;) acc = acc * y + c[k];
            return acc * y;
        };
        double den = poly_y(t);
        auto cond = [&](double u) { return poly_y(t + gen_inv(u)) / den; };
        return solve_increasing(cond, q, 1e-300, 1.0 - 1e-16, 1e-10);
    }

private:
    // Logarithmic(p) frailty via Kemp's algorithm.
    double log_series(RngStream& rng) const {
        double v = rng.uniform01();
        if (v >= p_) return 1.0;
        double u = rng.uniform01();
        double q = -std::expm1(u * std::log1p(-p_));
        if (v <= q * q) return std::floor(1.0 + std::log(v) / std::log(q));
        if (v > q) return 1.0;
        return 2.0;
    }

    double alpha_;
    std::size_t d_;
    double p_; // 1 - exp(-alpha)
};

// ---------------------------------------------------------------------------
// FGM: C(u) = prod u_i (1 + theta prod (1-u_i)), theta in [-1,1].
// Conditioning on one coordinate reduces the parameter to theta(1-2u_k); the
// last free coordinate has the quadratic conditional cdf u(1 + W(1-u)).
// ---------------------------------------------------------------------------

double fgm_last_quantile(double w, double q) {
    // Inverse of u -> u(1 + w(1-u)); stable for w of either sign.
    double disc = (1.0 + w) * (1.0 + w) - 4.0 * w * q;
    return 2.0 * q / (1.0 + w + std::sqrt(disc));
}

class FgmConditional final : public ConditionalDistribution {
public:
    FgmConditional(double theta, std::size_t d) : theta_(theta), d_(d) {}
    std::size_t dim() const override { return d_; }
    void sample(RngStream& rng, std::span<double> out) const override {
        double w = theta_;
        for (std::size_t i = 0; i + 1 < d_; ++i) {
            out[i] = rng.uniform01();
            w *= 1.0 - 2.0 * out[i];
        }
        out[d_ - 1] = fgm_last_quantile(w, rng.uniform01());
    }

private:
    double theta_; // already reduced
    std::size_t d_;
};

class FgmCopula final : public Copula {
public:
    FgmCopula(double theta, std::size_t d) : theta_(theta), d_(d) {}
    CopulaFamily family() const override { return CopulaFamily::Fgm; }
    std::size_t dim() const override { return d_; }

    double cdf(std::span<const double> u) const override {
        check_point(u);
        double prod = 1.0, comp = 1.0;
        for (double v : u) {
            prod *= v;
            comp *= 1.0 - v;
        }
        return prod * (1.0 + theta_ * comp);
    }
    std::optional<double> diagonal_exponent() const override {
        if (theta_ == 0.0) return static_cast<double>(d_);
        return std::nullopt;
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        FgmConditional(theta_, d_).sample(rng, out);
    }
    std::unique_ptr<ConditionalDistribution> condition_on(std::size_t, double u_k) const override {
        return std::make_unique<FgmConditional>(theta_ * (1.0 - 2.0 * u_k), d_ - 1);
    }
    double conditional_quantile(std::size_t, std::span<const double> given,
                                double q) const override {
        if (given.empty() || given.size() >= d_)
            throw std::domain_error("conditional_quantile: need 1..d-1 conditioned values");
        if (!(q > 0.0 && q < 1.0))
            throw std::domain_error("conditional_quantile: q outside (0,1)");
        if (given.size() < d_ - 1) return q; // margins of the reduced law stay uniform
        double w = theta_;
        for (double v : given) w *= 1.0 - 2.0 * v;
        return fgm_last_quantile(w, q);
    }

private:
    double theta_;
    std::size_t d_;
};

} // namespace

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

namespace {

void check_dim(std::size_t d) {
    if (d < 2) throw std::domain_error("copula: dimension must be >= 2");
}

} // namespace

std::unique_ptr<Copula> independence_copula(std::size_t d) {
    check_dim(d);
    return std::make_unique<IndependenceCopula>(d);
}

std::unique_ptr<Copula> clayton_copula(double theta, std::size_t d) {
    check_dim(d);
    if (!(theta > 0.0)) throw std::domain_error("clayton: theta must be positive");
    return std::make_unique<ClaytonCopula>(theta, d);
}

std::unique_ptr<Copula> gumbel_copula(double theta, std::size_t d) {
    check_dim(d);
    if (!(theta >= 1.0)) throw std::domain_error("gumbel: theta must be >= 1");
    return std::make_unique<GumbelCopula>(theta, d);
}

std::unique_ptr<Copula> frank_copula(double alpha, std::size_t d) {
    check_dim(d);
    if (alpha == 0.0 || !std::isfinite(alpha))
        throw std::domain_error("frank: alpha must be finite and nonzero");
    if (d > 2 && alpha < 0.0)
        throw std::domain_error("frank: alpha must be positive for d >= 3");
    return std::make_unique<FrankCopula>(alpha, d);
}

std::unique_ptr<Copula> fgm_copula(double theta, std::size_t d) {
    check_dim(d);
    if (!(theta >= -1.0 && theta <= 1.0))
        throw std::domain_error("fgm: theta must lie in [-1,1]");
    return std::make_unique<FgmCopula>(theta, d);
}

double kendall_tau_to_param(CopulaFamily family, double tau) {
    switch (family) {
    case CopulaFamily::Clayton:
        if (!(tau > 0.0 && tau < 1.0))
            throw std::domain_error("kendall_tau_to_param: Clayton requires tau in (0,1)");
        return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::Gumbel:
        if (!(tau >= 0.0 && tau < 1.0))
            throw std::domain_error("kendall_tau_to_param: Gumbel requires tau in [0,1)");
        return 1.0 / (1.0 - tau);
    default:
        throw std::invalid_argument("kendall_tau_to_param: no closed form for this family");
    }
}

double frank_amh_parameter(double alpha, double u_k) {
    return -std::expm1(-alpha * u_k);
}

} // namespace tailmix
