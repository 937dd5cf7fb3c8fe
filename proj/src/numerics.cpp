#include "tailmix/numerics.hpp"
#include "tailmix/errors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace tailmix {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Acklam's coefficients for the inverse normal cdf.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};

double acklam(double p) {
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
           (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    double x = acklam(p);
    // One Halley step against the exact cdf.
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double solve_increasing(const std::function<double(double)>& f, double target,
                        double lo, double hi, double xtol) {
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo > 0.0 || fhi < 0.0)
        throw std::domain_error("solve_increasing: root not bracketed");
    // Bisection down to a narrow bracket.
    for (int i = 0; i < 40 && (hi - lo) > xtol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid) - target;
        if (fm <= 0.0) { lo = mid; flo = fm; } else { hi = mid; fhi = fm; }
    }
    // Secant polish from the bracket endpoints.
    double a = lo, b = hi, fa = flo, fb = fhi;
    for (int i = 0; i < 30; ++i) {
        if (b - a <= xtol || fb == fa) break;
        double x = b - fb * (b - a) / (fb - fa);
        if (!(x > lo && x < hi)) x = 0.5 * (a + b);
        double fx = f(x) - target;
        a = b; fa = fb;
        b = x; fb = fx;
        if (std::abs(fx) == 0.0) break;
    }
    double root = b;
    double resid = std::abs(f(root) - target);
    // The bisection bracket already guarantees xtol on the argument; the
    // residual check catches pathological flat spots.
    if (hi - lo > xtol && resid > 1e-8)
        throw InversionError("solve_increasing: failed to converge", resid);
    return root;
}

namespace {

// 64-point Gauss-Legendre rule on [-1,1], applied on two half panels.
struct GlRule {
    std::array<double, 64> x{}, w{};
    GlRule() {
        // Newton iteration on Legendre polynomials.
        const int n = 64;
        for (int i = 0; i < n / 2; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double p0, p1, dp;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0; p1 = t;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                    p0 = p1; p1 = p2;
                }
                dp = n * (t * p1 - p0) / (t * t - 1.0);
                double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

const GlRule& rule() {
    static const GlRule r;
    return r;
}

double gl_panel(const std::function<double(double)>& f, double a, double b) {
    const GlRule& r = rule();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 64; ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

} // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
    double mid = 0.5 * (a + b);
    return gl_panel(f, a, mid) + gl_panel(f, mid, b);
}

} // namespace tailmix
