#pragma once

// Portable, seedable sampling. mt19937_64 output is pinned by the standard,
// but std::binomial_distribution and friends are not — their algorithms are
// implementation-defined, which would break byte-identical artifacts across
// toolchains. The samplers here (inversion + BTPE binomial, chunked-Knuth
// Poisson, sequential-conditional multinomial) are fixed by this header.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <stdexcept>

namespace ghzkit {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Independent substream seed for (master seed, stream index); used to make
// per-setting sampling order-independent.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master + 0x9e3779b97f4a7c15ull * (index + 1);
    detail::splitmix64_next(state);
    return detail::splitmix64_next(state);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform double in [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::uint64_t raw() { return gen_(); }

    long binomial(long n, double p) {
        if (n < 0) throw std::invalid_argument("binomial: negative n");
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0,1]");
        if (n == 0 || p == 0.0) return 0;
        if (p == 1.0) return n;
        const double pp = std::min(p, 1.0 - p);
        const long k = (static_cast<double>(n) * pp <= 30.0) ? binomial_inversion(n, pp)
                                                             : binomial_btpe(n, pp);
        return p > 0.5 ? n - k : k;
    }

    long poisson(double lambda) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: negative rate");
        long total = 0;
        while (lambda > 30.0) {  // Poisson additivity: split the rate exactly
            total += poisson_knuth(30.0);
            lambda -= 30.0;
        }
        return total + poisson_knuth(lambda);
    }

    std::array<long, 16> multinomial16(long n, const std::array<double, 16>& probs) {
        if (n < 0) throw std::invalid_argument("multinomial16: negative n");
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0)) throw std::invalid_argument("multinomial16: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("multinomial16: probabilities must sum to 1");
        std::array<long, 16> out{};
        long remaining = n;
        double mass = sum;
        for (int i = 0; i < 15 && remaining > 0; ++i) {
            double cond = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 1.0;
            long k = binomial(remaining, cond);
            out[i] = k;
            remaining -= k;
            mass -= probs[i];
        }
        out[15] = remaining;
        return out;
    }

private:
    std::mt19937_64 gen_;

    // inversion by sequential search, for n*p <= 30 (p <= 1/2)
    long binomial_inversion(long n, double p) {
        const double q = 1.0 - p;
        const double s = p / q;
        const double a = (n + 1) * s;
        const double qn = std::pow(q, static_cast<double>(n));
        const double np = static_cast<double>(n) * p;
        const double bound =
            std::min(static_cast<double>(n), np + 10.0 * std::sqrt(np * q + 1.0));
        for (;;) {
            double f = qn, u = uniform();
            for (long x = 0; x <= static_cast<long>(bound); ++x) {
                if (u <= f) return x;
                u -= f;
                f *= (a / (x + 1) - s);
            }
            // fell off the tail guard; redraw
        }
    }

    // BTPE (Kachitvichyanukul & Schmeiser), for n*p > 30 (p <= 1/2)
    long binomial_btpe(long n, double r) {
        const double q = 1.0 - r;
        const double fm = n * r + r;
        const long m = static_cast<long>(fm);
        const double nrq = n * r * q;
        const double p1 = std::floor(2.195 * std::sqrt(nrq) - 4.6 * q) + 0.5;
        const double xm = m + 0.5;
        const double xl = xm - p1;
        const double xr = xm + p1;
        const double c = 0.134 + 20.5 / (15.3 + m);
        double a = (fm - xl) / (fm - xl * r);
        const double laml = a * (1.0 + 0.5 * a);
        a = (xr - fm) / (xr * q);
        const double lamr = a * (1.0 + 0.5 * a);
        const double p2 = p1 * (1.0 + 2.0 * c);
        const double p3 = p2 + c / laml;
        const double p4 = p3 + c / lamr;

        for (;;) {
            const double u = uniform() * p4;
            double v = uniform();
            long y;
            if (u <= p1) {  // triangular core: always accepted
                return static_cast<long>(xm - p1 * v + u);
            } else if (u <= p2) {  // parallelogram
                const double x = xl + (u - p1) / c;
                v = v * c + 1.0 - std::abs(m - x + 0.5) / p1;
                if (v > 1.0 || v <= 0.0) continue;
                y = static_cast<long>(x);
            } else if (u <= p3) {  // left exponential tail
                y = static_cast<long>(std::floor(xl + std::log(v) / laml));
                if (y < 0) continue;
                v = v * (u - p2) * laml;
            } else {  // right exponential tail
                y = static_cast<long>(std::floor(xr - std::log(v) / lamr));
                if (y > n) continue;
                v = v * (u - p3) * lamr;
            }

            const long k = std::labs(y - m);
            if (k <= 20 || k >= nrq / 2.0 - 1.0) {
                // recursive evaluation of f(y)/f(m)
                const double s = r / q;
                const double aa = s * (n + 1);
                double f = 1.0;
                if (m < y)
                    for (long i = m + 1; i <= y; ++i) f *= (aa / i - s);
                else if (m > y)
                    for (long i = y + 1; i <= m; ++i) f /= (aa / i - s);
                if (v <= f) return y;
                continue;
            }
            // squeeze on log f, then the full Stirling-series comparison
            const double rho =
                (k / nrq) * ((k * (k / 3.0 + 0.625) + 1.0 / 6.0) / nrq + 0.5);
            const double t = -k * static_cast<double>(k) / (2.0 * nrq);
            const double big_a = std::log(v);
            if (big_a < t - rho) return y;
            if (big_a > t + rho) continue;

            const double x1 = y + 1.0, f1 = m + 1.0;
            const double z = n + 1.0 - m, w = n - y + 1.0;
            const double x2 = x1 * x1, f2 = f1 * f1, z2 = z * z, w2 = w * w;
            auto stirling = [](double v2, double v1) {
                return (13860.0 -
                        (462.0 - (132.0 - (99.0 - 140.0 / v2) / v2) / v2) / v2) /
                       v1 / 166320.0;
            };
            const double bound = xm * std::log(f1 / x1) + (n - m + 0.5) * std::log(z / w) +
                                 (y - m) * std::log(w * r / (x1 * q)) + stirling(f2, f1) +
                                 stirling(z2, z) + stirling(x2, x1) + stirling(w2, w);
            if (big_a <= bound) return y;
        }
    }

    // product-of-uniforms, exact for lambda <= 30
    long poisson_knuth(double lambda) {
        if (lambda <= 0.0) return 0;
        const double floor_p = std::exp(-lambda);
        long k = 0;
        double prod = uniform();
        while (prod > floor_p) {
            ++k;
            prod *= uniform();
        }
        return k;
    }
};

}  // namespace ghzkit
