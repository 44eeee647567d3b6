#include "chaincohort/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace chaincohort {

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

int64_t Rng::binomial(int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("binomial with negative n");
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);

    const double mean = static_cast<double>(n) * p;
    if (mean <= 256.0) {
        // Inversion on the cdf; O(mean) expected.
        const double log1mp = std::log1p(-p);
        const double pf = p / (1.0 - p);
        double prob = std::exp(static_cast<double>(n) * log1mp);  // P(X = 0)
        double cdf = prob;
        const double u = uniform();
        int64_t k = 0;
        while (u > cdf && k < n) {
            prob *= pf * static_cast<double>(n - k) / static_cast<double>(k + 1);
            cdf += prob;
            ++k;
            if (prob < 1e-300 && u > cdf) {  // fp underflow guard deep in the tail
                return k;
            }
        }
        return k;
    }
    // Large-mean regime: matching normal deviate, rounded and clamped.
    const double sd = std::sqrt(mean * (1.0 - p));
    double k = std::floor(mean + sd * normal() + 0.5);
    if (k < 0.0) k = 0.0;
    if (k > static_cast<double>(n)) k = static_cast<double>(n);
    return static_cast<int64_t>(k);
}

}  // namespace chaincohort
