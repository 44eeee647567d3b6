#ifndef CHAINCOHORT_RNG_HPP
#define CHAINCOHORT_RNG_HPP

#include <cstdint>

namespace chaincohort {

/// xoshiro256** seeded through splitmix64. Self-contained so that streams are
/// byte-identical across standard libraries and platforms, which the
/// synthetic-ledger and Monte Carlo fixtures rely on.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();

    /// Standard normal (polar Marsaglia, cached spare).
    double normal();

    /// Binomial(n, p). Exact inversion for small means; for large means the
    /// count is drawn from the matching normal approximation, which is
    /// indistinguishable at the tolerances the statistical fixtures use.
    int64_t binomial(int64_t n, double p);

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n);

private:
    uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace chaincohort

#endif  // CHAINCOHORT_RNG_HPP
