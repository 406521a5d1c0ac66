#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace currents::util {

/// Neumaier compensated accumulator. Summation order still matters for
/// bitwise reproducibility, so callers must keep a fixed iteration order.
class KahanSum {
  public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// SplitMix64 step; used to derive independent RNG streams from one seed.
std::uint64_t splitmix64(std::uint64_t& state);

/// Hash a seed together with stream indices into a fresh 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Deterministic RNG. All draws are mapped from raw mt19937_64 output by
/// hand so sequences are identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t uniform_int(std::uint64_t n);

  private:
    std::mt19937_64 gen_;
};

/// Worker count: SHAPE_CURRENTS_THREADS if set (>= 1), else hardware.
unsigned thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads in static
/// contiguous blocks. Iterations must be independent; any exception is
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// SHA-256 as a lowercase hex string.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

/// Median of an unsorted vector (mean of middle pair for even sizes).
double median(std::vector<double> values);

/// Shortest round-trip decimal form of a double (%.17g trimmed).
std::string format_double(double v);

}  // namespace currents::util
