#ifndef HSMKIT_RNG_HPP
#define HSMKIT_RNG_HPP

/* Counter-based 64-bit generator in the splitmix64 family.  There is no
   global state: a Rng is a (key, counter) pair, and independent
   substreams are derived as substream(seed, index), which is how the
   optimizer seeds each restart.  Same seed, same stream, same draws. */

#include <cstdint>
#include <vector>

namespace hsmkit {

namespace detail {
constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t avalanche(std::uint64_t z) {
    z ^= z >> 30; z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27; z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(detail::avalanche(seed ^ detail::avalanche(stream + detail::GOLDEN))),
          counter_(0) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(seed, index); }

    std::uint64_t next_u64() { return detail::avalanche(key_ + (++counter_) * detail::GOLDEN); }

    // uniform in [0,1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // index into a discrete distribution given by nonnegative weights
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    std::vector<double> multinomial(std::uint64_t n, const std::vector<double>& probs) {
        std::vector<double> counts(probs.size(), 0.0);
        for (std::uint64_t k = 0; k < n; ++k) counts[categorical(probs)] += 1.0;
        return counts;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}

#endif
