#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fgtk {

namespace detail {
// SplitMix64 finalizer; full avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based stream: the value of draw #c is a pure function of
// (seed, stream_id, c), so (seed, stream_id) pins the whole sequence and
// substreams can be handed to workers without any shared state.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  RngStream() = default;
  RngStream(std::uint64_t s, std::uint64_t id) : seed(s), stream_id(id) {}

  std::uint64_t next_u64() {
    std::uint64_t h = detail::mix64(detail::mix64(detail::mix64(seed) ^ stream_id) ^ counter);
    ++counter;
    return h;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}, rejection-free modulo bias is negligible for
  // the n used here (< 2^32), but we reject anyway to keep the law exact.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n = 0");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Inversion by sequential search; exact for any lambda. Large means are
  // split into <= 32-mean chunks (a sum of independent Poissons is Poisson).
  std::uint64_t poisson(double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda)) throw std::invalid_argument("poisson: bad lambda");
    std::uint64_t total = 0;
    while (lambda > 32.0) {
      total += poisson_small(32.0);
      lambda -= 32.0;
    }
    return total + poisson_small(lambda);
  }

  // Draws an index from unnormalized weights given as a callable, by CDF
  // inversion; avoids materializing the weight vector.
  template <typename Fn>
  std::size_t discrete_by(Fn&& weight, std::size_t count) {
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += weight(i);
    double u = unit() * sum;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
      acc += weight(i);
      if (u < acc) return i;
    }
    return count == 0 ? 0 : count - 1;
  }

  // Draws an index from an unnormalized weight vector by CDF inversion.
  std::size_t discrete(const std::vector<double>& weights) {
    double sum = 0.0;
    for (double w : weights) sum += w;
    double u = unit() * sum;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  // Derives an independent stream; tags are hashed into the stream id so the
  // same (seed, tags...) always names the same stream.
  RngStream substream(std::uint64_t tag) const {
    RngStream s;
    s.seed = seed;
    s.stream_id = detail::mix64(stream_id ^ detail::mix64(tag));
    return s;
  }
  RngStream substream(std::uint64_t a, std::uint64_t b) const { return substream(a).substream(b); }
  RngStream substream(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return substream(a).substream(b).substream(c);
  }

 private:
  std::uint64_t poisson_small(double lambda) {
    if (lambda <= 0.0) return 0;
    double p = std::exp(-lambda);
    double acc = p;
    double u = unit();
    std::uint64_t x = 0;
    while (u > acc) {
      ++x;
      p *= lambda / static_cast<double>(x);
      acc += p;
      if (x > 2000) break;  // unreachable for lambda <= 32
    }
    return x;
  }
};

}  // namespace fgtk
