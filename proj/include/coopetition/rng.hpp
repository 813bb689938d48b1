#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace coopetition {

/// Reproducible random stream identified by (master_seed, stream_index).
///
/// The engine is std::mt19937_64 seeded through std::seed_seq; both are fully
/// specified by the standard, so a given pair produces the same sequence on
/// every conforming implementation. Uniform variates are built directly from
/// the top 53 bits instead of std::uniform_real_distribution, whose algorithm
/// is implementation-defined.
///
/// Monte Carlo code derives one stream per replication (stream_index =
/// replication index), which keeps results independent of the order in which
/// replications are scheduled. A stream is single-owner.
class RngStream
{
public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed), stream_index_(stream_index)
  {
    reset();
  }

  void reset()
  {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed_),
                      static_cast<std::uint32_t>(master_seed_ >> 32),
                      static_cast<std::uint32_t>(stream_index_),
                      static_cast<std::uint32_t>(stream_index_ >> 32),
                      0x636f6f70u};
    engine_.seed(seq);
  }

  /// Uniform draw in [0, 1).
  double uniform01()
  {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform index in {0, ..., n-1}; consumes exactly one draw.
  std::size_t uniform_index(std::size_t n)
  {
    auto idx = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return idx < n ? idx : n - 1;
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

}  // namespace coopetition
