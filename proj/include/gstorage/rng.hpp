#pragma once

#include <array>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace gstorage {

/// Seeded random stream. One stream per replication: results never depend on
/// which worker draws them. std::mt19937_64, std::seed_seq and Boost's
/// ziggurat normal are all fully specified algorithms, so a given
/// (root_seed, stream_id) produces the same numbers on every conforming
/// platform.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
      : root_seed_(root_seed), stream_id_(stream_id), engine_(make_engine(root_seed, stream_id)) {}

  std::uint64_t root_seed() const noexcept { return root_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  static std::mt19937_64 make_engine(std::uint64_t root, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
  }

  std::uint64_t root_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

/// Packs a small tag (e.g. a window index) above the replication index so
/// that separate estimation passes never reuse a stream.
inline std::uint64_t stream_id(std::uint64_t tag, std::uint64_t replication) {
  return (tag << 40) ^ replication;
}

}  // namespace gstorage
