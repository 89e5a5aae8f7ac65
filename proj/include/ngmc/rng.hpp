#pragma once

#include <cstdint>
#include <random>

namespace ngmc {

// Deterministic random stream.  A (seed, stream_id) pair always reproduces
// the exact same draw sequence: the engine is the fully specified
// std::mt19937_64 and every transform below is spelled out explicitly, so
// no implementation-defined library distribution is involved.  Streams with
// different ids are decorrelated by running both words through splitmix64
// before seeding.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform();

  // Standard normal via the Marsaglia polar method (pairs are generated
  // together, the spare is cached inside the stream).
  double normal();

  // Next raw 64-bit engine word.
  std::uint64_t raw() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// splitmix64 mixing step; used for seed derivation and nothing else.
std::uint64_t splitmix64(std::uint64_t z);

}  // namespace ngmc
