#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace iuq {

struct MasterSeed {
  std::uint64_t value = 0;
};

// Splittable, counter-based random stream.
//
// A stream is identified by a 64-bit key obtained by folding the master seed
// and a lineage of labels (a name, optionally followed by an index) through a
// strong 64-bit mixer. Output i of a stream is a pure function of (key, i),
// so derivation is O(1), associative (derive(derive(s,a),b) == derive(s,ab)),
// and independent of how many draws the parent has already produced. Streams
// with distinct lineages never share generator state, which is what makes
// outer/inner loops parallelizable without coordination.
class RngStream {
 public:
  RngStream() = default;

  static RngStream from_seed(MasterSeed seed);

  // Child stream labelled by name (and index). Does not advance this stream.
  RngStream derive(std::string_view name) const;
  RngStream derive(std::string_view name, std::uint64_t index) const;

  std::uint64_t next_u64();
  double next_uniform();                  // in [0, 1)
  double next_exponential(double rate);   // inverse CDF; rate > 0
  std::size_t draw_index(std::size_t n);  // uniform in [0, n); one draw

  std::uint64_t key() const { return key_; }
  std::uint64_t draws_consumed() const { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Inverse CDF of the exponential distribution, -ln(1-u)/rate.
double exponential_icdf(double u, double rate);

}  // namespace iuq
