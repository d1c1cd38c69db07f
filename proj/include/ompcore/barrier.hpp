#pragma once

#include <cstddef>
#include <cstdint>

namespace ompcore {

/// Bookkeeping for a reusable generation-counting barrier. Not synchronized:
/// the owner guards it with its own lock so that parked threads can also wait
/// on other conditions (pending tasks) under the same mutex.
class GenerationCount {
 public:
  explicit GenerationCount(std::size_t parties) : parties_(parties) {}

  /// Registers an arrival and returns the generation the caller waits on.
  std::uint64_t arrive() {
    ++arrived_;
    return generation_;
  }

  bool all_arrived() const { return arrived_ >= parties_; }
  bool passed(std::uint64_t ticket) const { return generation_ != ticket; }

  void release() {
    arrived_ = 0;
    ++generation_;
  }

  /// Removes one participant from this and all later phases.
  void drop() {
    if (parties_ > 0) --parties_;
  }

  std::size_t parties() const { return parties_; }
  std::size_t arrived() const { return arrived_; }
  std::uint64_t generation() const { return generation_; }

 private:
  std::size_t parties_;
  std::size_t arrived_ = 0;
  std::uint64_t generation_ = 0;
};

}  // namespace ompcore
