#pragma once

// Data-sharing helpers: private/firstprivate copies, lastprivate write-back,
// reductions and copyprivate broadcast.

#include <any>
#include <cstddef>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>

#include "ompcore/directive.hpp"
#include "ompcore/runtime.hpp"

namespace ompcore {

enum class PrivateMode { permissive, strict };

class UninitializedRead : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A per-thread binding that starts out unassigned.
template <class T>
class Private {
 public:
  explicit Private(PrivateMode mode = PrivateMode::permissive) : mode_(mode) {}

  Private& operator=(T value) {
    value_ = std::move(value);
    return *this;
  }

  bool assigned() const { return value_.has_value(); }

  /// Strict mode throws on read-before-write; permissive mode yields T{}.
  const T& get() const {
    if (!value_) {
      if (mode_ == PrivateMode::strict) throw UninitializedRead("private variable read before assignment");
      value_.emplace();
    }
    return *value_;
  }

  T& ref() {
    get();
    return *value_;
  }

 private:
  PrivateMode mode_;
  mutable std::optional<T> value_;
};

template <class T>
Private<T> make_private(PrivateMode mode = PrivateMode::permissive) {
  return Private<T>(mode);
}

/// Top-level copy: containers are duplicated, pointer-like elements stay shared.
template <class T>
T make_firstprivate(const T& value) {
  static_assert(std::is_copy_constructible_v<T>, "firstprivate requires a copyable value");
  return T(value);
}

template <class T>
void lastprivate_writeback(bool is_last, const T& local_value, T& target) {
  if (is_last) target = local_value;
}

// ---------------------------------------------------------------------------
// Reductions

template <class T>
constexpr bool reduction_supports(ReductionOp op) {
  if constexpr (std::is_same_v<T, bool>) {
    switch (op) {
      case ReductionOp::add:
      case ReductionOp::mul:
      case ReductionOp::sub:
        return false;
      default:
        return true;
    }
  } else if constexpr (std::is_integral_v<T>) {
    return true;
  } else if constexpr (std::is_floating_point_v<T>) {
    return op != ReductionOp::bit_and && op != ReductionOp::bit_or && op != ReductionOp::bit_xor;
  } else {
    return false;
  }
}

template <class T>
T reduction_identity(ReductionOp op) {
  if (!reduction_supports<T>(op)) {
    throw std::invalid_argument("reduction operator '" + std::string(to_string(op)) +
                                "' is not supported for this value type");
  }
  switch (op) {
    case ReductionOp::add:
    case ReductionOp::sub:
    case ReductionOp::bit_or:
    case ReductionOp::bit_xor:
      return T{};
    case ReductionOp::mul:
      return T(1);
    case ReductionOp::logical_and:
      return T(true);
    case ReductionOp::logical_or:
      return T(false);
    case ReductionOp::min:
      if constexpr (std::numeric_limits<T>::has_infinity) return std::numeric_limits<T>::infinity();
      return std::numeric_limits<T>::max();
    case ReductionOp::max:
      if constexpr (std::numeric_limits<T>::has_infinity) return -std::numeric_limits<T>::infinity();
      return std::numeric_limits<T>::lowest();
    case ReductionOp::bit_and:
      if constexpr (std::is_same_v<T, bool>) {
        return true;
      } else if constexpr (std::is_integral_v<T>) {
        return static_cast<T>(~T{});
      }
      break;
  }
  throw std::invalid_argument("unsupported reduction operator");
}

/// `lhs op rhs`. Subtraction reductions sum their partial results.
template <class T>
T reduction_combine(ReductionOp op, const T& lhs, const T& rhs) {
  switch (op) {
    case ReductionOp::add:
    case ReductionOp::sub:
      if constexpr (!std::is_same_v<T, bool>) return static_cast<T>(lhs + rhs);
      break;
    case ReductionOp::mul:
      if constexpr (!std::is_same_v<T, bool>) return static_cast<T>(lhs * rhs);
      break;
    case ReductionOp::min:
      return rhs < lhs ? rhs : lhs;
    case ReductionOp::max:
      return lhs < rhs ? rhs : lhs;
    case ReductionOp::bit_and:
      if constexpr (std::is_integral_v<T>) return static_cast<T>(lhs & rhs);
      break;
    case ReductionOp::bit_or:
      if constexpr (std::is_integral_v<T>) return static_cast<T>(lhs | rhs);
      break;
    case ReductionOp::bit_xor:
      if constexpr (std::is_integral_v<T>) return static_cast<T>(lhs ^ rhs);
      break;
    case ReductionOp::logical_and:
      return static_cast<T>(static_cast<bool>(lhs) && static_cast<bool>(rhs));
    case ReductionOp::logical_or:
      return static_cast<T>(static_cast<bool>(lhs) || static_cast<bool>(rhs));
  }
  throw std::invalid_argument("reduction operator '" + std::string(to_string(op)) +
                              "' is not supported for this value type");
}

/// One member's accumulator for a reduction into `target`.
template <class T>
class ReductionSlot {
 public:
  ReductionSlot(ReductionOp op, T& target)
      : op_(op), identity_(reduction_identity<T>(op)), local_(identity_), target_(&target) {}

  ReductionOp op() const { return op_; }
  const T& identity() const { return identity_; }
  bool combined() const { return combined_; }

  T& local() { return local_; }
  const T& local() const { return local_; }

  /// Folds `value` into the local accumulator.
  void accumulate(const T& value) { local_ = reduction_combine(op_, local_, value); }

  /// target := target op local, under the team lock. Once per slot.
  void combine() {
    if (combined_) throw std::logic_error("reduction slot combined twice");
    auto team = current_record().team;
    std::lock_guard lock(team->mutex());
    *target_ = reduction_combine(op_, *target_, local_);
    combined_ = true;
  }

 private:
  ReductionOp op_;
  T identity_;
  T local_;
  T* target_;
  bool combined_ = false;
};

template <class T>
ReductionSlot<T> reduction_begin(ReductionOp op, T& target) {
  return ReductionSlot<T>(op, target);
}

template <class T>
void reduction_end(ReductionSlot<T>& slot) {
  slot.combine();
}

// ---------------------------------------------------------------------------
// copyprivate

/// Broadcast slot of one `single` construct. Guarded by the team mutex.
struct CopyChannel {
  bool published = false;
  std::any payload;
};

namespace detail {
std::shared_ptr<CopyChannel> active_copy_channel();
void publish_payload(std::any payload);
std::any collect_payload();
}  // namespace detail

/// Called by the member granted the enclosing `single`, inside the block.
template <class... Ts>
void copyprivate_publish(const Ts&... values) {
  detail::publish_payload(std::any(std::tuple<Ts...>(values...)));
}

/// Called by every member after the `single` scope; blocks until published.
template <class... Ts>
auto copyprivate_collect() {
  auto payload = detail::collect_payload();
  auto* values = std::any_cast<std::tuple<Ts...>>(&payload);
  if (!values) throw std::logic_error("copyprivate_collect: value types differ from the published ones");
  if constexpr (sizeof...(Ts) == 1) {
    return std::get<0>(*values);
  } else {
    return *values;
  }
}

}  // namespace ompcore
