#pragma once

#include <atomic>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

namespace chainscan {

// ----------------------------------------------------------------------------
// Element types
// ----------------------------------------------------------------------------

enum class ElemType { i32, i64, f32, f64 };
enum class OpKind { add, max, min };

template <typename T>
concept Element = std::same_as<T, std::int32_t> || std::same_as<T, std::int64_t> ||
                  std::same_as<T, float> || std::same_as<T, double>;

template <Element T>
inline constexpr ElemType elem_type_of = std::is_same_v<T, std::int32_t>   ? ElemType::i32
                                         : std::is_same_v<T, std::int64_t> ? ElemType::i64
                                         : std::is_same_v<T, float>        ? ElemType::f32
                                                                           : ElemType::f64;

constexpr int elem_bits(ElemType t) {
  return (t == ElemType::i32 || t == ElemType::f32) ? 32 : 64;
}

std::string_view to_string(ElemType t);
std::string_view to_string(OpKind k);
/// Throws std::invalid_argument on an unknown name.
ElemType parse_elem_type(std::string_view name);
OpKind parse_op_kind(std::string_view name);

/// Calls `f(std::type_identity<T>{})` for the runtime element type.
template <typename F>
decltype(auto) dispatch_elem(ElemType t, F&& f) {
  switch (t) {
    case ElemType::i32: return std::forward<F>(f)(std::type_identity<std::int32_t>{});
    case ElemType::i64: return std::forward<F>(f)(std::type_identity<std::int64_t>{});
    case ElemType::f32: return std::forward<F>(f)(std::type_identity<float>{});
    case ElemType::f64: return std::forward<F>(f)(std::type_identity<double>{});
  }
  throw std::invalid_argument("unknown element type");
}

// ----------------------------------------------------------------------------
// Operators
// ----------------------------------------------------------------------------

/// An associative binary operator with an identity element.
template <typename Op, typename T>
concept ScanOp = requires(const Op& op, T a, T b) {
  { op(a, b) } -> std::convertible_to<T>;
  { op.identity() } -> std::convertible_to<T>;
  { op.name() } -> std::convertible_to<std::string_view>;
};

/// Integer addition wraps (two's complement); float addition is IEEE.
template <Element T>
struct Add {
  using value_type = T;
  constexpr T operator()(T a, T b) const noexcept {
    if constexpr (std::is_integral_v<T>) {
      using U = std::make_unsigned_t<T>;
      return static_cast<T>(static_cast<U>(a) + static_cast<U>(b));
    } else {
      return a + b;
    }
  }
  static constexpr T identity() noexcept { return T{0}; }
  static constexpr std::string_view name() noexcept { return "add"; }
};

template <Element T>
struct Max {
  using value_type = T;
  constexpr T operator()(T a, T b) const noexcept { return a < b ? b : a; }
  static constexpr T identity() noexcept {
    if constexpr (std::is_floating_point_v<T>) return -std::numeric_limits<T>::infinity();
    else return std::numeric_limits<T>::min();
  }
  static constexpr std::string_view name() noexcept { return "max"; }
};

template <Element T>
struct Min {
  using value_type = T;
  constexpr T operator()(T a, T b) const noexcept { return b < a ? b : a; }
  static constexpr T identity() noexcept {
    if constexpr (std::is_floating_point_v<T>) return std::numeric_limits<T>::infinity();
    else return std::numeric_limits<T>::max();
  }
  static constexpr std::string_view name() noexcept { return "min"; }
};

/// Calls `f(Add<T>{})`, `f(Max<T>{})` or `f(Min<T>{})`.
template <Element T, typename F>
decltype(auto) dispatch_operator(OpKind kind, F&& f) {
  switch (kind) {
    case OpKind::add: return std::forward<F>(f)(Add<T>{});
    case OpKind::max: return std::forward<F>(f)(Max<T>{});
    case OpKind::min: return std::forward<F>(f)(Min<T>{});
  }
  throw std::invalid_argument("unknown operator kind");
}

/// Type-erased operator. Immutable and safe to share between threads.
///
/// The built-in functors (Add, Max, Min) are preferred on hot paths; this
/// wrapper exists for runtime selection and user-supplied operators.
template <Element T>
class ScanOperator {
 public:
  using value_type = T;

  ScanOperator(std::string name, T identity, std::function<T(T, T)> apply)
      : name_(std::move(name)), identity_(identity), apply_(std::move(apply)) {}

  T operator()(T a, T b) const { return apply_(a, b); }
  T identity() const noexcept { return identity_; }
  std::string_view name() const noexcept { return name_; }

 private:
  std::string name_;
  T identity_;
  std::function<T(T, T)> apply_;
};

template <Element T>
ScanOperator<T> make_operator(OpKind kind) {
  return dispatch_operator<T>(kind, [](auto op) {
    return ScanOperator<T>(std::string(op.name()), op.identity(), op);
  });
}

/// Throws std::invalid_argument for an unsupported operator name.
template <Element T>
ScanOperator<T> make_operator(std::string_view kind) {
  return make_operator<T>(parse_op_kind(kind));
}

// ----------------------------------------------------------------------------
// Instrumentation
// ----------------------------------------------------------------------------

/// Counts apply invocations of the wrapped operator.
///
/// Copies share one atomic counter, so algorithms may take the operator by
/// value and concurrent workers may increment it. Overflow of the 64-bit
/// counter throws std::overflow_error rather than wrapping.
template <typename Op>
class CountingOperator {
 public:
  using value_type = typename Op::value_type;

  explicit CountingOperator(Op inner)
      : inner_(std::move(inner)), count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

  value_type operator()(value_type a, value_type b) const {
    auto prev = count_->fetch_add(1, std::memory_order_relaxed);
    if (prev == std::numeric_limits<std::uint64_t>::max()) {
      throw std::overflow_error("operator invocation counter wrapped");
    }
    return inner_(a, b);
  }
  value_type identity() const { return inner_.identity(); }
  std::string_view name() const { return inner_.name(); }

  std::uint64_t count() const noexcept { return count_->load(std::memory_order_relaxed); }
  void reset() noexcept { count_->store(0, std::memory_order_relaxed); }
  const Op& inner() const noexcept { return inner_; }

 private:
  Op inner_;
  std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

template <typename Op>
CountingOperator<Op> wrap_counting(Op op) {
  return CountingOperator<Op>(std::move(op));
}

}  // namespace chainscan
