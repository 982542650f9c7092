#pragma once
// Shared primitives: tri-state cells, finite windows over Z, lazily evaluated
// word views, exact rationals, the library-wide error taxonomy and the
// deterministic seeded RNG every sampling routine goes through.

#include <boost/rational.hpp>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace toeplitz {

using Rational = boost::rational<long long>;

// ---------------------------------------------------------------------------
// tri-state cells

using Cell = char;
inline constexpr Cell kZero = '0';
inline constexpr Cell kOne = '1';
inline constexpr Cell kUnknown = '?';

inline bool is_known(Cell c) { return c == kZero || c == kOne; }
inline Cell flip_cell(Cell c) {
  return is_known(c) ? (c == kZero ? kOne : kZero) : kUnknown;
}
inline int cell_bit(Cell c) { return c == kOne ? 1 : 0; }
inline Cell bit_cell(int b) { return b ? kOne : kZero; }

inline long long pmod(long long a, long long m) {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

// ---------------------------------------------------------------------------
// errors

enum class Errc {
  invalid_chain,
  level_out_of_range,
  invalid_label,
  unsupported_period,
  no_witness_possible,
  depth_insufficient,
  ambiguous_alignment,
  no_alignment,
  degenerate_family,
  budget_insufficient,
  parse_error,
  invalid_argument,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

// ---------------------------------------------------------------------------
// windows over Z

// A finite fragment of a two-sided word; covers [start, start + size()).
struct Window {
  long long start = 0;
  std::string cells;  // over {'0','1','?'}

  long long size() const { return static_cast<long long>(cells.size()); }
  long long end() const { return start + size(); }
  bool contains(long long h) const { return h >= start && h < end(); }
  Cell at(long long h) const {
    return contains(h) ? cells[static_cast<size_t>(h - start)] : kUnknown;
  }
  bool total() const { return cells.find(kUnknown) == std::string::npos; }
  Window shifted(long long k) const { return Window{start + k, cells}; }
  bool operator==(const Window&) const = default;
};

// ---------------------------------------------------------------------------
// word views

// Lazily evaluated two-sided word; evaluation must be pure so views can be
// shared across worker threads.
class WordView {
 public:
  WordView() = default;
  explicit WordView(std::function<Cell(long long)> f) : eval_(std::move(f)) {}

  Cell operator()(long long h) const { return eval_ ? eval_(h) : kUnknown; }

  // inclusive [a, b]
  Window window(long long a, long long b) const {
    Window w{a, std::string(static_cast<size_t>(b - a + 1), kUnknown)};
    for (long long h = a; h <= b; ++h) w.cells[static_cast<size_t>(h - a)] = (*this)(h);
    return w;
  }

  // shifted(k) satisfies shifted(k)(h) == (*this)(h - k)
  WordView shifted(long long k) const {
    auto f = eval_;
    return WordView([f, k](long long h) { return f ? f(h - k) : kUnknown; });
  }

  bool valid() const { return static_cast<bool>(eval_); }

 private:
  std::function<Cell(long long)> eval_;
};

// ---------------------------------------------------------------------------
// deterministic RNG

// splitmix64. All randomness in the library flows through this generator so
// that a seed pins every report byte for byte, independent of platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, n); multiply-high reduction is platform-stable
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  bool coin() { return next() >> 63; }

 private:
  std::uint64_t state_;
};

}  // namespace toeplitz
