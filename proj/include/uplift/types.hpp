#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uplift {

using ValueIndex = std::uint32_t;

/// Whether a person was sent the mailing.
enum class Treatment : std::uint8_t { kNotMailed = 0, kMailed = 1 };

/// Whether a person subscribed.
enum class Outcome : std::uint8_t { kNo = 0, kYes = 1 };

constexpr std::size_t index_of(Treatment m) { return static_cast<std::size_t>(m); }
constexpr std::size_t index_of(Outcome s) { return static_cast<std::size_t>(s); }

/// Outcome counts for a single population cell.
struct OutcomeCounts {
  std::uint64_t yes = 0;
  std::uint64_t no = 0;

  std::uint64_t total() const { return yes + no; }

  OutcomeCounts& operator+=(const OutcomeCounts& o) {
    yes += o.yes;
    no += o.no;
    return *this;
  }
  friend OutcomeCounts operator+(OutcomeCounts a, const OutcomeCounts& b) { return a += b; }
  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

/// Outcome counts cross-tabulated by treatment.
struct CrossTab {
  OutcomeCounts mailed;
  OutcomeCounts not_mailed;

  const OutcomeCounts& operator[](Treatment m) const {
    return m == Treatment::kMailed ? mailed : not_mailed;
  }
  OutcomeCounts& operator[](Treatment m) { return m == Treatment::kMailed ? mailed : not_mailed; }

  OutcomeCounts pooled() const { return mailed + not_mailed; }
  std::uint64_t total() const { return mailed.total() + not_mailed.total(); }

  void add(Treatment m, Outcome s) {
    auto& cell = (*this)[m];
    if (s == Outcome::kYes) {
      ++cell.yes;
    } else {
      ++cell.no;
    }
  }

  CrossTab& operator+=(const CrossTab& o) {
    mailed += o.mailed;
    not_mailed += o.not_mailed;
    return *this;
  }
  friend CrossTab operator+(CrossTab a, const CrossTab& b) { return a += b; }
  friend bool operator==(const CrossTab&, const CrossTab&) = default;
};

/// Raised when input violates a documented precondition or invariant.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uplift
