#pragma once

#include <cstdint>
#include <iosfwd>

#include "basisbreak/errors.hpp"
#include "basisbreak/rng.hpp"

namespace bb {

inline constexpr std::uint64_t kMersenne31 = (std::uint64_t{1} << 31) - 1;

// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime_u64(std::uint64_t n);

// The prime P of F_P. Residues are plain uint64_t in [0, p); the methods
// below are the raw arithmetic every vector/matrix kernel is built on.
class FieldModulus {
 public:
  FieldModulus() : FieldModulus(kMersenne31) {}
  explicit FieldModulus(std::uint64_t p);

  std::uint64_t p() const { return p_; }
  int bit_width() const { return bit_width_; }
  bool is_mersenne31() const { return mersenne31_; }

  std::uint64_t reduce(std::uint64_t x) const {
    return mersenne31_ ? reduce_mersenne(x) : x % p_;
  }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    return a >= p_ - b ? a - (p_ - b) : a + b;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    return a >= b ? a - b : a + (p_ - b);
  }
  std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : p_ - a; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return mersenne31_ ? reduce_mersenne(a * b) : mul_generic(a, b);
  }
  // Plain `%` reduction through a 128-bit product, valid for any p.
  std::uint64_t mul_generic(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(a) * b) % p_);
  }
  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;
  // Throws DivisionByZero for a == 0.
  std::uint64_t inv(std::uint64_t a) const;

  // Uniform residue by masked rejection sampling (no modulo bias).
  std::uint64_t sample(SeededRng& rng) const { return rng.below(p_); }
  std::uint64_t sample_nonzero(SeededRng& rng) const {
    return 1 + rng.below(p_ - 1);
  }

  // Lift a signed integer into the field.
  std::uint64_t from_signed(std::int64_t v) const;

  friend bool operator==(const FieldModulus& a, const FieldModulus& b) {
    return a.p_ == b.p_;
  }

 private:
  // x < 2^62 (product of two residues); uses 2^31 = 1 mod P.
  static std::uint64_t reduce_mersenne(std::uint64_t x) {
    x = (x & kMersenne31) + (x >> 31);
    x = (x & kMersenne31) + (x >> 31);
    return x >= kMersenne31 ? x - kMersenne31 : x;
  }

  std::uint64_t p_;
  int bit_width_;
  bool mersenne31_;
};

void require_same(const FieldModulus& a, const FieldModulus& b);

class FieldElement {
 public:
  FieldElement() = default;
  FieldElement(std::uint64_t value, const FieldModulus& m)
      : value_(m.reduce(value)), modulus_(m) {}

  std::uint64_t value() const { return value_; }
  const FieldModulus& modulus() const { return modulus_; }
  bool is_zero() const { return value_ == 0; }

  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.modulus_ == b.modulus_ && a.value_ == b.value_;
  }

 private:
  std::uint64_t value_ = 0;
  FieldModulus modulus_;
};

FieldElement add(const FieldElement& a, const FieldElement& b);
FieldElement sub(const FieldElement& a, const FieldElement& b);
FieldElement mul(const FieldElement& a, const FieldElement& b);
FieldElement neg(const FieldElement& a);
FieldElement inv(const FieldElement& a);
FieldElement sample_uniform(const FieldModulus& m, SeededRng& rng);

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) {
  return add(a, b);
}
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) {
  return sub(a, b);
}
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) {
  return mul(a, b);
}

std::ostream& operator<<(std::ostream& os, const FieldElement& e);

}  // namespace bb
