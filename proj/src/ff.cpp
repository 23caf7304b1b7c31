#include "basisbreak/ff.hpp"

#include <bit>
#include <ostream>
#include <string>

namespace bb {
namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e > 0) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL,
                          23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These twelve bases are a deterministic witness set below 3.3e24.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL,
                          23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

FieldModulus::FieldModulus(std::uint64_t p)
    : p_(p),
      bit_width_(static_cast<int>(std::bit_width(p))),
      mersenne31_(p == kMersenne31) {
  if (p < 2 || !is_prime_u64(p)) {
    throw ConfigError("field modulus " + std::to_string(p) + " is not prime");
  }
}

std::uint64_t FieldModulus::pow(std::uint64_t base, std::uint64_t exp) const {
  std::uint64_t r = 1 % p_;
  base = reduce(base);
  while (exp > 0) {
    if (exp & 1) r = mul(r, base);
    base = mul(base, base);
    exp >>= 1;
  }
  return r;
}

std::uint64_t FieldModulus::inv(std::uint64_t a) const {
  a = reduce(a);
  if (a == 0) throw DivisionByZero("inverse of zero in F_" + std::to_string(p_));
  // Extended Euclid on signed 128-bit to cover the whole 64-bit range.
  __int128 t = 0, new_t = 1;
  __int128 r = p_, new_r = a;
  while (new_r != 0) {
    const __int128 q = r / new_r;
    __int128 tmp = t - q * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - q * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (t < 0) t += p_;
  return static_cast<std::uint64_t>(t);
}

std::uint64_t FieldModulus::from_signed(std::int64_t v) const {
  if (v >= 0) return static_cast<std::uint64_t>(v) % p_;
  const std::uint64_t mag =
      static_cast<std::uint64_t>(-(v + 1)) + 1;  // |v| without overflow
  return neg(mag % p_);
}

void require_same(const FieldModulus& a, const FieldModulus& b) {
  if (!(a == b)) {
    throw ConfigError("modulus mismatch: " + std::to_string(a.p()) + " vs " +
                      std::to_string(b.p()));
  }
}

FieldElement add(const FieldElement& a, const FieldElement& b) {
  require_same(a.modulus(), b.modulus());
  return FieldElement(a.modulus().add(a.value(), b.value()), a.modulus());
}

FieldElement sub(const FieldElement& a, const FieldElement& b) {
  require_same(a.modulus(), b.modulus());
  return FieldElement(a.modulus().sub(a.value(), b.value()), a.modulus());
}

FieldElement mul(const FieldElement& a, const FieldElement& b) {
  require_same(a.modulus(), b.modulus());
  return FieldElement(a.modulus().mul(a.value(), b.value()), a.modulus());
}

FieldElement neg(const FieldElement& a) {
  return FieldElement(a.modulus().neg(a.value()), a.modulus());
}

FieldElement inv(const FieldElement& a) {
  return FieldElement(a.modulus().inv(a.value()), a.modulus());
}

FieldElement sample_uniform(const FieldModulus& m, SeededRng& rng) {
  return FieldElement(m.sample(rng), m);
}

std::ostream& operator<<(std::ostream& os, const FieldElement& e) {
  return os << e.value();
}

}  // namespace bb
