#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "basisbreak/linalg.hpp"

namespace bb {

// Permutation matrix P acting on row vectors: x * P moves coordinate j to
// position image(j), i.e. P[j][image(j)] = 1.
class Permutation {
 public:
  Permutation() = default;
  // Throws ConfigError unless `image` is a bijection on [0, n).
  explicit Permutation(std::vector<std::size_t> image);

  static Permutation identity(std::size_t n);
  // Seeded Fisher-Yates.
  static Permutation random(std::size_t n, SeededRng& rng);

  std::size_t size() const { return image_.size(); }
  std::size_t operator[](std::size_t j) const { return image_[j]; }
  std::span<const std::size_t> image() const { return image_; }

  Permutation inverse() const;
  FieldMatrix as_matrix(const FieldModulus& m) const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> image_;
};

bool is_bijection(std::span<const std::size_t> image);

// x * P
FieldVector apply(const FieldVector& x, const Permutation& p);
inline FieldVector operator*(const FieldVector& x, const Permutation& p) {
  return apply(x, p);
}
// P^T * W: row j of W lands on row image(j).
FieldMatrix lock_rows(const Permutation& p, const FieldMatrix& w);
// P * W, the inverse of lock_rows.
FieldMatrix unlock_rows(const Permutation& p, const FieldMatrix& w);
// W * P: column j of W lands on column image(j).
FieldMatrix permute_cols(const FieldMatrix& w, const Permutation& p);

}  // namespace bb
