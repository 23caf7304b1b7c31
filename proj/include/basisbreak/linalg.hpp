#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "basisbreak/ff.hpp"

namespace bb {

// Row vector over F_P. Entries are kept reduced to [0, p).
class FieldVector {
 public:
  FieldVector() = default;
  FieldVector(const FieldModulus& m, std::size_t dim)
      : modulus_(m), entries_(dim, 0) {}
  FieldVector(const FieldModulus& m, std::vector<std::uint64_t> entries);

  static FieldVector unit(const FieldModulus& m, std::size_t dim,
                          std::size_t j);

  std::size_t dim() const { return entries_.size(); }
  const FieldModulus& modulus() const { return modulus_; }

  std::uint64_t operator[](std::size_t i) const { return entries_[i]; }
  FieldElement at(std::size_t i) const {
    return FieldElement(entries_.at(i), modulus_);
  }
  void set(std::size_t i, std::uint64_t v) { entries_.at(i) = modulus_.reduce(v); }

  std::span<const std::uint64_t> values() const { return entries_; }
  // Mutable view for kernels; callers keep every entry below p.
  std::span<std::uint64_t> raw() { return entries_; }

  bool is_zero() const;

  // this += scale * other
  FieldVector& axpy(std::uint64_t scale, const FieldVector& other);
  FieldVector& scale(std::uint64_t s);

  friend bool operator==(const FieldVector& a, const FieldVector& b) {
    return a.modulus_ == b.modulus_ && a.entries_ == b.entries_;
  }

 private:
  FieldModulus modulus_;
  std::vector<std::uint64_t> entries_;
};

FieldVector operator+(const FieldVector& a, const FieldVector& b);
FieldVector operator-(const FieldVector& a, const FieldVector& b);
FieldVector operator*(std::uint64_t s, const FieldVector& v);
std::ostream& operator<<(std::ostream& os, const FieldVector& v);

// Dense row-major matrix over F_P.
class FieldMatrix {
 public:
  FieldMatrix() = default;
  FieldMatrix(const FieldModulus& m, std::size_t rows, std::size_t cols)
      : modulus_(m), rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  // Row-major list of rows; all rows must share one length.
  FieldMatrix(const FieldModulus& m,
              const std::vector<std::vector<std::uint64_t>>& rows);

  static FieldMatrix identity(const FieldModulus& m, std::size_t n);
  static FieldMatrix from_rows(std::span<const FieldVector> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const FieldModulus& modulus() const { return modulus_; }

  std::uint64_t operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  void set(std::size_t r, std::size_t c, std::uint64_t v) {
    data_.at(r * cols_ + c) = modulus_.reduce(v);
  }

  std::span<const std::uint64_t> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<std::uint64_t> row_mut(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  FieldVector row_vector(std::size_t r) const;
  void set_row(std::size_t r, const FieldVector& v);

  FieldMatrix transpose() const;
  bool is_zero() const;

  friend bool operator==(const FieldMatrix& a, const FieldMatrix& b) {
    return a.modulus_ == b.modulus_ && a.rows_ == b.rows_ &&
           a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  FieldModulus modulus_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> data_;
};

// x * W for a row vector x (x.dim == W.rows).
FieldVector mul(const FieldVector& x, const FieldMatrix& w);
FieldMatrix mul(const FieldMatrix& a, const FieldMatrix& b);
FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b);
FieldVector operator*(const FieldVector& x, const FieldMatrix& w);

FieldVector random_vector(std::size_t dim, const FieldModulus& m,
                          SeededRng& rng);
FieldMatrix random_matrix(std::size_t rows, std::size_t cols,
                          const FieldModulus& m, SeededRng& rng);

struct RrefResult {
  FieldMatrix reduced;
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
};

// Canonical reduced row-echelon form. Pivot search is left-to-right over
// columns, top-to-bottom over rows; exact arithmetic needs no pivoting
// heuristic.
RrefResult rref(const FieldMatrix& m);
std::size_t rank(const FieldMatrix& m);

// Row space of a set of vectors in F_P^d, held in canonical RREF: every
// pivot is 1, pivot columns strictly increase, and each pivot column is zero
// in every other row. Two generating sets of the same subspace give
// identical rows.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  SubspaceBasis(const FieldModulus& m, std::size_t ambient_dim)
      : modulus_(m), ambient_dim_(ambient_dim) {}

  static SubspaceBasis span_of(const FieldModulus& m, std::size_t ambient_dim,
                               std::span<const FieldVector> vectors);
  static SubspaceBasis row_space(const FieldMatrix& m);
  static SubspaceBasis full(const FieldModulus& m, std::size_t ambient_dim);

  std::size_t rank() const { return rows_.size(); }
  std::size_t ambient_dim() const { return ambient_dim_; }
  const FieldModulus& modulus() const { return modulus_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  const FieldVector& row(std::size_t i) const { return rows_[i]; }
  const std::vector<FieldVector>& rows() const { return rows_; }
  FieldMatrix basis_rows() const;

  // Adds v to the span in O(rank * d). Returns true iff the rank grew.
  bool insert(const FieldVector& v);

  // Canonical coset representative of v + span: v with every pivot column
  // cleared. Zero exactly on members; linear modulo the span.
  FieldVector residual(const FieldVector& v) const;
  bool contains(const FieldVector& v) const;

  friend bool operator==(const SubspaceBasis& a, const SubspaceBasis& b) {
    return a.modulus_ == b.modulus_ && a.ambient_dim_ == b.ambient_dim_ &&
           a.rows_ == b.rows_;
  }

 private:
  void check_dim(const FieldVector& v) const;

  FieldModulus modulus_;
  std::size_t ambient_dim_ = 0;
  std::vector<FieldVector> rows_;
  std::vector<std::size_t> pivots_;
};

std::pair<SubspaceBasis, bool> basis_insert(SubspaceBasis b,
                                            const FieldVector& v);
FieldVector residual(const SubspaceBasis& b, const FieldVector& v);
bool is_member(const SubspaceBasis& b, const FieldVector& v);

// {x : m * x = 0} as a subspace of F_P^{cols}.
SubspaceBasis nullspace(const FieldMatrix& m);

// span(a) ∩ span(b): stacks the generators as U and W, solves
// [U | -W] [gamma; delta] = 0 and maps each solution back through U gamma.
SubspaceBasis subspace_intersection(const SubspaceBasis& a,
                                    const SubspaceBasis& b);
SubspaceBasis subspace_sum(const SubspaceBasis& a, const SubspaceBasis& b);
// Mutual inclusion.
bool same_subspace(const SubspaceBasis& a, const SubspaceBasis& b);
bool is_subspace_of(const SubspaceBasis& inner, const SubspaceBasis& outer);

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct RankDeficiency {
  double value = 0.0;
  // Present when numerator and denominator fit in 64 bits.
  std::optional<Fraction> exact;
};

// Probability that a uniform k x k matrix over F_p is singular:
// 1 - prod_{i=1..k} (1 - p^{-i}).
RankDeficiency rank_deficiency_probability(unsigned k, std::uint64_t p);

}  // namespace bb
