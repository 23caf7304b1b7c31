#include "basisbreak/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace bb {
namespace {

void require_dims(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) +
                            " vs " + std::to_string(b));
  }
}

// dst -= s * src over the same length.
void sub_scaled(const FieldModulus& m, std::span<std::uint64_t> dst,
                std::uint64_t s, std::span<const std::uint64_t> src) {
  if (s == 0) return;
  const std::uint64_t ns = m.neg(s);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (src[i] != 0) dst[i] = m.add(dst[i], m.mul(ns, src[i]));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldVector

FieldVector::FieldVector(const FieldModulus& m,
                         std::vector<std::uint64_t> entries)
    : modulus_(m), entries_(std::move(entries)) {
  for (auto& e : entries_) e = modulus_.reduce(e);
}

FieldVector FieldVector::unit(const FieldModulus& m, std::size_t dim,
                              std::size_t j) {
  FieldVector v(m, dim);
  v.entries_.at(j) = 1;
  return v;
}

bool FieldVector::is_zero() const {
  for (auto e : entries_) {
    if (e != 0) return false;
  }
  return true;
}

FieldVector& FieldVector::axpy(std::uint64_t scale, const FieldVector& other) {
  require_same(modulus_, other.modulus_);
  require_dims(dim(), other.dim(), "axpy");
  scale = modulus_.reduce(scale);
  if (scale == 0) return *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i] = modulus_.add(entries_[i], modulus_.mul(scale, other.entries_[i]));
  }
  return *this;
}

FieldVector& FieldVector::scale(std::uint64_t s) {
  s = modulus_.reduce(s);
  for (auto& e : entries_) e = modulus_.mul(e, s);
  return *this;
}

FieldVector operator+(const FieldVector& a, const FieldVector& b) {
  FieldVector r = a;
  r.axpy(1, b);
  return r;
}

FieldVector operator-(const FieldVector& a, const FieldVector& b) {
  FieldVector r = a;
  r.axpy(a.modulus().neg(1), b);
  return r;
}

FieldVector operator*(std::uint64_t s, const FieldVector& v) {
  FieldVector r = v;
  r.scale(s);
  return r;
}

std::ostream& operator<<(std::ostream& os, const FieldVector& v) {
  os << '[';
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os << ']';
}

// ---------------------------------------------------------------------------
// FieldMatrix

FieldMatrix::FieldMatrix(const FieldModulus& m,
                         const std::vector<std::vector<std::uint64_t>>& rows)
    : modulus_(m), rows_(rows.size()), cols_(rows.empty() ? 0 : rows[0].size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_dims(r.size(), cols_, "FieldMatrix row length");
    for (auto e : r) data_.push_back(modulus_.reduce(e));
  }
}

FieldMatrix FieldMatrix::identity(const FieldModulus& m, std::size_t n) {
  FieldMatrix id(m, n, n);
  for (std::size_t i = 0; i < n; ++i) id.data_[i * n + i] = 1;
  return id;
}

FieldMatrix FieldMatrix::from_rows(std::span<const FieldVector> rows) {
  if (rows.empty()) return FieldMatrix();
  FieldMatrix out(rows[0].modulus(), rows.size(), rows[0].dim());
  for (std::size_t r = 0; r < rows.size(); ++r) out.set_row(r, rows[r]);
  return out;
}

FieldVector FieldMatrix::row_vector(std::size_t r) const {
  auto s = row(r);
  return FieldVector(modulus_, std::vector<std::uint64_t>(s.begin(), s.end()));
}

void FieldMatrix::set_row(std::size_t r, const FieldVector& v) {
  require_same(modulus_, v.modulus());
  require_dims(v.dim(), cols_, "set_row");
  std::copy(v.values().begin(), v.values().end(), row_mut(r).begin());
}

FieldMatrix FieldMatrix::transpose() const {
  FieldMatrix t(modulus_, cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t.data_[c * rows_ + r] = (*this)(r, c);
  }
  return t;
}

bool FieldMatrix::is_zero() const {
  for (auto e : data_) {
    if (e != 0) return false;
  }
  return true;
}

FieldVector mul(const FieldVector& x, const FieldMatrix& w) {
  require_same(x.modulus(), w.modulus());
  require_dims(x.dim(), w.rows(), "vector-matrix product");
  const FieldModulus& m = w.modulus();
  FieldVector out(m, w.cols());
  auto acc = out.raw();
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const std::uint64_t xi = x[i];
    if (xi == 0) continue;
    auto wr = w.row(i);
    for (std::size_t j = 0; j < w.cols(); ++j) {
      acc[j] = m.add(acc[j], m.mul(xi, wr[j]));
    }
  }
  return out;
}

FieldMatrix mul(const FieldMatrix& a, const FieldMatrix& b) {
  require_same(a.modulus(), b.modulus());
  require_dims(a.cols(), b.rows(), "matrix product");
  FieldMatrix out(a.modulus(), a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    out.set_row(r, mul(a.row_vector(r), b));
  }
  return out;
}

FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
  return mul(a, b);
}

FieldVector operator*(const FieldVector& x, const FieldMatrix& w) {
  return mul(x, w);
}

FieldVector random_vector(std::size_t dim, const FieldModulus& m,
                          SeededRng& rng) {
  FieldVector v(m, dim);
  for (auto& e : v.raw()) e = m.sample(rng);
  return v;
}

FieldMatrix random_matrix(std::size_t rows, std::size_t cols,
                          const FieldModulus& m, SeededRng& rng) {
  FieldMatrix out(m, rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& e : out.row_mut(r)) e = m.sample(rng);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Row reduction

RrefResult rref(const FieldMatrix& input) {
  RrefResult res{input, {}, 0};
  FieldMatrix& a = res.reduced;
  const FieldModulus& m = a.modulus();
  std::size_t lead = 0;
  for (std::size_t c = 0; c < a.cols() && lead < a.rows(); ++c) {
    std::size_t r = lead;
    while (r < a.rows() && a(r, c) == 0) ++r;
    if (r == a.rows()) continue;
    if (r != lead) {
      auto x = a.row_mut(r);
      auto y = a.row_mut(lead);
      std::swap_ranges(x.begin(), x.end(), y.begin());
    }
    auto pivot_row = a.row_mut(lead);
    const std::uint64_t s = m.inv(pivot_row[c]);
    for (auto& e : pivot_row) e = m.mul(e, s);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == lead) continue;
      const std::uint64_t f = a(i, c);
      if (f != 0) sub_scaled(m, a.row_mut(i), f, a.row(lead));
    }
    res.pivots.push_back(c);
    ++lead;
  }
  res.rank = lead;
  return res;
}

std::size_t rank(const FieldMatrix& m) { return rref(m).rank; }

// ---------------------------------------------------------------------------
// SubspaceBasis

SubspaceBasis SubspaceBasis::span_of(const FieldModulus& m,
                                     std::size_t ambient_dim,
                                     std::span<const FieldVector> vectors) {
  SubspaceBasis b(m, ambient_dim);
  for (const auto& v : vectors) b.insert(v);
  return b;
}

SubspaceBasis SubspaceBasis::row_space(const FieldMatrix& mat) {
  SubspaceBasis b(mat.modulus(), mat.cols());
  for (std::size_t r = 0; r < mat.rows(); ++r) b.insert(mat.row_vector(r));
  return b;
}

SubspaceBasis SubspaceBasis::full(const FieldModulus& m,
                                  std::size_t ambient_dim) {
  SubspaceBasis b(m, ambient_dim);
  for (std::size_t j = 0; j < ambient_dim; ++j) {
    b.rows_.push_back(FieldVector::unit(m, ambient_dim, j));
    b.pivots_.push_back(j);
  }
  return b;
}

FieldMatrix SubspaceBasis::basis_rows() const {
  FieldMatrix out(modulus_, rows_.size(), ambient_dim_);
  for (std::size_t r = 0; r < rows_.size(); ++r) out.set_row(r, rows_[r]);
  return out;
}

void SubspaceBasis::check_dim(const FieldVector& v) const {
  require_same(modulus_, v.modulus());
  require_dims(v.dim(), ambient_dim_, "subspace ambient dimension");
}

FieldVector SubspaceBasis::residual(const FieldVector& v) const {
  check_dim(v);
  FieldVector r = v;
  auto out = r.raw();
  // Rows are zero on each other's pivots, so the order of elimination does
  // not matter and a single pass suffices.
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const std::uint64_t f = out[pivots_[i]];
    if (f != 0) sub_scaled(modulus_, out, f, rows_[i].values());
  }
  return r;
}

bool SubspaceBasis::contains(const FieldVector& v) const {
  return residual(v).is_zero();
}

bool SubspaceBasis::insert(const FieldVector& v) {
  FieldVector r = residual(v);
  auto vals = r.raw();
  std::size_t c = 0;
  while (c < vals.size() && vals[c] == 0) ++c;
  if (c == vals.size()) return false;
  r.scale(modulus_.inv(vals[c]));
  for (auto& row : rows_) {
    const std::uint64_t f = row[c];
    if (f != 0) sub_scaled(modulus_, row.raw(), f, r.values());
  }
  auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), c);
  const auto idx = static_cast<std::size_t>(pos - pivots_.begin());
  pivots_.insert(pos, c);
  rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(idx), std::move(r));
  return true;
}

std::pair<SubspaceBasis, bool> basis_insert(SubspaceBasis b,
                                            const FieldVector& v) {
  const bool grew = b.insert(v);
  return {std::move(b), grew};
}

FieldVector residual(const SubspaceBasis& b, const FieldVector& v) {
  return b.residual(v);
}

bool is_member(const SubspaceBasis& b, const FieldVector& v) {
  return b.contains(v);
}

SubspaceBasis nullspace(const FieldMatrix& mat) {
  const RrefResult red = rref(mat);
  const FieldModulus& m = mat.modulus();
  const std::size_t n = mat.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto c : red.pivots) is_pivot[c] = true;
  SubspaceBasis out(m, n);
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    FieldVector x(m, n);
    x.set(f, 1);
    for (std::size_t i = 0; i < red.rank; ++i) {
      x.set(red.pivots[i], m.neg(red.reduced(i, f)));
    }
    out.insert(x);
  }
  return out;
}

SubspaceBasis subspace_intersection(const SubspaceBasis& a,
                                    const SubspaceBasis& b) {
  require_same(a.modulus(), b.modulus());
  require_dims(a.ambient_dim(), b.ambient_dim(), "subspace_intersection");
  const FieldModulus& m = a.modulus();
  const std::size_t d = a.ambient_dim();
  SubspaceBasis out(m, d);
  const std::size_t ra = a.rank();
  const std::size_t rb = b.rank();
  if (ra == 0 || rb == 0) return out;

  // Columns are the generators: [u_1 .. u_ra | -w_1 .. -w_rb].
  FieldMatrix stacked(m, d, ra + rb);
  for (std::size_t i = 0; i < ra; ++i) {
    const auto& u = a.row(i);
    for (std::size_t r = 0; r < d; ++r) stacked.set(r, i, u[r]);
  }
  for (std::size_t j = 0; j < rb; ++j) {
    const auto& w = b.row(j);
    for (std::size_t r = 0; r < d; ++r) stacked.set(r, ra + j, m.neg(w[r]));
  }
  const SubspaceBasis solutions = nullspace(stacked);
  for (const auto& sol : solutions.rows()) {
    FieldVector v(m, d);
    for (std::size_t i = 0; i < ra; ++i) v.axpy(sol[i], a.row(i));
    out.insert(v);
  }
  return out;
}

SubspaceBasis subspace_sum(const SubspaceBasis& a, const SubspaceBasis& b) {
  require_same(a.modulus(), b.modulus());
  require_dims(a.ambient_dim(), b.ambient_dim(), "subspace_sum");
  SubspaceBasis out = a;
  for (const auto& r : b.rows()) out.insert(r);
  return out;
}

bool is_subspace_of(const SubspaceBasis& inner, const SubspaceBasis& outer) {
  for (const auto& r : inner.rows()) {
    if (!outer.contains(r)) return false;
  }
  return true;
}

bool same_subspace(const SubspaceBasis& a, const SubspaceBasis& b) {
  return a.rank() == b.rank() && is_subspace_of(a, b) && is_subspace_of(b, a);
}

// ---------------------------------------------------------------------------
// Rank deficiency of a uniform square matrix

RankDeficiency rank_deficiency_probability(unsigned k, std::uint64_t p) {
  if (k < 1) throw ConfigError("rank_deficiency_probability: k must be >= 1");
  if (!is_prime_u64(p)) {
    throw ConfigError("rank_deficiency_probability: p must be prime");
  }
  RankDeficiency out;
  const double pd = static_cast<double>(p);
  double log_full = 0.0;
  for (unsigned i = 1; i <= k; ++i) {
    log_full += std::log1p(-std::pow(pd, -static_cast<double>(i)));
  }
  out.value = -std::expm1(log_full);

  // Exact: 1 - prod (p^i - 1) / p^{k(k+1)/2}, while it fits in 64 bits.
  using u128 = unsigned __int128;
  constexpr u128 kLimit = ~std::uint64_t{0};
  u128 den = 1;
  u128 full = 1;
  u128 pi = 1;
  for (unsigned i = 1; i <= k; ++i) {
    pi *= p;
    if (pi > kLimit) return out;
    den *= pi;
    full *= (pi - 1);
    if (den > kLimit) return out;
  }
  std::uint64_t num = static_cast<std::uint64_t>(den - full);
  std::uint64_t d64 = static_cast<std::uint64_t>(den);
  const std::uint64_t g = std::gcd(num, d64);
  out.exact = Fraction{num / g, d64 / g};
  return out;
}

}  // namespace bb
