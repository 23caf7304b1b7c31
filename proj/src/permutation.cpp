#include "basisbreak/permutation.hpp"

#include <numeric>
#include <string>

namespace bb {

bool is_bijection(std::span<const std::size_t> image) {
  std::vector<bool> seen(image.size(), false);
  for (auto v : image) {
    if (v >= image.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation::Permutation(std::vector<std::size_t> image)
    : image_(std::move(image)) {
  if (!is_bijection(image_)) throw ConfigError("permutation is not a bijection");
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> img(n);
  std::iota(img.begin(), img.end(), std::size_t{0});
  return Permutation(std::move(img));
}

Permutation Permutation::random(std::size_t n, SeededRng& rng) {
  std::vector<std::size_t> img(n);
  std::iota(img.begin(), img.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(img[i - 1], img[j]);
  }
  return Permutation(std::move(img));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(image_.size());
  for (std::size_t j = 0; j < image_.size(); ++j) inv[image_[j]] = j;
  return Permutation(std::move(inv));
}

FieldMatrix Permutation::as_matrix(const FieldModulus& m) const {
  FieldMatrix out(m, size(), size());
  for (std::size_t j = 0; j < size(); ++j) out.set(j, image_[j], 1);
  return out;
}

FieldVector apply(const FieldVector& x, const Permutation& p) {
  if (x.dim() != p.size()) {
    throw DimensionMismatch("permutation size " + std::to_string(p.size()) +
                            " vs vector dim " + std::to_string(x.dim()));
  }
  FieldVector out(x.modulus(), x.dim());
  auto o = out.raw();
  for (std::size_t j = 0; j < x.dim(); ++j) o[p[j]] = x[j];
  return out;
}

FieldMatrix lock_rows(const Permutation& p, const FieldMatrix& w) {
  if (w.rows() != p.size()) throw DimensionMismatch("lock_rows");
  FieldMatrix out(w.modulus(), w.rows(), w.cols());
  for (std::size_t j = 0; j < w.rows(); ++j) out.set_row(p[j], w.row_vector(j));
  return out;
}

FieldMatrix unlock_rows(const Permutation& p, const FieldMatrix& w) {
  if (w.rows() != p.size()) throw DimensionMismatch("unlock_rows");
  FieldMatrix out(w.modulus(), w.rows(), w.cols());
  for (std::size_t j = 0; j < w.rows(); ++j) out.set_row(j, w.row_vector(p[j]));
  return out;
}

FieldMatrix permute_cols(const FieldMatrix& w, const Permutation& p) {
  if (w.cols() != p.size()) throw DimensionMismatch("permute_cols");
  FieldMatrix out(w.modulus(), w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto src = w.row(r);
    auto dst = out.row_mut(r);
    for (std::size_t j = 0; j < w.cols(); ++j) dst[p[j]] = src[j];
  }
  return out;
}

}  // namespace bb
