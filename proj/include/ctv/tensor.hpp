// Dense containers for color images and their gradient fields.
//
// ImageTensor: N pixels x C channels, pixel index n = row*width + col.
// GradTensor:  N pixels x M derivatives x C channels, stored so that the
// per-pixel M x C block is contiguous (column-major within the block).
// All optimization code works on these two shapes only.

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ctv {

using Index = Eigen::Index;

// Precondition failures (bad shapes, bad indices, invalid arguments).
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw ContractViolation(what);
}

template <typename Scalar>
struct ImageTensorT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Index width = 0;
  Index height = 0;
  Matrix m;  // N x C, one column per channel

  ImageTensorT() = default;
  ImageTensorT(Index w, Index h, Index channels) : width(w), height(h) {
    require(w >= 1 && h >= 1 && channels >= 1, "image dimensions must be positive");
    m.setZero(w * h, channels);
  }

  Index pixels() const { return width * height; }
  Index channels() const { return m.cols(); }

  Scalar& operator()(Index n, Index k) { return m(n, k); }
  Scalar operator()(Index n, Index k) const { return m(n, k); }

  Scalar& at(Index row, Index col, Index k) { return m(row * width + col, k); }
  Scalar at(Index row, Index col, Index k) const { return m(row * width + col, k); }

  bool same_shape(const ImageTensorT& o) const {
    return width == o.width && height == o.height && channels() == o.channels();
  }

  // Channel k as a width x height matrix view indexed (x, y); shares storage.
  auto channel_grid(Index k) {
    return Eigen::Map<Matrix>(m.col(k).data(), width, height);
  }
  auto channel_grid(Index k) const {
    return Eigen::Map<const Matrix>(m.col(k).data(), width, height);
  }
};

template <typename Scalar>
struct GradTensorT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using BlockMap = Eigen::Map<Matrix>;
  using ConstBlockMap = Eigen::Map<const Matrix>;

  Index M = 0;  // derivatives per pixel
  Index C = 0;  // channels
  Matrix m;     // (M*C) x N; column i holds the pixel-i block, entry (j,k) at k*M+j

  GradTensorT() = default;
  GradTensorT(Index pixels, Index derivs, Index channels) : M(derivs), C(channels) {
    require(pixels >= 1 && derivs >= 1 && channels >= 1, "tensor dimensions must be positive");
    m.setZero(derivs * channels, pixels);
  }

  Index pixels() const { return m.cols(); }
  Index size() const { return m.size(); }

  Scalar& operator()(Index i, Index j, Index k) { return m(k * M + j, i); }
  Scalar operator()(Index i, Index j, Index k) const { return m(k * M + j, i); }

  bool same_shape(const GradTensorT& o) const {
    return M == o.M && C == o.C && pixels() == o.pixels();
  }

  // The M x C block of pixel i; writable view over the flat storage.
  BlockMap pixel(Index i) {
    require(i >= 0 && i < pixels(), "pixel index out of range");
    return BlockMap(m.col(i).data(), M, C);
  }
  ConstBlockMap pixel(Index i) const {
    require(i >= 0 && i < pixels(), "pixel index out of range");
    return ConstBlockMap(m.col(i).data(), M, C);
  }

  // The channel vector A[i,j,:]; stride M between entries.
  auto color(Index i, Index j) {
    require(i >= 0 && i < pixels() && j >= 0 && j < M, "index out of range");
    return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, 0, Eigen::InnerStride<>>(
        m.col(i).data() + j, C, Eigen::InnerStride<>(M));
  }
  auto color(Index i, Index j) const {
    require(i >= 0 && i < pixels() && j >= 0 && j < M, "index out of range");
    return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, 0, Eigen::InnerStride<>>(
        m.col(i).data() + j, C, Eigen::InnerStride<>(M));
  }

  // The M x N slice A[:,:,k] (column i = derivatives of pixel i in channel k).
  auto channel(Index k) {
    require(k >= 0 && k < C, "channel index out of range");
    return Eigen::Map<Matrix, 0, Eigen::OuterStride<>>(m.data() + k * M, M, pixels(),
                                                       Eigen::OuterStride<>(M * C));
  }
  auto channel(Index k) const {
    require(k >= 0 && k < C, "channel index out of range");
    return Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>(m.data() + k * M, M, pixels(),
                                                             Eigen::OuterStride<>(M * C));
  }
};

using ImageTensor = ImageTensorT<double>;
using GradTensor = GradTensorT<double>;

template <typename Scalar>
typename GradTensorT<Scalar>::BlockMap slice_pixel(GradTensorT<Scalar>& A, Index i) {
  return A.pixel(i);
}

template <typename Scalar>
typename GradTensorT<Scalar>::ConstBlockMap slice_pixel(const GradTensorT<Scalar>& A, Index i) {
  return A.pixel(i);
}

template <typename Scalar>
Scalar inner_product(const GradTensorT<Scalar>& A, const GradTensorT<Scalar>& B) {
  require(A.same_shape(B), "inner_product: shape mismatch");
  return A.m.cwiseProduct(B.m).sum();
}

template <typename Scalar>
Scalar inner_product(const ImageTensorT<Scalar>& a, const ImageTensorT<Scalar>& b) {
  require(a.same_shape(b), "inner_product: shape mismatch");
  return a.m.cwiseProduct(b.m).sum();
}

}  // namespace ctv
