// Collaborative norms on gradient tensors.
//
// A NormSpec names either a nested l^{p,q,r} reduction (exponents applied
// innermost-first along a caller-chosen permutation of {col, der, pix}) or a
// Schatten norm (l^p of the singular values of each per-pixel block, l^q
// across pixels). Exponents are restricted to {1, 2, inf}. Alongside
// evaluation, this header provides the dual spec, an extremal dual witness,
// and the subdifferential membership test built from the two.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ctv/tensor.hpp"

namespace ctv {

enum class Exp { one, two, inf };
enum class Dim { col, der, pix };

struct UnsupportedNorm : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Exp conjugate(Exp e) {
  switch (e) {
    case Exp::one: return Exp::inf;
    case Exp::two: return Exp::two;
    case Exp::inf: return Exp::one;
  }
  throw ContractViolation("bad exponent");
}

inline const char* to_string(Exp e) {
  switch (e) {
    case Exp::one: return "1";
    case Exp::two: return "2";
    case Exp::inf: return "inf";
  }
  throw ContractViolation("bad exponent");
}

inline const char* to_string(Dim d) {
  switch (d) {
    case Dim::col: return "col";
    case Dim::der: return "der";
    case Dim::pix: return "pix";
  }
  throw ContractViolation("bad dimension label");
}

struct NormSpec {
  enum class Family { lpqr, schatten };

  Family family = Family::lpqr;
  // Innermost first. For schatten: exps[0] acts on singular values, exps[1]
  // on pixels, exps[2] is unused and fixed to one; order is fixed.
  std::array<Exp, 3> exps = {Exp::one, Exp::one, Exp::one};
  std::array<Dim, 3> order = {Dim::col, Dim::der, Dim::pix};

  static NormSpec lpqr(Exp p, Exp q, Exp r, Dim d0, Dim d1, Dim d2) {
    require(d0 != d1 && d0 != d2 && d1 != d2, "ordering must be a permutation of col,der,pix");
    NormSpec s;
    s.family = Family::lpqr;
    s.exps = {p, q, r};
    s.order = {d0, d1, d2};
    return s;
  }

  static NormSpec lpqr(Exp p, Exp q, Exp r) { return lpqr(p, q, r, Dim::col, Dim::der, Dim::pix); }

  static NormSpec schatten(Exp p, Exp q) {
    NormSpec s;
    s.family = Family::schatten;
    s.exps = {p, q, Exp::one};
    return s;
  }

  bool operator==(const NormSpec& o) const {
    if (family != o.family) return false;
    if (family == Family::schatten) return exps[0] == o.exps[0] && exps[1] == o.exps[1];
    return exps == o.exps && order == o.order;
  }
  bool operator!=(const NormSpec& o) const { return !(*this == o); }
};

inline NormSpec dual_spec(const NormSpec& s) {
  NormSpec d = s;
  d.exps = {conjugate(s.exps[0]), conjugate(s.exps[1]), conjugate(s.exps[2])};
  return d;
}

// "linf,1,1:col,der,pix" for nested specs (ordering optional on input,
// defaulting to col,der,pix), "s1,l1" for Schatten specs.
inline std::string to_string(const NormSpec& s) {
  if (s.family == NormSpec::Family::schatten)
    return std::string("s") + to_string(s.exps[0]) + ",l" + to_string(s.exps[1]);
  std::string out = std::string("l") + to_string(s.exps[0]) + "," + to_string(s.exps[1]) + "," +
                    to_string(s.exps[2]) + ":";
  for (int i = 0; i < 3; ++i) out += std::string(i ? "," : "") + to_string(s.order[i]);
  return out;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

inline Exp parse_exp(const std::string& t) {
  if (t == "1") return Exp::one;
  if (t == "2") return Exp::two;
  if (t == "inf") return Exp::inf;
  throw ContractViolation("unknown norm exponent '" + t + "'");
}

inline Dim parse_dim(const std::string& t) {
  if (t == "col") return Dim::col;
  if (t == "der") return Dim::der;
  if (t == "pix") return Dim::pix;
  throw ContractViolation("unknown dimension label '" + t + "'");
}

}  // namespace detail

inline NormSpec parse_norm(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += std::tolower(static_cast<unsigned char>(c));
  require(!s.empty(), "empty norm string");
  if (s[0] == 's') {
    auto parts = detail::split(s.substr(1), ',');
    require(parts.size() == 2 && parts[1].size() > 1 && parts[1][0] == 'l',
            "schatten norm must look like 's1,l1'");
    return NormSpec::schatten(detail::parse_exp(parts[0]), detail::parse_exp(parts[1].substr(1)));
  }
  require(s[0] == 'l', "norm string must start with 'l' or 's'");
  auto colon = s.find(':');
  auto exps = detail::split(s.substr(1, colon == std::string::npos ? colon : colon - 1), ',');
  require(exps.size() == 3, "nested norm needs three exponents");
  Exp p = detail::parse_exp(exps[0]), q = detail::parse_exp(exps[1]), r = detail::parse_exp(exps[2]);
  if (colon == std::string::npos) return NormSpec::lpqr(p, q, r);
  auto dims = detail::split(s.substr(colon + 1), ',');
  require(dims.size() == 3, "ordering needs three labels");
  return NormSpec::lpqr(p, q, r, detail::parse_dim(dims[0]), detail::parse_dim(dims[1]),
                        detail::parse_dim(dims[2]));
}

namespace detail {

// Accumulates an l^p reduction of nonnegative terms.
template <typename Scalar>
struct Reducer {
  Exp e;
  Scalar acc = 0;
  void add(Scalar v) {
    switch (e) {
      case Exp::one: acc += v; break;
      case Exp::two: acc += v * v; break;
      case Exp::inf: acc = std::max(acc, v); break;
    }
  }
  Scalar value() const { return e == Exp::two ? std::sqrt(acc) : acc; }
};

template <typename Scalar>
Index dim_size(const GradTensorT<Scalar>& A, Dim d) {
  switch (d) {
    case Dim::col: return A.C;
    case Dim::der: return A.M;
    case Dim::pix: return A.pixels();
  }
  throw ContractViolation("bad dimension label");
}

inline void place(Dim d, Index v, Index& i, Index& j, Index& k) {
  switch (d) {
    case Dim::pix: i = v; break;
    case Dim::der: j = v; break;
    case Dim::col: k = v; break;
  }
}

// Thin SVD factors; columns for vanishing singular values are zeroed so that
// spectral rebuilds follow the pseudo-inverse convention.
template <typename Scalar>
struct ThinSvd {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Matrix U;      // rows(B) x r
  Vector sigma;  // r = min(rows, cols), descending
  Matrix V;      // cols(B) x r
};

// Symmetric 2x2 eigendecomposition, eigenvalues descending, W orthonormal.
template <typename Scalar>
void sym2x2_eig(Scalar a, Scalar b, Scalar c, Eigen::Matrix<Scalar, 2, 2>& W,
                Eigen::Matrix<Scalar, 2, 1>& lambda) {
  Scalar half_tr = (a + c) / 2;
  Scalar disc = std::sqrt(std::max((a - c) * (a - c) / 4 + b * b, Scalar(0)));
  lambda << half_tr + disc, half_tr - disc;
  Eigen::Matrix<Scalar, 2, 1> v0(b, lambda(0) - a), v1(lambda(0) - c, b);
  Eigen::Matrix<Scalar, 2, 1> w = v0.norm() >= v1.norm() ? v0 : v1;
  if (w.norm() == 0) w << 1, 0;  // multiple eigenvalue, any basis works
  w.normalize();
  W.col(0) = w;
  W.col(1) << -w(1), w(0);
}

template <typename Scalar, typename Derived>
ThinSvd<Scalar> thin_svd(const Eigen::MatrixBase<Derived>& B_) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix B = B_;
  const Index R = B.rows(), S = B.cols(), r = std::min(R, S);
  ThinSvd<Scalar> out;
  out.U.setZero(R, r);
  out.V.setZero(S, r);
  out.sigma.setZero(r);
  if (r > 2) {  // cold path, shapes beyond rank-2 blocks
    Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.V = svd.matrixV();
    out.sigma = svd.singularValues();
    return out;
  }
  const bool rows_small = R <= S;
  Matrix G = rows_small ? Matrix(B * B.transpose()) : Matrix(B.transpose() * B);
  Matrix W(r, r);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda(r);
  if (r == 1) {
    W.setOnes(1, 1);
    lambda(0) = G(0, 0);
  } else {
    Eigen::Matrix<Scalar, 2, 2> W2;
    Eigen::Matrix<Scalar, 2, 1> l2;
    sym2x2_eig(G(0, 0), G(0, 1), G(1, 1), W2, l2);
    W = W2;
    lambda = l2;
  }
  for (Index m = 0; m < r; ++m) out.sigma(m) = std::sqrt(std::max(lambda(m), Scalar(0)));
  const Scalar cutoff = out.sigma(0) * Scalar(1e-12);
  for (Index m = 0; m < r; ++m) {
    if (out.sigma(m) <= cutoff) {
      out.sigma(m) = std::max(out.sigma(m), Scalar(0));
      continue;  // leave the U/V columns zero
    }
    if (rows_small) {
      out.U.col(m) = W.col(m);
      out.V.col(m) = B.transpose() * W.col(m) / out.sigma(m);
    } else {
      out.V.col(m) = W.col(m);
      out.U.col(m) = B * W.col(m) / out.sigma(m);
    }
  }
  return out;
}

// l^p witness of a signed vector: w with dual norm <= 1 and <w, x> = ||x||_p.
// Ties in the inf case go to the lowest index; zero vectors give zero.
template <typename Scalar, typename Derived, typename OutDerived>
void lp_witness_signed(const Eigen::MatrixBase<Derived>& x, Exp e,
                       Eigen::MatrixBase<OutDerived> const& w_) {
  auto& w = const_cast<Eigen::MatrixBase<OutDerived>&>(w_);
  switch (e) {
    case Exp::one:
      w = x.array().sign();
      break;
    case Exp::two: {
      Scalar n = x.norm();
      if (n > 0)
        w = x / n;
      else
        w.setZero();
      break;
    }
    case Exp::inf: {
      w.setZero();
      Index best = 0;
      Scalar best_v = -1;
      for (Index t = 0; t < x.size(); ++t)
        if (std::abs(x(t)) > best_v) {
          best_v = std::abs(x(t));
          best = t;
        }
      if (best_v > 0) w(best) = x(best) > 0 ? Scalar(1) : Scalar(-1);
      break;
    }
  }
}

// Same for an entrywise-nonnegative vector (norms of inner groups); the l^1
// witness is all ones so zero groups stay harmless under multiplication.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lp_witness_nonneg(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, Exp e) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(x.size());
  switch (e) {
    case Exp::one:
      w.setOnes();
      break;
    case Exp::two: {
      Scalar n = x.norm();
      w = n > 0 ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(x / n) : w.setZero().eval();
      break;
    }
    case Exp::inf: {
      w.setZero();
      Index best = 0;
      Scalar best_v = -1;
      for (Index t = 0; t < x.size(); ++t)
        if (x(t) > best_v) {
          best_v = x(t);
          best = t;
        }
      if (best_v > 0) w(best) = 1;
      break;
    }
  }
  return w;
}

}  // namespace detail

template <typename Scalar>
Scalar eval_norm(const GradTensorT<Scalar>& A, const NormSpec& spec) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (spec.family == NormSpec::Family::schatten) {
    detail::Reducer<Scalar> outer{spec.exps[1]};
    for (Index i = 0; i < A.pixels(); ++i) {
      Vector sigma = detail::thin_svd<Scalar>(A.pixel(i)).sigma;
      detail::Reducer<Scalar> inner{spec.exps[0]};
      for (Index m = 0; m < sigma.size(); ++m) inner.add(sigma(m));
      outer.add(inner.value());
    }
    return outer.value();
  }
  const Index n0 = detail::dim_size(A, spec.order[0]);
  const Index n1 = detail::dim_size(A, spec.order[1]);
  const Index n2 = detail::dim_size(A, spec.order[2]);
  detail::Reducer<Scalar> outer{spec.exps[2]};
  for (Index c2 = 0; c2 < n2; ++c2) {
    detail::Reducer<Scalar> mid{spec.exps[1]};
    for (Index c1 = 0; c1 < n1; ++c1) {
      detail::Reducer<Scalar> in{spec.exps[0]};
      for (Index c0 = 0; c0 < n0; ++c0) {
        Index i = 0, j = 0, k = 0;
        detail::place(spec.order[0], c0, i, j, k);
        detail::place(spec.order[1], c1, i, j, k);
        detail::place(spec.order[2], c2, i, j, k);
        in.add(std::abs(A(i, j, k)));
      }
      mid.add(in.value());
    }
    outer.add(mid.value());
  }
  return outer.value();
}

// Extremal element of the dual ball: ||B||_dual <= 1 and <A, B> = ||A||.
// Built level by level from the standard l^p witnesses.
template <typename Scalar>
GradTensorT<Scalar> dual_witness(const GradTensorT<Scalar>& A, const NormSpec& spec) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require(A.m.cwiseAbs().maxCoeff() > 0, "dual_witness: zero tensor has no witness");
  GradTensorT<Scalar> B(A.pixels(), A.M, A.C);

  if (spec.family == NormSpec::Family::schatten) {
    Vector per_pixel(A.pixels());
    std::vector<detail::ThinSvd<Scalar>> svds(A.pixels());
    for (Index i = 0; i < A.pixels(); ++i) {
      svds[i] = detail::thin_svd<Scalar>(A.pixel(i));
      detail::Reducer<Scalar> inner{spec.exps[0]};
      for (Index m = 0; m < svds[i].sigma.size(); ++m) inner.add(svds[i].sigma(m));
      per_pixel(i) = inner.value();
    }
    Vector wq = detail::lp_witness_nonneg<Scalar>(per_pixel, spec.exps[1]);
    for (Index i = 0; i < A.pixels(); ++i) {
      Vector ws = detail::lp_witness_nonneg<Scalar>(Vector(svds[i].sigma), spec.exps[0]);
      for (Index m = 0; m < ws.size(); ++m)
        if (svds[i].sigma(m) <= 0) ws(m) = 0;
      Matrix Bi = svds[i].U * ws.asDiagonal() * svds[i].V.transpose();
      B.pixel(i) = wq(i) * Bi;
    }
    return B;
  }

  const Index n0 = detail::dim_size(A, spec.order[0]);
  const Index n1 = detail::dim_size(A, spec.order[1]);
  const Index n2 = detail::dim_size(A, spec.order[2]);
  Matrix inner_norms(n1, n2);
  for (Index c2 = 0; c2 < n2; ++c2)
    for (Index c1 = 0; c1 < n1; ++c1) {
      detail::Reducer<Scalar> in{spec.exps[0]};
      for (Index c0 = 0; c0 < n0; ++c0) {
        Index i = 0, j = 0, k = 0;
        detail::place(spec.order[0], c0, i, j, k);
        detail::place(spec.order[1], c1, i, j, k);
        detail::place(spec.order[2], c2, i, j, k);
        in.add(std::abs(A(i, j, k)));
      }
      inner_norms(c1, c2) = in.value();
    }
  Vector mid_norms(n2);
  for (Index c2 = 0; c2 < n2; ++c2) {
    detail::Reducer<Scalar> mid{spec.exps[1]};
    for (Index c1 = 0; c1 < n1; ++c1) mid.add(inner_norms(c1, c2));
    mid_norms(c2) = mid.value();
  }
  Vector wr = detail::lp_witness_nonneg<Scalar>(mid_norms, spec.exps[2]);
  for (Index c2 = 0; c2 < n2; ++c2) {
    Vector wq = detail::lp_witness_nonneg<Scalar>(Vector(inner_norms.col(c2)), spec.exps[1]);
    for (Index c1 = 0; c1 < n1; ++c1) {
      Vector x(n0), wp(n0);
      for (Index c0 = 0; c0 < n0; ++c0) {
        Index i = 0, j = 0, k = 0;
        detail::place(spec.order[0], c0, i, j, k);
        detail::place(spec.order[1], c1, i, j, k);
        detail::place(spec.order[2], c2, i, j, k);
        x(c0) = A(i, j, k);
      }
      detail::lp_witness_signed<Scalar>(x, spec.exps[0], wp);
      const Scalar scale = wr(c2) * wq(c1);
      for (Index c0 = 0; c0 < n0; ++c0) {
        Index i = 0, j = 0, k = 0;
        detail::place(spec.order[0], c0, i, j, k);
        detail::place(spec.order[1], c1, i, j, k);
        detail::place(spec.order[2], c2, i, j, k);
        B(i, j, k) = scale * wp(c0);
      }
    }
  }
  return B;
}

// z lies in the subdifferential of ||.||_spec at A iff its dual norm is at
// most 1 and it attains equality in the duality pairing with A.
template <typename Scalar>
bool check_subdifferential_membership(const GradTensorT<Scalar>& z, const GradTensorT<Scalar>& A,
                                      const NormSpec& spec, Scalar tol) {
  require(z.same_shape(A), "check_subdifferential_membership: shape mismatch");
  if (eval_norm(z, dual_spec(spec)) > 1 + tol) return false;
  Scalar norm_a = eval_norm(A, spec);
  return std::abs(inner_product(z, A) - norm_a) <= tol * std::max(Scalar(1), norm_a);
}

// Published vectorial-TV variants covered by eval_norm.
inline std::vector<NormSpec> norm_catalog() {
  using E = Exp;
  using D = Dim;
  return {
      NormSpec::lpqr(E::two, E::one, E::one, D::der, D::pix, D::col),
      NormSpec::lpqr(E::one, E::one, E::one, D::der, D::pix, D::col),
      NormSpec::lpqr(E::two, E::one, E::two, D::der, D::pix, D::col),
      NormSpec::lpqr(E::one, E::one, E::two, D::der, D::pix, D::col),
      NormSpec::lpqr(E::two, E::two, E::one, D::der, D::col, D::pix),
      NormSpec::lpqr(E::two, E::one, E::one, D::col, D::der, D::pix),
      NormSpec::lpqr(E::one, E::two, E::one, D::der, D::col, D::pix),
      NormSpec::lpqr(E::inf, E::one, E::one, D::col, D::der, D::pix),
      NormSpec::lpqr(E::one, E::inf, E::one, D::der, D::col, D::pix),
      NormSpec::lpqr(E::inf, E::two, E::one, D::col, D::der, D::pix),
      NormSpec::lpqr(E::two, E::inf, E::one, D::der, D::col, D::pix),
      NormSpec::lpqr(E::inf, E::inf, E::one, D::col, D::der, D::pix),
      NormSpec::schatten(E::one, E::one),
      NormSpec::schatten(E::two, E::one),
      NormSpec::schatten(E::inf, E::one),
  };
}

}  // namespace ctv
