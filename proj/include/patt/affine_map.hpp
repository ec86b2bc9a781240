#pragma once

#include <Eigen/Dense>
#include <utility>

#include "patt/errors.hpp"

namespace patt {

enum class map_kind { identity, shift, diagonal, general };

/*
 * Invertible affine map alpha(y) = W y + c used to conjugate transition
 * kernels. W is either the identity, a positive diagonal (stored as the
 * vector v), or a general lower-triangular factor with positive diagonal.
 * Inverses use elementwise division or a single triangular solve; no matrix
 * inverse is ever formed.
 */
class affine_map {
 public:
  affine_map() : kind_(map_kind::identity), dim_(0) {}

  static affine_map identity(Eigen::Index d) {
    affine_map m;
    m.kind_ = map_kind::identity;
    m.dim_ = d;
    return m;
  }

  static affine_map shift(Eigen::VectorXd c) {
    affine_map m;
    m.kind_ = map_kind::shift;
    m.dim_ = c.size();
    m.c_ = std::move(c);
    check_finite(m.c_, "shift");
    return m;
  }

  static affine_map diagonal(Eigen::VectorXd v, Eigen::VectorXd c) {
    affine_map m;
    m.kind_ = map_kind::diagonal;
    m.dim_ = v.size();
    m.v_ = std::move(v);
    m.c_ = std::move(c);
    if (m.c_.size() != m.dim_) throw usage_error("affine_map: scale/center size mismatch");
    check_finite(m.c_, "diagonal");
    if (!m.v_.allFinite() || m.v_.minCoeff() <= 0.0)
      throw numerical_error("affine_map: diagonal scales must be finite and positive");
    return m;
  }

  static affine_map general(Eigen::MatrixXd W, Eigen::VectorXd c) {
    affine_map m;
    m.kind_ = map_kind::general;
    m.dim_ = W.rows();
    m.W_ = std::move(W);
    m.c_ = std::move(c);
    if (m.W_.cols() != m.dim_ || m.c_.size() != m.dim_)
      throw usage_error("affine_map: factor/center size mismatch");
    check_finite(m.c_, "general");
    if (!m.W_.allFinite() || m.W_.diagonal().minCoeff() <= 0.0)
      throw numerical_error("affine_map: factor diagonal must be finite and positive");
    return m;
  }

  map_kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const Eigen::VectorXd& center() const { return c_; }
  const Eigen::VectorXd& scales() const { return v_; }
  const Eigen::MatrixXd& factor() const { return W_; }
  bool is_identity() const { return kind_ == map_kind::identity; }

  Eigen::VectorXd apply(const Eigen::VectorXd& y) const {
    switch (kind_) {
      case map_kind::identity: return y;
      case map_kind::shift: return y + c_;
      case map_kind::diagonal: return (v_.array() * y.array()).matrix() + c_;
      case map_kind::general: return W_.triangularView<Eigen::Lower>() * y + c_;
    }
    return y;
  }

  Eigen::VectorXd invert(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case map_kind::identity: return x;
      case map_kind::shift: return x - c_;
      case map_kind::diagonal: return ((x - c_).array() / v_.array()).matrix();
      case map_kind::general: return W_.triangularView<Eigen::Lower>().solve(x - c_);
    }
    return x;
  }

 private:
  static void check_finite(const Eigen::VectorXd& c, const char* what) {
    if (!c.allFinite()) throw numerical_error(std::string("affine_map: non-finite center (") + what + ")");
  }

  map_kind kind_;
  Eigen::Index dim_;
  Eigen::VectorXd c_;  // center, empty for identity
  Eigen::VectorXd v_;  // diagonal scales, kind == diagonal only
  Eigen::MatrixXd W_;  // lower-triangular factor, kind == general only
};

}  // namespace patt
