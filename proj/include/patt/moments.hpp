#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "patt/errors.hpp"

namespace patt {

/*
 * Streaming mean / variance / covariance over sample batches.
 *
 * Batches are absorbed with the grouped variant of the Welford recursions:
 *   m' = m + sum_b (x - m) / n'
 *   q' = q + sum_b (x - m) .* (x - m')          (per-coordinate)
 *   Q' = Q + sum_b (x - m)   (x - m')^T         (full matrix)
 * which agree exactly (in real arithmetic) with the two-pass statistics over
 * the union of all batches, for any partition of the input. Divisor for
 * variance/covariance is n - 1.
 */
class running_moments {
 public:
  explicit running_moments(Eigen::Index dim, bool track_covariance = false)
      : dim_(dim), track_covariance_(track_covariance) {
    if (dim <= 0) throw usage_error("running_moments: dimension must be positive");
    m_ = Eigen::VectorXd::Zero(dim);
    q_ = Eigen::VectorXd::Zero(dim);
    if (track_covariance_) big_q_ = Eigen::MatrixXd::Zero(dim, dim);
  }

  // rows: one sample per row.
  void add_batch(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    if (rows.cols() != dim_) throw usage_error("running_moments: sample dimension mismatch");
    const Eigen::Index k = rows.rows();
    if (k == 0) return;
    const auto n_new = count_ + static_cast<std::int64_t>(k);
    Eigen::MatrixXd dev_old = rows.rowwise() - m_.transpose();
    Eigen::VectorXd m_new = m_ + dev_old.colwise().sum().transpose() / static_cast<double>(n_new);
    Eigen::MatrixXd dev_new = rows.rowwise() - m_new.transpose();
    q_ += (dev_old.array() * dev_new.array()).colwise().sum().matrix().transpose();
    if (track_covariance_) big_q_.noalias() += dev_old.transpose() * dev_new;
    m_ = std::move(m_new);
    count_ = n_new;
  }

  std::int64_t count() const { return count_; }
  Eigen::Index dim() const { return dim_; }
  bool tracks_covariance() const { return track_covariance_; }

  const Eigen::VectorXd& mean() const { return m_; }

  Eigen::VectorXd variance() const {
    require_two();
    return q_ / static_cast<double>(count_ - 1);
  }

  Eigen::VectorXd sd() const { return variance().cwiseMax(0.0).cwiseSqrt(); }

  Eigen::MatrixXd covariance() const {
    require_two();
    if (!track_covariance_) throw usage_error("running_moments: covariance not tracked");
    // Symmetrize: the batched recursion is symmetric in real arithmetic only.
    Eigen::MatrixXd c = big_q_ / static_cast<double>(count_ - 1);
    return 0.5 * (c + c.transpose());
  }

  void reset() {
    count_ = 0;
    m_.setZero();
    q_.setZero();
    if (track_covariance_) big_q_.setZero();
  }

 private:
  void require_two() const {
    if (count_ < 2) throw usage_error("running_moments: need at least two samples");
  }

  Eigen::Index dim_;
  bool track_covariance_;
  std::int64_t count_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd q_;
  Eigen::MatrixXd big_q_;
};

/*
 * Coordinate-wise median over all absorbed samples. The full history is kept;
 * medians are only recomputed when a batch arrives, which in the tuning loop
 * happens at the (sparse) update times. Even counts take the mean of the two
 * middle order statistics.
 */
class median_buffer {
 public:
  explicit median_buffer(Eigen::Index dim) : dim_(dim), store_(static_cast<std::size_t>(dim)) {
    if (dim <= 0) throw usage_error("median_buffer: dimension must be positive");
  }

  void add_batch(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    if (rows.cols() != dim_) throw usage_error("median_buffer: sample dimension mismatch");
    for (Eigen::Index j = 0; j < dim_; ++j) {
      auto& col = store_[static_cast<std::size_t>(j)];
      col.reserve(col.size() + static_cast<std::size_t>(rows.rows()));
      for (Eigen::Index i = 0; i < rows.rows(); ++i) col.push_back(rows(i, j));
    }
    median_ = compute_median();
  }

  std::int64_t count() const {
    return store_.empty() ? 0 : static_cast<std::int64_t>(store_[0].size());
  }
  Eigen::Index dim() const { return dim_; }

  const Eigen::VectorXd& median() const {
    if (count() == 0) throw usage_error("median_buffer: no samples");
    return median_;
  }

 private:
  Eigen::VectorXd compute_median() {
    Eigen::VectorXd med(dim_);
    const std::size_t n = store_[0].size();
    const std::size_t k = n / 2;
    for (Eigen::Index j = 0; j < dim_; ++j) {
      scratch_ = store_[static_cast<std::size_t>(j)];
      std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k), scratch_.end());
      double hi = scratch_[k];
      if (n % 2 == 1) {
        med(j) = hi;
      } else {
        double lo = *std::max_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k));
        med(j) = 0.5 * (lo + hi);
      }
    }
    return med;
  }

  Eigen::Index dim_;
  std::vector<std::vector<double>> store_;
  std::vector<double> scratch_;
  Eigen::VectorXd median_;
};

}  // namespace patt
