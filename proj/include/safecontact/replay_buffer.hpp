#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "safecontact/types.hpp"

namespace safecontact {

struct Transition {
  Observation s = Observation::Zero();
  Vec3 a = Vec3::Zero();
  double r = 0.0;
  Observation s_next = Observation::Zero();
  bool done = false;
};

/// Column-major training batch, one transition per column.
struct Batch {
  Eigen::MatrixXf obs;       // 9 x B
  Eigen::MatrixXf act;       // 3 x B
  Eigen::RowVectorXf rew;    // 1 x B
  Eigen::MatrixXf next_obs;  // 9 x B
  Eigen::RowVectorXf done;   // 1 x B, 1 for terminal transitions
};

/// Fixed-capacity ring of transitions with FIFO eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  /// Logical index 0 is the oldest stored transition.
  Transition at(std::size_t i) const;

  /// `n` distinct logical indices drawn uniformly (Floyd's algorithm).
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

  void gather(const std::vector<std::size_t>& indices, Batch& out) const;

 private:
  std::size_t physical(std::size_t logical) const;

  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  Eigen::MatrixXf obs_;
  Eigen::MatrixXf act_;
  Eigen::RowVectorXf rew_;
  Eigen::MatrixXf next_obs_;
  Eigen::RowVectorXf done_;
};

}  // namespace safecontact
