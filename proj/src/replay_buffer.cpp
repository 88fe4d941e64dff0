#include "safecontact/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safecontact {

ReplayBuffer::ReplayBuffer(std::size_t capacity)
    : capacity_(capacity),
      obs_(kObsDim, capacity),
      act_(kActDim, capacity),
      rew_(capacity),
      next_obs_(kObsDim, capacity),
      done_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::add(const Transition& t) {
  if (!t.s.allFinite() || !t.a.allFinite() || !std::isfinite(t.r) || !t.s_next.allFinite()) {
    throw std::invalid_argument("ReplayBuffer::add: non-finite transition");
  }
  const auto c = static_cast<Eigen::Index>(next_);
  obs_.col(c) = t.s.cast<float>();
  act_.col(c) = t.a.cast<float>();
  rew_(c) = static_cast<float>(t.r);
  next_obs_.col(c) = t.s_next.cast<float>();
  done_(c) = t.done ? 1.0f : 0.0f;
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::physical(std::size_t logical) const {
  const std::size_t oldest = size_ < capacity_ ? 0 : next_;
  return (oldest + logical) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer::at");
  const auto c = static_cast<Eigen::Index>(physical(i));
  Transition t;
  t.s = obs_.col(c).cast<double>();
  t.a = act_.col(c).cast<double>();
  t.r = rew_(c);
  t.s_next = next_obs_.col(c).cast<double>();
  t.done = done_(c) != 0.0f;
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  if (n > size_) throw std::invalid_argument("ReplayBuffer: batch larger than stored transitions");
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t j = size_ - n; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

void ReplayBuffer::gather(const std::vector<std::size_t>& indices, Batch& out) const {
  const auto n = static_cast<Eigen::Index>(indices.size());
  out.obs.resize(kObsDim, n);
  out.act.resize(kActDim, n);
  out.rew.resize(n);
  out.next_obs.resize(kObsDim, n);
  out.done.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto c = static_cast<Eigen::Index>(physical(indices[k]));
    out.obs.col(k) = obs_.col(c);
    out.act.col(k) = act_.col(c);
    out.rew(k) = rew_(c);
    out.next_obs.col(k) = next_obs_.col(c);
    out.done(k) = done_(c);
  }
}

}  // namespace safecontact
