#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlab/matrix.hpp"

namespace rlab {

class Rng;

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;   // true only for real absorbing transitions
  bool truncated = false;  // time-limit cut; not treated as terminal
};

// Column view of a sampled minibatch.
struct Batch {
  Matrix states;                  // b x n
  Matrix actions;                 // b x m
  Matrix next_states;             // b x n
  std::vector<double> rewards;    // b
  std::vector<double> terminals;  // b, 0 or 1

  std::size_t size() const { return states.rows; }
};

// Indices of the sampled transitions plus the leaf masses at sampling
// time, kept so priorities can be written back to the same slots.
struct SampleMeta {
  std::vector<std::size_t> indices;
  std::vector<double> masses;
};

struct SampleResult {
  Batch batch;
  SampleMeta meta;
};

// Fixed-capacity cyclic transition store; slot i is overwritten once the
// write head wraps past it.
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity);

  // Returns the slot the transition was written to.
  std::size_t push(Transition t);

  const Transition& operator[](std::size_t slot) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t write_index() const { return write_; }
  std::uint64_t total_pushed() const { return pushed_; }

 private:
  std::vector<Transition> slots_;
  std::size_t capacity_;
  std::size_t write_ = 0;
  std::size_t size_ = 0;
  std::uint64_t pushed_ = 0;
};

// Binary heap of partial sums over leaf masses (priority + eps)^alpha,
// one leaf per buffer slot. Internal nodes store the sum of their
// children, the root the total mass.
class SumTree {
 public:
  SumTree(std::size_t capacity, double alpha, double epsilon);

  // Stores mass (priority + eps)^alpha at the slot's leaf and repairs the
  // path to the root. priority must be finite and >= 0.
  void set_priority(std::size_t slot, double priority);

  double leaf_mass(std::size_t slot) const;
  double total() const { return nodes_[0]; }

  // Slot whose cumulative mass interval contains q, for q in [0, total).
  std::size_t find_prefix(double q) const;

  // Largest |node - (left + right)| over internal nodes.
  double max_drift() const;

  // Recomputes every internal node from the leaves.
  void rebuild();

  std::size_t capacity() const { return capacity_; }
  double alpha() const { return alpha_; }
  double epsilon() const { return epsilon_; }

 private:
  std::size_t leaf_index(std::size_t slot) const {
    return capacity_ - 1 + slot;
  }

  std::vector<double> nodes_;  // 2 * capacity - 1, leaves at capacity-1..
  std::size_t capacity_;
  double alpha_;
  double epsilon_;
};

// Appends the transition; when tree is non-null the new slot's leaf is set
// from the given priority (stale mass of an overwritten slot is replaced).
std::size_t push_transition(RingBuffer& buffer, SumTree* tree, Transition t,
                            double priority);

// b independent uniform draws over occupied slots (duplicates allowed);
// one rng draw per sampled index.
SampleResult sample_uniform(const RingBuffer& buffer, std::size_t b, Rng& rng);

// Stratified proportional sampling: the mass range is split into b equal
// segments and one prefix draw is taken per segment; one rng draw each.
SampleResult sample_prioritized(const RingBuffer& buffer, const SumTree& tree,
                                std::size_t b, Rng& rng);

// Writes |delta|-based masses back to the sampled slots.
void update_priorities(SumTree& tree, const SampleMeta& meta,
                       std::span<const double> abs_deltas);

// Assembles matrix columns for the given slots.
Batch gather(const RingBuffer& buffer, std::span<const std::size_t> slots);

// Buffer snapshot for offline inspection. Header: capacity, state dim,
// action dim, size (u64 each), then packed per-transition doubles.
void save_buffer(const RingBuffer& buffer, const std::string& path);
RingBuffer load_buffer(const std::string& path);

}  // namespace rlab
