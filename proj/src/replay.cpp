#include "rlab/replay.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

RingBuffer::RingBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractViolation("RingBuffer: capacity must be > 0");
  slots_.resize(capacity);
}

std::size_t RingBuffer::push(Transition t) {
  std::size_t slot = write_;
  slots_[slot] = std::move(t);
  write_ = (write_ + 1) % capacity_;
  if (size_ < capacity_) size_ += 1;
  pushed_ += 1;
  return slot;
}

const Transition& RingBuffer::operator[](std::size_t slot) const {
  if (slot >= size_) throw ContractViolation("RingBuffer: slot out of range");
  return slots_[slot];
}

SumTree::SumTree(std::size_t capacity, double alpha, double epsilon)
    : capacity_(capacity), alpha_(alpha), epsilon_(epsilon) {
  if (capacity == 0) throw ContractViolation("SumTree: capacity must be > 0");
  if (alpha < 0.0) throw ContractViolation("SumTree: alpha must be >= 0");
  if (epsilon < 0.0) throw ContractViolation("SumTree: epsilon must be >= 0");
  nodes_.assign(2 * capacity - 1, 0.0);
}

void SumTree::set_priority(std::size_t slot, double priority) {
  if (slot >= capacity_) throw ContractViolation("SumTree: slot out of range");
  if (!std::isfinite(priority) || priority < 0.0)
    throw ContractViolation("SumTree: priority must be finite and >= 0");
  double mass = std::pow(priority + epsilon_, alpha_);
  std::size_t i = leaf_index(slot);
  nodes_[i] = mass;
  while (i > 0) {
    i = (i - 1) / 2;
    nodes_[i] = nodes_[2 * i + 1] + nodes_[2 * i + 2];
  }
}

double SumTree::leaf_mass(std::size_t slot) const {
  if (slot >= capacity_) throw ContractViolation("SumTree: slot out of range");
  return nodes_[leaf_index(slot)];
}

std::size_t SumTree::find_prefix(double q) const {
  if (!(q >= 0.0) || q >= total())
    throw ContractViolation("SumTree: prefix query outside [0, total)");
  std::size_t i = 0;
  while (i < capacity_ - 1) {
    std::size_t left = 2 * i + 1;
    if (q < nodes_[left]) {
      i = left;
    } else {
      q -= nodes_[left];
      i = left + 1;
    }
  }
  return i - (capacity_ - 1);
}

double SumTree::max_drift() const {
  double drift = 0.0;
  for (std::size_t i = 0; i + 1 < capacity_; ++i) {
    double d = std::fabs(nodes_[i] - (nodes_[2 * i + 1] + nodes_[2 * i + 2]));
    if (d > drift) drift = d;
  }
  return drift;
}

void SumTree::rebuild() {
  for (std::size_t i = capacity_ - 1; i-- > 0;)
    nodes_[i] = nodes_[2 * i + 1] + nodes_[2 * i + 2];
}

std::size_t push_transition(RingBuffer& buffer, SumTree* tree, Transition t,
                            double priority) {
  std::size_t slot = buffer.push(std::move(t));
  if (tree != nullptr) tree->set_priority(slot, priority);
  return slot;
}

SampleResult sample_uniform(const RingBuffer& buffer, std::size_t b, Rng& rng) {
  if (b == 0) throw ContractViolation("sample_uniform: batch size must be > 0");
  if (buffer.size() < b)
    throw InsufficientData("sample_uniform: buffer smaller than batch");
  SampleMeta meta;
  meta.indices.reserve(b);
  for (std::size_t k = 0; k < b; ++k)
    meta.indices.push_back(rng.uniform_index(buffer.size()));
  SampleResult r;
  r.batch = gather(buffer, meta.indices);
  r.meta = std::move(meta);
  return r;
}

SampleResult sample_prioritized(const RingBuffer& buffer, const SumTree& tree,
                                std::size_t b, Rng& rng) {
  if (b == 0)
    throw ContractViolation("sample_prioritized: batch size must be > 0");
  if (buffer.size() < b)
    throw InsufficientData("sample_prioritized: buffer smaller than batch");
  double total = tree.total();
  if (!(total > 0.0))
    throw NumericError("sample_prioritized: total priority mass is zero");

  SampleMeta meta;
  meta.indices.reserve(b);
  meta.masses.reserve(b);
  double segment = total / static_cast<double>(b);
  for (std::size_t k = 0; k < b; ++k) {
    double q = (static_cast<double>(k) + rng.uniform()) * segment;
    // Rounding can push the last segment's draw onto the open boundary.
    if (q >= total) q = std::nextafter(total, 0.0);
    std::size_t slot = tree.find_prefix(q);
    meta.indices.push_back(slot);
    meta.masses.push_back(tree.leaf_mass(slot));
  }
  SampleResult r;
  r.batch = gather(buffer, meta.indices);
  r.meta = std::move(meta);
  return r;
}

void update_priorities(SumTree& tree, const SampleMeta& meta,
                       std::span<const double> abs_deltas) {
  if (meta.indices.size() != abs_deltas.size())
    throw ContractViolation("update_priorities: size mismatch");
  for (std::size_t k = 0; k < abs_deltas.size(); ++k)
    tree.set_priority(meta.indices[k], abs_deltas[k]);
}

Batch gather(const RingBuffer& buffer, std::span<const std::size_t> slots) {
  if (slots.empty()) throw ContractViolation("gather: empty index list");
  const Transition& first = buffer[slots[0]];
  std::size_t n = first.state.size();
  std::size_t m = first.action.size();
  Batch batch;
  batch.states = Matrix(slots.size(), n);
  batch.actions = Matrix(slots.size(), m);
  batch.next_states = Matrix(slots.size(), n);
  batch.rewards.resize(slots.size());
  batch.terminals.resize(slots.size());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Transition& t = buffer[slots[k]];
    if (t.state.size() != n || t.action.size() != m ||
        t.next_state.size() != n)
      throw ContractViolation("gather: inconsistent transition shapes");
    for (std::size_t j = 0; j < n; ++j) {
      batch.states.at(k, j) = t.state[j];
      batch.next_states.at(k, j) = t.next_state[j];
    }
    for (std::size_t j = 0; j < m; ++j) batch.actions.at(k, j) = t.action[j];
    batch.rewards[k] = t.reward;
    batch.terminals[k] = t.terminal ? 1.0 : 0.0;
  }
  return batch;
}

namespace {

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_buffer(const RingBuffer& buffer, const std::string& path) {
  if (buffer.size() == 0)
    throw ContractViolation("save_buffer: refusing to snapshot an empty buffer");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericError("save_buffer: cannot open " + path);
  std::size_t n = buffer[0].state.size();
  std::size_t m = buffer[0].action.size();
  write_u64(out, buffer.capacity());
  write_u64(out, n);
  write_u64(out, m);
  write_u64(out, buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Transition& t = buffer[i];
    write_doubles(out, t.state.data(), n);
    write_doubles(out, t.action.data(), m);
    double scalars[3] = {t.reward, t.terminal ? 1.0 : 0.0,
                         t.truncated ? 1.0 : 0.0};
    write_doubles(out, scalars, 3);
    write_doubles(out, t.next_state.data(), n);
  }
  if (!out) throw NumericError("save_buffer: write failed for " + path);
}

RingBuffer load_buffer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericError("load_buffer: cannot open " + path);
  std::uint64_t capacity = read_u64(in);
  std::uint64_t n = read_u64(in);
  std::uint64_t m = read_u64(in);
  std::uint64_t size = read_u64(in);
  if (!in || capacity == 0 || size > capacity)
    throw NumericError("load_buffer: corrupt header in " + path);
  RingBuffer buffer(capacity);
  for (std::uint64_t i = 0; i < size; ++i) {
    Transition t;
    t.state.resize(n);
    t.action.resize(m);
    t.next_state.resize(n);
    read_doubles(in, t.state.data(), n);
    read_doubles(in, t.action.data(), m);
    double scalars[3];
    read_doubles(in, scalars, 3);
    t.reward = scalars[0];
    t.terminal = scalars[1] != 0.0;
    t.truncated = scalars[2] != 0.0;
    read_doubles(in, t.next_state.data(), n);
    buffer.push(std::move(t));
  }
  if (!in) throw NumericError("load_buffer: truncated records in " + path);
  return buffer;
}

}  // namespace rlab
