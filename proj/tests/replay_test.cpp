#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rlab/errors.hpp"
#include "rlab/replay.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

Transition make_transition(Rng& rng, std::size_t n = 3, std::size_t m = 1) {
  Transition t;
  t.state.resize(n);
  t.next_state.resize(n);
  t.action.resize(m);
  for (double& v : t.state) v = rng.uniform(-1.0, 1.0);
  for (double& v : t.next_state) v = rng.uniform(-1.0, 1.0);
  for (double& v : t.action) v = rng.uniform(-1.0, 1.0);
  t.reward = rng.uniform(-2.0, 0.0);
  t.terminal = rng.uniform() < 0.1;
  t.truncated = !t.terminal && rng.uniform() < 0.1;
  return t;
}

Transition tagged_transition(double tag) {
  Transition t;
  t.state = {tag, 0.0, 0.0};
  t.action = {tag};
  t.reward = -tag;
  t.next_state = {tag + 1.0, 0.0, 0.0};
  return t;
}

}  // namespace

TEST_CASE("ring buffer: pushes fill slots in order then wrap") {
  RingBuffer buf(3);
  CHECK(buf.size() == 0);
  CHECK(buf.push(tagged_transition(0)) == 0);
  CHECK(buf.push(tagged_transition(1)) == 1);
  CHECK(buf.push(tagged_transition(2)) == 2);
  CHECK(buf.size() == 3);
  // Fourth push overwrites the oldest slot; size stays at capacity.
  CHECK(buf.push(tagged_transition(3)) == 0);
  CHECK(buf.size() == 3);
  CHECK(buf[0].action[0] == 3.0);
  CHECK(buf[1].action[0] == 1.0);
  CHECK(buf.write_index() == 1);
  CHECK(buf.total_pushed() == 4);
}

TEST_CASE("ring buffer: out-of-range access and zero capacity are rejected") {
  CHECK_THROWS_AS(RingBuffer(0), ContractViolation);
  RingBuffer buf(4);
  buf.push(tagged_transition(0));
  CHECK_THROWS_AS(buf[1], ContractViolation);
}

TEST_CASE("sum tree: masses and totals follow (p + eps)^alpha") {
  SumTree tree(2, 1.0, 0.0);
  tree.set_priority(0, 1.0);
  CHECK(tree.total() == 1.0);
  tree.set_priority(1, 3.0);
  CHECK(tree.total() == 4.0);
  CHECK(tree.leaf_mass(0) == 1.0);
  CHECK(tree.leaf_mass(1) == 3.0);

  SumTree shaped(4, 0.6, 1e-3);
  shaped.set_priority(2, 0.5);
  CHECK(shaped.leaf_mass(2) == doctest::Approx(std::pow(0.501, 0.6)).epsilon(1e-15));
  shaped.set_priority(1, 0.0);
  CHECK(shaped.leaf_mass(1) == doctest::Approx(std::pow(1e-3, 0.6)).epsilon(1e-15));
}

TEST_CASE("sum tree: prefix descent resolved by hand") {
  SumTree tree(2, 1.0, 0.0);
  tree.set_priority(0, 0.5);
  tree.set_priority(1, 1.5);
  CHECK(tree.find_prefix(0.0) == 0);
  CHECK(tree.find_prefix(0.4) == 0);
  CHECK(tree.find_prefix(0.5) == 1);  // boundary mass belongs to the right leaf
  CHECK(tree.find_prefix(0.6) == 1);
  CHECK(tree.find_prefix(1.9) == 1);
  CHECK_THROWS_AS(tree.find_prefix(2.0), ContractViolation);
  CHECK_THROWS_AS(tree.find_prefix(-0.1), ContractViolation);
}

TEST_CASE("sum tree: rejects bad priorities and slots") {
  SumTree tree(4, 0.6, 1e-3);
  CHECK_THROWS_AS(tree.set_priority(0, -1.0), ContractViolation);
  CHECK_THROWS_AS(tree.set_priority(0, std::nan("")), ContractViolation);
  CHECK_THROWS_AS(tree.set_priority(4, 1.0), ContractViolation);
  CHECK_THROWS_AS(tree.leaf_mass(4), ContractViolation);
}

TEST_CASE("sum tree: internal nodes stay exact over long interleavings") {
  // Capacity off a power of two to exercise the general heap layout.
  RingBuffer buf(48);
  SumTree tree(48, 0.6, 1e-3);
  Rng rng(17);
  for (int op = 0; op < 10000; ++op) {
    if (op % 3 != 2 || buf.size() < 8) {
      push_transition(buf, &tree, make_transition(rng), rng.uniform(0.0, 5.0));
    } else {
      SampleResult s = sample_prioritized(buf, tree, 8, rng);
      std::vector<double> deltas(8);
      for (double& d : deltas) d = rng.uniform(0.0, 5.0);
      update_priorities(tree, s.meta, deltas);
    }
  }
  CHECK(tree.max_drift() <= 1e-9);
  double leaf_sum = 0.0;
  for (std::size_t i = 0; i < tree.capacity(); ++i) leaf_sum += tree.leaf_mass(i);
  CHECK(tree.total() == doctest::Approx(leaf_sum).epsilon(1e-12));

  double before = tree.total();
  tree.rebuild();
  CHECK(tree.max_drift() == 0.0);
  CHECK(tree.total() == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("push_transition: overwritten slots drop their stale mass") {
  RingBuffer buf(2);
  SumTree tree(2, 1.0, 0.0);
  push_transition(buf, &tree, tagged_transition(0), 1.0);
  push_transition(buf, &tree, tagged_transition(1), 3.0);
  CHECK(tree.total() == 4.0);
  push_transition(buf, &tree, tagged_transition(2), 10.0);
  CHECK(tree.leaf_mass(0) == 10.0);
  CHECK(tree.total() == 13.0);
  CHECK(buf[0].action[0] == 2.0);
}

TEST_CASE("sample_uniform: draws are independent, duplicates allowed") {
  RingBuffer buf(8);
  buf.push(tagged_transition(7));
  buf.push(tagged_transition(9));
  Rng rng(1);
  bool saw_duplicate = false;
  for (int c = 0; c < 64 && !saw_duplicate; ++c) {
    SampleResult s = sample_uniform(buf, 2, rng);
    CHECK(s.batch.size() == 2);
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(s.batch.actions.at(k, 0) == (s.meta.indices[k] == 0 ? 7.0 : 9.0));
    saw_duplicate = s.meta.indices[0] == s.meta.indices[1];
  }
  CHECK(saw_duplicate);

  // A batch cannot be larger than the stored history.
  CHECK_THROWS_AS(sample_uniform(buf, 3, rng), InsufficientData);
}

TEST_CASE("sample_uniform: fixed seed reproduces the index sequence") {
  RingBuffer buf(32);
  Rng fill(2);
  for (int i = 0; i < 32; ++i) buf.push(make_transition(fill));
  Rng a(9), b(9);
  SampleResult sa = sample_uniform(buf, 16, a);
  SampleResult sb = sample_uniform(buf, 16, b);
  CHECK(sa.meta.indices == sb.meta.indices);
}

TEST_CASE("sample_uniform: draws are unbiased over equal slots") {
  RingBuffer buf(10);
  Rng fill(3);
  for (int i = 0; i < 10; ++i) buf.push(make_transition(fill));
  Rng rng(4);
  std::vector<double> counts(10, 0.0);
  const int kCalls = 100000, kBatch = 10;
  for (int c = 0; c < kCalls; ++c) {
    SampleResult s = sample_uniform(buf, kBatch, rng);
    for (std::size_t idx : s.meta.indices) counts[idx] += 1.0;
  }
  double total = kCalls * static_cast<double>(kBatch);
  double expected = total / 10.0;
  double chi2 = 0.0;
  for (double c : counts) {
    CHECK(std::abs(c / total - 0.1) < 0.003);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(oracles::chi2_pvalue(chi2, 9) > 0.01);
}

TEST_CASE("sample_prioritized: frequencies track the priority masses") {
  RingBuffer buf(2);
  SumTree tree(2, 1.0, 0.0);
  Rng fill(5);
  push_transition(buf, &tree, make_transition(fill), 1.0);
  push_transition(buf, &tree, make_transition(fill), 3.0);
  Rng rng(6);
  double count0 = 0.0, total = 0.0;
  for (int c = 0; c < 500000; ++c) {
    SampleResult s = sample_prioritized(buf, tree, 2, rng);
    for (std::size_t idx : s.meta.indices) {
      if (idx == 0) count0 += 1.0;
      total += 1.0;
    }
  }
  CHECK(std::abs(count0 / total - 0.25) < 0.005);
  CHECK(std::abs((total - count0) / total - 0.75) < 0.005);
}

TEST_CASE("sample_prioritized: equal priorities look uniform") {
  RingBuffer buf(10);
  SumTree tree(10, 0.6, 1e-3);
  Rng fill(7);
  for (int i = 0; i < 10; ++i)
    push_transition(buf, &tree, make_transition(fill), 2.0);
  Rng rng(8);
  std::vector<double> counts(10, 0.0);
  const int kCalls = 100000;
  for (int c = 0; c < kCalls; ++c) {
    SampleResult s = sample_prioritized(buf, tree, 10, rng);
    for (std::size_t idx : s.meta.indices) counts[idx] += 1.0;
  }
  double total = kCalls * 10.0;
  double expected = total / 10.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(oracles::chi2_pvalue(chi2, 9) > 0.01);
}

TEST_CASE("sample_prioritized: mixed priorities match Eq-free hand masses") {
  // General-shape check on a capacity that is not a power of two.
  const std::size_t kSlots = 12;
  RingBuffer buf(kSlots);
  SumTree tree(kSlots, 0.6, 1e-3);
  Rng fill(9);
  std::vector<double> priorities;
  for (std::size_t i = 0; i < kSlots; ++i) {
    double p = fill.uniform(0.1, 2.0);
    priorities.push_back(p);
    push_transition(buf, &tree, make_transition(fill), p);
  }
  double total_mass = 0.0;
  std::vector<double> masses;
  for (double p : priorities) {
    masses.push_back(std::pow(p + 1e-3, 0.6));
    total_mass += masses.back();
  }
  CHECK(tree.total() == doctest::Approx(total_mass).epsilon(1e-12));

  Rng rng(10);
  std::vector<double> counts(kSlots, 0.0);
  const int kCalls = 20000;
  for (int c = 0; c < kCalls; ++c) {
    SampleResult s = sample_prioritized(buf, tree, kSlots, rng);
    for (std::size_t idx : s.meta.indices) counts[idx] += 1.0;
  }
  double draws = kCalls * static_cast<double>(kSlots);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < kSlots; ++i) {
    double expected = draws * masses[i] / total_mass;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  CHECK(oracles::chi2_pvalue(chi2, static_cast<double>(kSlots - 1)) > 0.01);
}

TEST_CASE("sample_prioritized: meta records the masses seen at sampling time") {
  RingBuffer buf(4);
  SumTree tree(4, 1.0, 0.0);
  Rng fill(11);
  for (int i = 0; i < 4; ++i)
    push_transition(buf, &tree, make_transition(fill), static_cast<double>(i + 1));
  Rng rng(12);
  SampleResult s = sample_prioritized(buf, tree, 4, rng);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(s.meta.masses[k] ==
          static_cast<double>(s.meta.indices[k] + 1));
}

TEST_CASE("samplers: exactly one generator draw per sampled index") {
  RingBuffer buf(32);
  SumTree tree(32, 0.6, 1e-3);
  Rng fill(13);
  for (int i = 0; i < 32; ++i)
    push_transition(buf, &tree, make_transition(fill), fill.uniform(0.1, 2.0));

  for (std::size_t b : {std::size_t{1}, std::size_t{8}, std::size_t{17}}) {
    Rng used(99), reference(99);
    sample_uniform(buf, b, used);
    for (std::size_t k = 0; k < b; ++k) reference.uniform();
    CHECK(used.uniform() == reference.uniform());

    Rng used2(100), reference2(100);
    sample_prioritized(buf, tree, b, used2);
    for (std::size_t k = 0; k < b; ++k) reference2.uniform();
    CHECK(used2.uniform() == reference2.uniform());
  }
}

TEST_CASE("samplers: error conditions") {
  RingBuffer buf(8);
  SumTree tree(8, 1.0, 0.0);
  Rng rng(14);
  CHECK_THROWS_AS(sample_uniform(buf, 1, rng), InsufficientData);
  push_transition(buf, &tree, tagged_transition(0), 0.0);
  push_transition(buf, &tree, tagged_transition(1), 0.0);
  CHECK_THROWS_AS(sample_uniform(buf, 3, rng), InsufficientData);
  CHECK_THROWS_AS(sample_prioritized(buf, tree, 3, rng), InsufficientData);
  // eps = 0 and zero priorities leave no mass to sample from.
  CHECK_THROWS_AS(sample_prioritized(buf, tree, 2, rng), NumericError);
  std::vector<double> wrong_len = {1.0};
  SampleMeta meta;
  meta.indices = {0, 1};
  meta.masses = {0.0, 0.0};
  CHECK_THROWS_AS(update_priorities(tree, meta, wrong_len), ContractViolation);
}

TEST_CASE("update_priorities: zero deltas leave the floor mass") {
  RingBuffer buf(4);
  SumTree tree(4, 0.6, 1e-3);
  Rng fill(15);
  for (int i = 0; i < 4; ++i)
    push_transition(buf, &tree, make_transition(fill), 1.0);
  SampleMeta meta;
  meta.indices = {0, 2};
  meta.masses = {tree.leaf_mass(0), tree.leaf_mass(2)};
  std::vector<double> zeros = {0.0, 0.0};
  update_priorities(tree, meta, zeros);
  double floor_mass = std::pow(1e-3, 0.6);
  CHECK(tree.leaf_mass(0) == doctest::Approx(floor_mass).epsilon(1e-15));
  CHECK(tree.leaf_mass(2) == doctest::Approx(floor_mass).epsilon(1e-15));
  CHECK(tree.leaf_mass(1) == doctest::Approx(std::pow(1.001, 0.6)).epsilon(1e-15));
}

TEST_CASE("gather: batch layout and terminal encoding") {
  RingBuffer buf(8);
  Rng fill(16);
  for (int i = 0; i < 5; ++i) {
    Transition t = make_transition(fill, 3, 2);
    t.terminal = (i == 2);
    t.truncated = (i == 3);
    buf.push(std::move(t));
  }
  std::vector<std::size_t> slots = {2, 3, 4, 2};
  Batch b = gather(buf, slots);
  CHECK(b.states.rows == 4);
  CHECK(b.states.cols == 3);
  CHECK(b.actions.cols == 2);
  CHECK(b.next_states.cols == 3);
  CHECK(b.rewards.size() == 4);
  CHECK(b.terminals == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(b.states.at(0, j) == buf[2].state[j]);
    CHECK(b.states.at(3, j) == buf[2].state[j]);
    CHECK(b.next_states.at(1, j) == buf[3].next_state[j]);
  }
  CHECK(b.rewards[2] == buf[4].reward);
  std::vector<std::size_t> empty;
  CHECK_THROWS_AS(gather(buf, empty), ContractViolation);
}

TEST_CASE("buffer snapshot: save and load round-trips every slot") {
  RingBuffer buf(16);
  Rng fill(18);
  for (int i = 0; i < 11; ++i) buf.push(make_transition(fill, 4, 2));
  std::filesystem::path path =
      std::filesystem::temp_directory_path() / "rlab_replay_roundtrip.bin";
  save_buffer(buf, path.string());
  RingBuffer loaded = load_buffer(path.string());
  CHECK(loaded.capacity() == buf.capacity());
  CHECK(loaded.size() == buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    CHECK(loaded[i].state == buf[i].state);
    CHECK(loaded[i].action == buf[i].action);
    CHECK(loaded[i].reward == buf[i].reward);
    CHECK(loaded[i].next_state == buf[i].next_state);
    CHECK(loaded[i].terminal == buf[i].terminal);
    CHECK(loaded[i].truncated == buf[i].truncated);
  }
  std::filesystem::remove(path);

  RingBuffer empty(4);
  CHECK_THROWS_AS(save_buffer(empty, path.string()), ContractViolation);
  CHECK_THROWS_AS(load_buffer("/nonexistent/rlab.bin"), NumericError);
}
