#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "thciz/rational.hpp"

namespace thciz {

// Permutation of {1, ..., n}, stored as the image table in one-line notation.
class Permutation {
 public:
  Permutation() = default;
  // images[i] is the image of i+1; must be a bijection of {1..n}.
  explicit Permutation(std::vector<int> images);
  static Permutation identity(int n);
  // Single n-cycle 1 -> 2 -> ... -> n -> 1.
  static Permutation full_cycle(int n);

  int size() const { return static_cast<int>(images_.size()); }
  int operator()(int i) const { return images_[i - 1]; }
  const std::vector<int>& images() const { return images_; }

  Permutation inverse() const;
  bool is_identity() const;
  int cycle_count() const;
  // Cycles as lists of points; each cycle starts at its smallest point,
  // cycles ordered by smallest point.
  std::vector<std::vector<int>> cycles() const;
  // Cycle lengths sorted increasingly, e.g. (12)(3) -> {1, 2}.
  std::vector<int> cycle_type() const;

  bool operator==(const Permutation&) const = default;
  auto operator<=>(const Permutation&) const = default;

 private:
  std::vector<int> images_;
};

// (s * t)(i) = s(t(i)).
Permutation compose(const Permutation& s, const Permutation& t);
// rho * s * rho^{-1}.
Permutation conjugate(const Permutation& s, const Permutation& rho);

// Tuple of D permutations of the same ground set, indexed by colour 0..D-1.
class PermTuple {
 public:
  PermTuple() = default;
  explicit PermTuple(std::vector<Permutation> parts);
  static PermTuple identity(int n, int D);

  int colors() const { return static_cast<int>(parts_.size()); }
  int size() const { return parts_.empty() ? 0 : parts_[0].size(); }
  const Permutation& operator[](int c) const { return parts_[c]; }
  const std::vector<Permutation>& parts() const { return parts_; }

  PermTuple inverse() const;
  bool is_identity() const;

  bool operator==(const PermTuple&) const = default;
  auto operator<=>(const PermTuple&) const = default;

 private:
  std::vector<Permutation> parts_;
};

PermTuple conjugate(const PermTuple& s, const Permutation& rho);

// Partition of {1..n}. Blocks are sorted internally and listed by their
// smallest element, which makes the representation canonical.
class SetPartition {
 public:
  SetPartition() = default;
  SetPartition(int n, const std::vector<std::vector<int>>& blocks);
  // Finest partition: n singletons.
  static SetPartition discrete(int n);
  // From a block label per point (labels arbitrary, 0-based vector index
  // is the point minus one).
  static SetPartition from_labels(int n, const std::vector<int>& labels);

  int ground_size() const { return n_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_index_of(int point) const { return block_of_[point - 1]; }
  bool same_block(int a, int b) const {
    return block_of_[a - 1] == block_of_[b - 1];
  }
  // True when every block of *this is contained in a block of coarser.
  bool refines(const SetPartition& coarser) const;

  bool operator==(const SetPartition&) const = default;
  auto operator<=>(const SetPartition&) const = default;

 private:
  int n_ = 0;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_of_;
};

// Least upper bound in the partition lattice.
SetPartition join(const SetPartition& a, const SetPartition& b);
// Partition of {1..n} into the cycles of s.
SetPartition cycle_partition(const Permutation& s);
// Orbits of the group generated by all colours of the tuple.
SetPartition orbit_partition(const PermTuple& s);
// Orbits of the group generated by all colours of both tuples.
SetPartition pair_orbit_partition(const PermTuple& s, const PermTuple& t);

// True when Pi(t) refines Pi(s) and, inside every cycle of s (with points
// ordered cyclically by following s), the blocks of t are mutually
// non-crossing and every cycle of t traverses its block in the same cyclic
// orientation as s.
bool is_noncrossing_on(const Permutation& t, const Permutation& s);

// Product over the cycles of nu of (-1)^(len-1) * Catalan(len-1).
ExactRational moebius(const Permutation& nu);

// Parsing and formatting. One-line notation "3,1,2"; tuples join colours
// with ';' as in "2,1;1,2". Both throw ValidationError on malformed input.
Permutation parse_permutation(const std::string& text);
PermTuple parse_perm_tuple(const std::string& text);
std::string to_string(const Permutation& s);
std::string to_string(const PermTuple& s);

// Enumeration helpers. Callbacks receive objects in lexicographic order of
// their one-line notation.
void for_each_permutation(int n, const std::function<void(const Permutation&)>& fn);
void for_each_perm_tuple(int n, int D, const std::function<void(const PermTuple&)>& fn);
std::vector<Permutation> all_permutations(int n);
// All (n-1)! cyclic permutations with a single length-n cycle.
std::vector<Permutation> all_ncycles(int n);
// All t with is_noncrossing_on(t, s).
void for_each_noncrossing_on(const Permutation& s,
                             const std::function<void(const Permutation&)>& fn);

}  // namespace thciz
