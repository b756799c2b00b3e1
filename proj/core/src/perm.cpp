#include "thciz/perm.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "thciz/errors.hpp"

namespace thciz {

namespace {

void validate_images(const std::vector<int>& images) {
  const int n = static_cast<int>(images.size());
  std::vector<char> seen(n, 0);
  for (int v : images) {
    if (v < 1 || v > n || seen[v - 1]) {
      throw ValidationError("image table is not a bijection of {1..n}");
    }
    seen[v - 1] = 1;
  }
}

// Union-find over points 1..n.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

SetPartition partition_from_union_find(int n, UnionFind& uf) {
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = uf.find(i);
  return SetPartition::from_labels(n, labels);
}

// Blocks given as sorted position lists; true when some pair interleaves
// as a < b < c < d with a, c in one block and b, d in the other.
bool blocks_cross(const std::vector<std::vector<int>>& blocks) {
  const int k = static_cast<int>(blocks.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const auto& x = blocks[i];
      const auto& y = blocks[j];
      size_t a = 0, b = 0;
      int switches = 0;
      int last = -1;  // 0 from x, 1 from y
      while (a < x.size() || b < y.size()) {
        int take;
        if (a == x.size()) {
          take = 1;
        } else if (b == y.size()) {
          take = 0;
        } else {
          take = x[a] < y[b] ? 0 : 1;
        }
        if (take == 0) {
          ++a;
        } else {
          ++b;
        }
        if (last != -1 && take != last) ++switches;
        last = take;
      }
      if (switches >= 3) return true;
    }
  }
  return false;
}

}  // namespace

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  validate_images(images_);
}

Permutation Permutation::identity(int n) {
  if (n < 1) throw ValidationError("permutation size must be positive");
  std::vector<int> img(n);
  std::iota(img.begin(), img.end(), 1);
  return Permutation(std::move(img));
}

Permutation Permutation::full_cycle(int n) {
  if (n < 1) throw ValidationError("permutation size must be positive");
  std::vector<int> img(n);
  for (int i = 0; i < n; ++i) img[i] = (i + 1) % n + 1;
  return Permutation(std::move(img));
}

Permutation Permutation::inverse() const {
  std::vector<int> img(images_.size());
  for (int i = 0; i < size(); ++i) img[images_[i] - 1] = i + 1;
  return Permutation(std::move(img));
}

bool Permutation::is_identity() const {
  for (int i = 0; i < size(); ++i) {
    if (images_[i] != i + 1) return false;
  }
  return true;
}

int Permutation::cycle_count() const {
  int count = 0;
  std::vector<char> seen(images_.size(), 0);
  for (int i = 0; i < size(); ++i) {
    if (seen[i]) continue;
    ++count;
    int j = i;
    while (!seen[j]) {
      seen[j] = 1;
      j = images_[j] - 1;
    }
  }
  return count;
}

std::vector<std::vector<int>> Permutation::cycles() const {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(images_.size(), 0);
  for (int i = 0; i < size(); ++i) {
    if (seen[i]) continue;
    std::vector<int> cyc;
    int j = i;
    while (!seen[j]) {
      seen[j] = 1;
      cyc.push_back(j + 1);
      j = images_[j] - 1;
    }
    out.push_back(std::move(cyc));
  }
  return out;
}

std::vector<int> Permutation::cycle_type() const {
  std::vector<int> type;
  for (const auto& c : cycles()) type.push_back(static_cast<int>(c.size()));
  std::sort(type.begin(), type.end());
  return type;
}

Permutation compose(const Permutation& s, const Permutation& t) {
  if (s.size() != t.size()) throw ValidationError("composing unequal sizes");
  std::vector<int> img(s.size());
  for (int i = 1; i <= s.size(); ++i) img[i - 1] = s(t(i));
  return Permutation(std::move(img));
}

Permutation conjugate(const Permutation& s, const Permutation& rho) {
  return compose(compose(rho, s), rho.inverse());
}

PermTuple::PermTuple(std::vector<Permutation> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw ValidationError("tuple needs at least one colour");
  for (const auto& p : parts_) {
    if (p.size() != parts_[0].size()) {
      throw ValidationError("tuple colours act on different ground sets");
    }
  }
}

PermTuple PermTuple::identity(int n, int D) {
  if (D < 1) throw ValidationError("tuple needs at least one colour");
  return PermTuple(std::vector<Permutation>(D, Permutation::identity(n)));
}

PermTuple PermTuple::inverse() const {
  std::vector<Permutation> parts;
  parts.reserve(parts_.size());
  for (const auto& p : parts_) parts.push_back(p.inverse());
  return PermTuple(std::move(parts));
}

bool PermTuple::is_identity() const {
  for (const auto& p : parts_) {
    if (!p.is_identity()) return false;
  }
  return true;
}

PermTuple conjugate(const PermTuple& s, const Permutation& rho) {
  std::vector<Permutation> parts;
  parts.reserve(s.colors());
  for (const auto& p : s.parts()) parts.push_back(conjugate(p, rho));
  return PermTuple(std::move(parts));
}

SetPartition::SetPartition(int n, const std::vector<std::vector<int>>& blocks)
    : n_(n) {
  if (n < 0) throw ValidationError("negative ground size");
  block_of_.assign(n, -1);
  blocks_ = blocks;
  for (auto& b : blocks_) std::sort(b.begin(), b.end());
  std::sort(blocks_.begin(), blocks_.end());
  int idx = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw ValidationError("empty block");
    for (int p : b) {
      if (p < 1 || p > n || block_of_[p - 1] != -1) {
        throw ValidationError("blocks do not partition {1..n}");
      }
      block_of_[p - 1] = idx;
    }
    ++idx;
  }
  for (int v : block_of_) {
    if (v == -1) throw ValidationError("blocks do not cover {1..n}");
  }
}

SetPartition SetPartition::discrete(int n) {
  std::vector<std::vector<int>> blocks;
  blocks.reserve(n);
  for (int i = 1; i <= n; ++i) blocks.push_back({i});
  return SetPartition(n, blocks);
}

SetPartition SetPartition::from_labels(int n, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != n) {
    throw ValidationError("label vector size mismatch");
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[labels[i]].push_back(i + 1);
  std::vector<std::vector<int>> blocks;
  blocks.reserve(groups.size());
  for (auto& [_, pts] : groups) blocks.push_back(std::move(pts));
  return SetPartition(n, blocks);
}

bool SetPartition::refines(const SetPartition& coarser) const {
  if (n_ != coarser.n_) throw ValidationError("ground set mismatch");
  for (const auto& b : blocks_) {
    const int target = coarser.block_index_of(b[0]);
    for (int p : b) {
      if (coarser.block_index_of(p) != target) return false;
    }
  }
  return true;
}

SetPartition join(const SetPartition& a, const SetPartition& b) {
  if (a.ground_size() != b.ground_size()) {
    throw ValidationError("ground set mismatch");
  }
  UnionFind uf(a.ground_size());
  for (const auto& blk : a.blocks()) {
    for (size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0] - 1, blk[i] - 1);
  }
  for (const auto& blk : b.blocks()) {
    for (size_t i = 1; i < blk.size(); ++i) uf.unite(blk[0] - 1, blk[i] - 1);
  }
  return partition_from_union_find(a.ground_size(), uf);
}

SetPartition cycle_partition(const Permutation& s) {
  UnionFind uf(s.size());
  for (int i = 1; i <= s.size(); ++i) uf.unite(i - 1, s(i) - 1);
  return partition_from_union_find(s.size(), uf);
}

SetPartition orbit_partition(const PermTuple& s) {
  UnionFind uf(s.size());
  for (int c = 0; c < s.colors(); ++c) {
    for (int i = 1; i <= s.size(); ++i) uf.unite(i - 1, s[c](i) - 1);
  }
  return partition_from_union_find(s.size(), uf);
}

SetPartition pair_orbit_partition(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  UnionFind uf(s.size());
  for (int c = 0; c < s.colors(); ++c) {
    for (int i = 1; i <= s.size(); ++i) {
      uf.unite(i - 1, s[c](i) - 1);
      uf.unite(i - 1, t[c](i) - 1);
    }
  }
  return partition_from_union_find(s.size(), uf);
}

bool is_noncrossing_on(const Permutation& t, const Permutation& s) {
  if (t.size() != s.size()) throw ValidationError("size mismatch");
  const int n = s.size();
  // Pi(t) must refine Pi(s): every step of t stays inside a cycle of s.
  const SetPartition pi_s = cycle_partition(s);
  for (int x = 1; x <= n; ++x) {
    if (!pi_s.same_block(x, t(x))) return false;
  }
  // Position of each point along its s-cycle.
  std::vector<int> pos(n + 1, -1);
  for (const auto& cyc : s.cycles()) {
    for (size_t i = 0; i < cyc.size(); ++i) pos[cyc[i]] = static_cast<int>(i);
  }
  // Group the cycles of t by their enclosing s-cycle.
  std::vector<std::vector<std::vector<int>>> per_cycle(pi_s.block_count());
  for (const auto& tc : t.cycles()) {
    // Orientation: following t from the point of smallest position must
    // visit strictly increasing positions.
    int start = tc[0];
    for (int p : tc) {
      if (pos[p] < pos[start]) start = p;
    }
    std::vector<int> positions;
    int x = start;
    for (size_t k = 0; k < tc.size(); ++k) {
      positions.push_back(pos[x]);
      x = t(x);
    }
    for (size_t k = 1; k < positions.size(); ++k) {
      if (positions[k] <= positions[k - 1]) return false;
    }
    std::sort(positions.begin(), positions.end());
    per_cycle[pi_s.block_index_of(tc[0])].push_back(std::move(positions));
  }
  for (const auto& blocks : per_cycle) {
    if (blocks_cross(blocks)) return false;
  }
  return true;
}

ExactRational moebius(const Permutation& nu) {
  ExactRational out(1);
  for (const auto& cyc : nu.cycles()) {
    const unsigned long p = cyc.size();
    ExactRational term = ExactRational::catalan(p - 1);
    if ((p - 1) % 2 == 1) term = -term;
    out *= term;
  }
  return out;
}

Permutation parse_permutation(const std::string& text) {
  std::vector<int> img;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    size_t lo = token.find_first_not_of(" \t");
    if (lo == std::string::npos) throw ValidationError("empty entry in: " + text);
    size_t hi = token.find_last_not_of(" \t");
    token = token.substr(lo, hi - lo + 1);
    try {
      size_t used = 0;
      const int v = std::stoi(token, &used);
      if (used != token.size()) throw ValidationError("");
      img.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("malformed permutation entry '" + token + "'");
    }
  }
  if (img.empty()) throw ValidationError("empty permutation literal");
  validate_images(img);
  return Permutation(std::move(img));
}

PermTuple parse_perm_tuple(const std::string& text) {
  std::vector<Permutation> parts;
  size_t start = 0;
  while (true) {
    const size_t semi = text.find(';', start);
    const std::string piece = semi == std::string::npos
                                  ? text.substr(start)
                                  : text.substr(start, semi - start);
    parts.push_back(parse_permutation(piece));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return PermTuple(std::move(parts));
}

std::string to_string(const Permutation& s) {
  std::string out;
  for (int i = 1; i <= s.size(); ++i) {
    if (i > 1) out += ',';
    out += std::to_string(s(i));
  }
  return out;
}

std::string to_string(const PermTuple& s) {
  std::string out;
  for (int c = 0; c < s.colors(); ++c) {
    if (c > 0) out += ';';
    out += to_string(s[c]);
  }
  return out;
}

void for_each_permutation(int n, const std::function<void(const Permutation&)>& fn) {
  if (n < 1) throw ValidationError("permutation size must be positive");
  std::vector<int> img(n);
  std::iota(img.begin(), img.end(), 1);
  do {
    fn(Permutation(img));
  } while (std::next_permutation(img.begin(), img.end()));
}

std::vector<Permutation> all_permutations(int n) {
  std::vector<Permutation> out;
  for_each_permutation(n, [&](const Permutation& p) { out.push_back(p); });
  return out;
}

void for_each_perm_tuple(int n, int D, const std::function<void(const PermTuple&)>& fn) {
  if (D < 1) throw ValidationError("tuple needs at least one colour");
  const std::vector<Permutation> all = all_permutations(n);
  std::vector<size_t> idx(D, 0);
  std::vector<Permutation> parts(D, all[0]);
  while (true) {
    for (int c = 0; c < D; ++c) parts[c] = all[idx[c]];
    fn(PermTuple(parts));
    int c = D - 1;
    while (c >= 0) {
      if (++idx[c] < all.size()) break;
      idx[c] = 0;
      --c;
    }
    if (c < 0) break;
  }
}

std::vector<Permutation> all_ncycles(int n) {
  std::vector<Permutation> out;
  for_each_permutation(n, [&](const Permutation& p) {
    if (p.cycle_count() == 1) out.push_back(p);
  });
  return out;
}

namespace {

// Non-crossing partitions of positions {0..m-1} with, per block, the cyclic
// successor map in increasing-position order. Each entry of the result is
// one partition given as a list of (from, to) position pairs.
std::vector<std::vector<std::pair<int, int>>> noncrossing_fragments(int m) {
  std::vector<std::vector<std::pair<int, int>>> result;
  std::vector<int> label(m, 0);
  auto emit = [&](int groups) {
    std::vector<std::vector<int>> blocks(groups);
    for (int i = 0; i < m; ++i) blocks[label[i]].push_back(i);
    if (blocks_cross(blocks)) return;
    std::vector<std::pair<int, int>> frag;
    for (const auto& b : blocks) {
      for (size_t k = 0; k < b.size(); ++k) {
        frag.emplace_back(b[k], b[(k + 1) % b.size()]);
      }
    }
    result.push_back(std::move(frag));
  };
  auto rec = [&](auto&& self, int i, int used) -> void {
    if (i == m) {
      emit(used);
      return;
    }
    for (int g = 0; g <= used && g < m; ++g) {
      label[i] = g;
      self(self, i + 1, std::max(used, g + 1));
    }
  };
  rec(rec, 0, 0);
  return result;
}

}  // namespace

void for_each_noncrossing_on(const Permutation& s,
                             const std::function<void(const Permutation&)>& fn) {
  const auto s_cycles = s.cycles();
  const int n = s.size();
  // Fragment choices per cycle, positions mapped back to points.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> choices;
  for (const auto& cyc : s_cycles) {
    auto frags = noncrossing_fragments(static_cast<int>(cyc.size()));
    std::vector<std::vector<std::pair<int, int>>> mapped;
    mapped.reserve(frags.size());
    for (const auto& f : frags) {
      std::vector<std::pair<int, int>> m;
      m.reserve(f.size());
      for (auto [a, b] : f) m.emplace_back(cyc[a], cyc[b]);
      mapped.push_back(std::move(m));
    }
    choices.push_back(std::move(mapped));
  }
  std::vector<size_t> idx(choices.size(), 0);
  while (true) {
    std::vector<int> img(n);
    std::iota(img.begin(), img.end(), 1);
    for (size_t c = 0; c < choices.size(); ++c) {
      for (auto [from, to] : choices[c][idx[c]]) img[from - 1] = to;
    }
    fn(Permutation(std::move(img)));
    int c = static_cast<int>(choices.size()) - 1;
    while (c >= 0) {
      if (++idx[c] < choices[c].size()) break;
      idx[c] = 0;
      --c;
    }
    if (c < 0) break;
  }
}

}  // namespace thciz
