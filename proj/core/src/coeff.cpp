#include "thciz/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "thciz/errors.hpp"

namespace thciz {

namespace {

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
  int count() {
    int c = 0;
    for (int i = 0; i < static_cast<int>(parent.size()); ++i) {
      if (find(i) == i) ++c;
    }
    return c;
  }
};

void unite_blocks(UnionFind& uf, const SetPartition& p) {
  for (const auto& b : p.blocks()) {
    for (size_t i = 1; i < b.size(); ++i) uf.unite(b[0] - 1, b[i] - 1);
  }
}

Permutation restrict_to_block(const Permutation& p, const std::vector<int>& block) {
  std::vector<int> index(p.size() + 1, 0);
  for (size_t i = 0; i < block.size(); ++i) index[block[i]] = static_cast<int>(i) + 1;
  std::vector<int> img(block.size());
  for (size_t i = 0; i < block.size(); ++i) {
    const int to = index[p(block[i])];
    if (to == 0) throw ValidationError("permutation does not preserve block");
    img[i] = to;
  }
  return Permutation(std::move(img));
}

}  // namespace

int pair_connectivity_exponent(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  int faces = 0;
  for (int c = 0; c < s.colors(); ++c) {
    faces += compose(s[c], t[c].inverse()).cycle_count();
  }
  return faces - 2 * pair_orbit_partition(s, t).block_count() + 2;
}

int partition_graph_excess(const SetPartition& big,
                           const std::vector<SetPartition>& pis,
                           const std::vector<SetPartition>& small) {
  if (pis.size() != small.size() || pis.empty()) {
    throw ValidationError("one pi per small partition required");
  }
  SetPartition top = big;
  int sum_small = 0;
  int sum_pis = 0;
  for (size_t c = 0; c < pis.size(); ++c) {
    if (!small[c].refines(big) || !small[c].refines(pis[c])) {
      throw ValidationError("refinement precondition violated");
    }
    sum_small += small[c].block_count();
    sum_pis += pis[c].block_count();
    top = join(top, pis[c]);
  }
  return sum_small - sum_pis - big.block_count() + top.block_count();
}

void enumerate_coarsenings(const SetPartition& base,
                           const std::function<void(const SetPartition&)>& fn) {
  const int k = base.block_count();
  const int n = base.ground_size();
  std::vector<int> group(k, 0);
  auto emit = [&]() {
    std::vector<int> labels(n);
    for (int b = 0; b < k; ++b) {
      for (int p : base.blocks()[b]) labels[p - 1] = group[b];
    }
    fn(SetPartition::from_labels(n, labels));
  };
  auto rec = [&](auto&& self, int i, int used) -> void {
    if (i == k) {
      emit();
      return;
    }
    for (int g = 0; g <= used && g < k; ++g) {
      group[i] = g;
      self(self, i + 1, std::max(used, g + 1));
    }
  };
  rec(rec, 0, 0);
}

std::vector<SetPartition> all_coarsenings(const SetPartition& base) {
  std::vector<SetPartition> out;
  enumerate_coarsenings(base, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

ExactRational leading_weingarten_general(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int n = s.size();
  const int D = s.colors();
  const SetPartition big = pair_orbit_partition(s, t);

  std::vector<Permutation> nu;
  std::vector<SetPartition> small;
  int sum_small = 0;
  ExactRational prefactor(1);
  for (int c = 0; c < D; ++c) {
    nu.push_back(compose(s[c], t[c].inverse()));
    small.push_back(cycle_partition(nu.back()));
    sum_small += small.back().block_count();
    for (const auto& cyc : nu.back().cycles()) {
      const unsigned long p = cyc.size();
      prefactor *= ExactRational::factorial(2 * p) /
                   (ExactRational::factorial(p) * ExactRational::factorial(p - 1));
    }
  }
  const int target = sum_small - big.block_count() + 1;

  ExactRational sign(((n * D - sum_small) % 2 == 0) ? 1 : -1);

  // Candidate coarsenings per colour, with their block weights
  // prod_B (2|B| + m_B - 3)! / (2|B|)! precomputed (m_B = number of
  // Pi(nu_c)-blocks inside B, |B| = ground elements of B).
  struct Candidate {
    SetPartition part;
    int block_count;
    ExactRational weight;
  };
  std::vector<std::vector<Candidate>> options(D);
  std::vector<int> min_blocks(D), max_blocks(D);
  for (int c = 0; c < D; ++c) {
    enumerate_coarsenings(small[c], [&](const SetPartition& pi) {
      ExactRational w(1);
      for (const auto& b : pi.blocks()) {
        int m = 0;
        std::vector<char> seen(small[c].block_count(), 0);
        for (int p : b) {
          const int idx = small[c].block_index_of(p);
          if (!seen[idx]) {
            seen[idx] = 1;
            ++m;
          }
        }
        const long sz = static_cast<long>(b.size());
        w *= ExactRational::factorial(2 * sz + m - 3) /
             ExactRational::factorial(2 * sz);
      }
      options[c].push_back({pi, pi.block_count(), std::move(w)});
    });
    min_blocks[c] = 1;
    max_blocks[c] = small[c].block_count();
  }
  std::vector<int> min_rest(D + 1, 0), max_rest(D + 1, 0);
  for (int c = D - 1; c >= 0; --c) {
    min_rest[c] = min_rest[c + 1] + min_blocks[c];
    max_rest[c] = max_rest[c + 1] + max_blocks[c];
  }

  ExactRational total(0);
  std::vector<const Candidate*> chosen(D, nullptr);
  auto rec = [&](auto&& self, int c, int blocks_so_far) -> void {
    if (c == D) {
      UnionFind uf(n);
      unite_blocks(uf, big);
      for (int cc = 0; cc < D; ++cc) unite_blocks(uf, chosen[cc]->part);
      if (uf.count() != 1) return;
      ExactRational term(1);
      for (int cc = 0; cc < D; ++cc) term *= chosen[cc]->weight;
      total += term;
      return;
    }
    for (const auto& cand : options[c]) {
      const int now = blocks_so_far + cand.block_count;
      if (now + min_rest[c + 1] > target) continue;
      if (now + max_rest[c + 1] < target) continue;
      chosen[c] = &cand;
      self(self, c + 1, now);
    }
  };
  rec(rec, 0, 0);

  if (total.is_zero()) {
    // A valid family always exists; reaching this indicates a logic error.
    throw std::runtime_error("empty partition family in coefficient sum");
  }
  return sign * prefactor * total;
}

ExactRational leading_weingarten(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  if (pair_orbit_partition(s, t).block_count() == 1) {
    if (s == t) return ExactRational(1);
    ExactRational f(1);
    for (int c = 0; c < s.colors(); ++c) {
      f *= moebius(compose(s[c], t[c].inverse()));
    }
    return f;
  }
  return leading_weingarten_general(s, t);
}

namespace {

constexpr int kWeingartenCap = 6;

using ClassKey = std::vector<int>;  // cycle type, sorted

std::string class_key_str(const ClassKey& k) {
  std::string s;
  for (size_t i = 0; i < k.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(k[i]);
  }
  return s;
}

using WgTable = std::map<ClassKey, ExactRational>;

WgTable compute_weingarten_table(int n, long N) {
  // Class representatives and the Gram system reduced to class functions:
  // A[k][j] = sum over permutations tau of class j of N^{#(rep_k tau^-1)}.
  std::vector<Permutation> reps;
  std::vector<ClassKey> keys;
  std::map<ClassKey, int> class_index;
  const std::vector<Permutation> all = all_permutations(n);
  for (const auto& p : all) {
    ClassKey key = p.cycle_type();
    if (class_index.emplace(key, static_cast<int>(reps.size())).second) {
      reps.push_back(p);
      keys.push_back(key);
    }
  }
  const int K = static_cast<int>(reps.size());
  std::vector<std::vector<ExactRational>> A(
      K, std::vector<ExactRational>(K, ExactRational(0)));
  std::vector<ExactRational> rhs(K, ExactRational(0));
  for (const auto& tau : all) {
    const int j = class_index.at(tau.cycle_type());
    const Permutation tinv = tau.inverse();
    for (int k = 0; k < K; ++k) {
      A[k][j] += ExactRational::ipow(
          N, compose(reps[k], tinv).cycle_count());
    }
  }
  for (int k = 0; k < K; ++k) {
    if (reps[k].is_identity()) rhs[k] = ExactRational(1);
  }
  // Gaussian elimination with nonzero pivoting, exact.
  for (int col = 0; col < K; ++col) {
    int pivot = -1;
    for (int row = col; row < K; ++row) {
      if (!A[row][col].is_zero()) {
        pivot = row;
        break;
      }
    }
    if (pivot < 0) throw ValidationError("singular Weingarten Gram system");
    std::swap(A[col], A[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int row = 0; row < K; ++row) {
      if (row == col || A[row][col].is_zero()) continue;
      const ExactRational factor = A[row][col] / A[col][col];
      for (int c2 = col; c2 < K; ++c2) A[row][c2] -= factor * A[col][c2];
      rhs[row] -= factor * rhs[col];
    }
  }
  WgTable table;
  for (int k = 0; k < K; ++k) table[keys[k]] = rhs[k] / A[k][k];
  return table;
}

std::filesystem::path disk_cache_path(int n, long N) {
  const char* dir = std::getenv("THCIZ_WG_CACHE_DIR");
  if (!dir || !*dir) return {};
  return std::filesystem::path(dir) /
         ("wg_n" + std::to_string(n) + "_N" + std::to_string(N) + ".txt");
}

bool load_table_from_disk(int n, long N, WgTable& table) {
  const auto path = disk_cache_path(n, N);
  if (path.empty()) return false;
  std::ifstream in(path);
  if (!in) return false;
  WgTable loaded;
  std::string key_text, value_text;
  while (in >> key_text >> value_text) {
    ClassKey key;
    std::istringstream ks(key_text);
    std::string part;
    while (std::getline(ks, part, '.')) key.push_back(std::stoi(part));
    loaded[key] = ExactRational::from_string(value_text);
  }
  if (loaded.empty()) return false;
  table = std::move(loaded);
  return true;
}

void store_table_to_disk(int n, long N, const WgTable& table) {
  const auto path = disk_cache_path(n, N);
  if (path.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) return;
  for (const auto& [key, value] : table) {
    out << class_key_str(key) << ' ' << value.str() << '\n';
  }
}

const WgTable& weingarten_table(int n, long N) {
  static std::mutex mu;
  static std::map<std::pair<int, long>, WgTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({n, N});
  if (it != cache.end()) return it->second;
  WgTable table;
  if (!load_table_from_disk(n, N, table)) {
    table = compute_weingarten_table(n, N);
    store_table_to_disk(n, N, table);
  }
  return cache.emplace(std::make_pair(n, N), std::move(table)).first->second;
}

}  // namespace

ExactRational exact_weingarten(const Permutation& p, long N) {
  const int n = p.size();
  if (n > kWeingartenCap) {
    throw CapExceeded("exact Weingarten capped at n = " +
                      std::to_string(kWeingartenCap));
  }
  if (N < n) throw ValidationError("exact Weingarten requires N >= n");
  return weingarten_table(n, N).at(p.cycle_type());
}

ExactRational connected_weingarten(const PermTuple& s, const PermTuple& t,
                                   long N) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int n = s.size();
  const int D = s.colors();
  if (N < n) throw ValidationError("connected Weingarten requires N >= n");
  std::vector<Permutation> nu;
  for (int c = 0; c < D; ++c) nu.push_back(compose(s[c], t[c].inverse()));
  const SetPartition base = pair_orbit_partition(s, t);
  ExactRational total(0);
  enumerate_coarsenings(base, [&](const SetPartition& rho) {
    ExactRational term =
        (rho.block_count() % 2 == 1) ? ExactRational(1) : ExactRational(-1);
    term *= ExactRational::factorial(rho.block_count() - 1);
    for (const auto& block : rho.blocks()) {
      for (int c = 0; c < D; ++c) {
        term *= exact_weingarten(restrict_to_block(nu[c], block), N);
      }
    }
    total += term;
  });
  return total;
}

ExactRational rescaled_connected_weingarten(const PermTuple& s,
                                            const PermTuple& t, long N) {
  const int e = 2 * s.size() * s.colors() - pair_connectivity_exponent(s, t);
  return connected_weingarten(s, t, N) * ExactRational::ipow(N, e);
}

double richardson_extrapolate(double value1, long n1, double value2, long n2) {
  if (n1 == n2) throw ValidationError("extrapolation needs distinct sizes");
  const double w1 = static_cast<double>(n1) * static_cast<double>(n1);
  const double w2 = static_cast<double>(n2) * static_cast<double>(n2);
  return (w2 * value2 - w1 * value1) / (w2 - w1);
}

ExactInvariant delta_invariant() {
  return [](const PermTuple& t) {
    return t.is_identity() ? ExactRational(1) : ExactRational(0);
  };
}

ExactInvariant identity_operator_invariant(long N) {
  return [N](const PermTuple& t) {
    int e = 0;
    for (int c = 0; c < t.colors(); ++c) e += t[c].cycle_count();
    return ExactRational::ipow(N, e);
  };
}

ExactRational exact_moment(const ExactInvariant& trA, const ExactInvariant& trB,
                           int n, long N, int D) {
  if (n < 1 || D < 1) throw ValidationError("order and colours must be positive");
  if (N < n) throw ValidationError("exact moment requires N >= n");
  double budget = 1.0;
  for (int k = 2; k <= n; ++k) budget *= k;
  budget = std::pow(budget, 2.0 * D);
  if (budget > 4.0e6) throw CapExceeded("exact moment enumeration too large");

  std::vector<PermTuple> tuples;
  for_each_perm_tuple(n, D, [&](const PermTuple& t) { tuples.push_back(t); });
  std::vector<ExactRational> tra, trb_inv;
  tra.reserve(tuples.size());
  trb_inv.reserve(tuples.size());
  for (const auto& t : tuples) {
    tra.push_back(trA(t));
    trb_inv.push_back(trB(t.inverse()));
  }
  ExactRational total(0);
  for (size_t i = 0; i < tuples.size(); ++i) {
    if (tra[i].is_zero()) continue;
    for (size_t j = 0; j < tuples.size(); ++j) {
      if (trb_inv[j].is_zero()) continue;
      ExactRational term = tra[i] * trb_inv[j];
      for (int c = 0; c < D; ++c) {
        term *= exact_weingarten(
            compose(tuples[i][c], tuples[j][c].inverse()), N);
      }
      total += term;
    }
  }
  return total;
}

std::vector<ExactRational> exact_moments(const ExactInvariant& trA,
                                         const ExactInvariant& trB, int n_max,
                                         long N, int D) {
  std::vector<ExactRational> out;
  for (int n = 1; n <= n_max; ++n) out.push_back(exact_moment(trA, trB, n, N, D));
  return out;
}

std::vector<ExactRational> cumulants_from_moments(
    const std::vector<ExactRational>& moments) {
  const int n_max = static_cast<int>(moments.size());
  std::vector<ExactRational> cum;
  for (int n = 1; n <= n_max; ++n) {
    ExactRational c = moments[n - 1];
    for (int k = 1; k < n; ++k) {
      c -= ExactRational::binomial(n - 1, k - 1) * cum[k - 1] *
           moments[n - k - 1];
    }
    cum.push_back(std::move(c));
  }
  return cum;
}

}  // namespace thciz
