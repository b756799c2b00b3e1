#include "thciz/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "thciz/errors.hpp"
#include "thciz/graphs.hpp"

namespace thciz {

namespace {

constexpr double kTol = 1e-12;       // ansatz boundary tolerance
constexpr double kMaxTol = 1e-9;     // exponent tie tolerance
constexpr double kTupleBudget = 2.2e6;
constexpr std::uint64_t kEmitCap = 20'000'000;
constexpr int kStructuredCap = 8;    // V, III, IV, II, VIII
constexpr int kFilteredCap = 5;      // I, VII, S-I, S-II

double factorial_d(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void require_same_shape(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
}

bool is_connected(const PermTuple& s) {
  return orbit_partition(s).block_count() == 1;
}

bool noncrossing_tuple(const PermTuple& t, const PermTuple& s) {
  for (int c = 0; c < s.colors(); ++c) {
    if (!is_noncrossing_on(t[c], s[c])) return false;
  }
  return true;
}

bool all_genus_zero(const PermTuple& s, const PermTuple& t) {
  for (int c = 0; c < s.colors(); ++c) {
    if (genus(s[c], t[c]) != 0) return false;
  }
  return true;
}

bool is_diagonal(const PermTuple& s) {
  for (int c = 1; c < s.colors(); ++c) {
    if (!(s[c] == s[0])) return false;
  }
  return true;
}

PermTuple diagonal_tuple(const Permutation& p, int D) {
  return PermTuple(std::vector<Permutation>(D, p));
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::D1:
      return "d1";
    case Family::MicroA:
      return "micro-a";
    case Family::Symmetric:
      return "symmetric";
  }
  throw ValidationError("unknown family");
}

Family parse_family(const std::string& name) {
  if (name == "d1" || name == "D1") return Family::D1;
  if (name == "micro-a" || name == "microA" || name == "micro_a") {
    return Family::MicroA;
  }
  if (name == "symmetric") return Family::Symmetric;
  throw ValidationError("unknown family: " + name);
}

double normalized_alpha(double beta, double eps, int D) {
  return -beta * D - eps * D * (D - 1) / 2.0;
}

ScalingAnsatz ScalingAnsatz::micro_a(double beta, double eps, int D) {
  (void)D;
  ScalingAnsatz ans;
  ans.a = {0.0, 0.0, 0.0};
  ans.b = {0.0, beta, eps};
  return ans;
}

ScalingAnsatz ScalingAnsatz::symmetric(double beta, double eps, int D) {
  (void)D;
  ScalingAnsatz ans;
  ans.a = {0.0, beta, eps};
  ans.b = ans.a;
  return ans;
}

ScalingAnsatz ScalingAnsatz::d1(double beta_a, double beta_b) {
  ScalingAnsatz ans;
  ans.a = {0.0, beta_a, 0.0};
  ans.b = {0.0, beta_b, 0.0};
  return ans;
}

double invariant_scaling_exponent(const PermTuple& t, const SideAnsatz& side) {
  const int n = t.size();
  int single = 0;
  for (int c = 0; c < t.colors(); ++c) single += t[c].cycle_count();
  int pairs = 0;
  for (int c1 = 0; c1 < t.colors(); ++c1) {
    for (int c2 = c1 + 1; c2 < t.colors(); ++c2) {
      pairs += compose(t[c1], t[c2].inverse()).cycle_count();
    }
  }
  return side.alpha * n + side.beta * single + side.eps * pairs;
}

int pair_scaling_exponent(const PermTuple& s, const PermTuple& t) {
  return pair_connectivity_exponent(s, t);
}

double total_exponent(const PermTuple& s, const PermTuple& t,
                      const ScalingAnsatz& ans, double gamma, int D, int n) {
  require_same_shape(s, t);
  if (s.size() != n || s.colors() != D) {
    throw ValidationError("tuple shape disagrees with (n, D)");
  }
  return n * (gamma - 2.0 * D) + pair_scaling_exponent(s, t) +
         invariant_scaling_exponent(s, ans.a) +
         invariant_scaling_exponent(t, ans.b);
}

ExponentBreakdown total_exponent_breakdown(const PermTuple& s,
                                           const PermTuple& t,
                                           const ScalingAnsatz& ans,
                                           double gamma, int D, int n) {
  ExponentBreakdown bd;
  bd.s_pair = pair_scaling_exponent(s, t);
  bd.s_a = invariant_scaling_exponent(s, ans.a);
  bd.s_b = invariant_scaling_exponent(t, ans.b);
  bd.value = n * (gamma - 2.0 * D) + bd.s_pair + bd.s_a + bd.s_b;
  bd.components = pair_orbit_partition(s, t).block_count();
  int sum_sigma = 0, sum_tau = 0, xs = 0, xt = 0;
  for (int c = 0; c < D; ++c) {
    bd.genus_sum += genus(s[c], t[c]);
    bd.joint_cycle_sum +=
        join(cycle_partition(s[c]), cycle_partition(t[c])).block_count();
    sum_sigma += s[c].cycle_count();
    sum_tau += t[c].cycle_count();
  }
  for (int c1 = 0; c1 < D; ++c1) {
    for (int c2 = c1 + 1; c2 < D; ++c2) {
      xs += compose(s[c1], s[c2].inverse()).cycle_count();
      xt += compose(t[c1], t[c2].inverse()).cycle_count();
    }
  }
  bd.genus_form = n * (gamma - D + ans.a.alpha + ans.b.alpha) -
                  2.0 * (bd.components - 1) - 2.0 * bd.genus_sum +
                  2.0 * bd.joint_cycle_sum -
                  (1.0 - ans.a.beta) * sum_sigma -
                  (1.0 - ans.b.beta) * sum_tau + ans.a.eps * xs +
                  ans.b.eps * xt;
  return bd;
}

namespace {

RegimeReport classify_d1(const ScalingAnsatz& ans) {
  const double ba = ans.a.beta;
  const double bb = ans.b.beta;
  if (ba > bb + kTol) {
    throw ValidationError("D=1 classification requires beta_a <= beta_b");
  }
  RegimeReport r;
  r.family = Family::D1;
  r.D = 1;
  r.gamma = 3.0 - std::max(ba, 1.0) - std::max(bb, 1.0);
  r.delta = ba + bb + 2.0 - std::max(ba, 1.0) - std::max(bb, 1.0);
  const bool a1 = std::abs(ba - 1.0) <= kTol;
  const bool b1 = std::abs(bb - 1.0) <= kTol;
  if (a1 && b1) {
    r.regime_id = "1";
  } else if (ba < 1.0 - kTol && b1) {
    r.regime_id = "2";
  } else if (bb < 1.0 - kTol) {
    r.regime_id = "3";
  } else if (ba < 1.0 - kTol && bb > 1.0 + kTol) {
    r.regime_id = "4";
  } else if (a1 && bb > 1.0 + kTol) {
    r.regime_id = "5";
  } else {
    r.regime_id = "6";
  }
  r.prolific = (r.regime_id == "1" || r.regime_id == "2");
  r.alpha_adjustment = -(ans.a.alpha + ans.b.alpha);
  return r;
}

std::string micro_region(double beta, double eps, int D) {
  const double inv_d = 1.0 / D;
  const double crest = 1.0 - eps * (D - 1);
  if (std::abs(beta - eps) <= kTol && std::abs(beta - inv_d) <= kTol) {
    return "I";
  }
  if (std::abs(beta - crest) <= kTol && beta > inv_d + kTol) return "II";
  if (std::abs(beta - inv_d) <= kTol && eps > beta + kTol) return "VII";
  if (std::abs(beta) <= kTol && std::abs(eps) <= kTol) return "VI";
  if (std::abs(beta - eps) <= kTol && beta < inv_d - kTol) return "III";
  if (beta < eps - kTol && beta < inv_d - kTol) return "V";
  if (eps < beta - kTol && beta < crest - kTol) return "IV";
  if (beta > inv_d + kTol && beta > crest + kTol) return "VIII";
  throw ValidationError("ansatz sits on an uncovered boundary");
}

RegimeReport classify_micro_a(int D, const ScalingAnsatz& ans) {
  if (D < 2) throw ValidationError("micro-a classification requires D >= 2");
  if (std::abs(ans.a.beta) > kTol || std::abs(ans.a.eps) > kTol) {
    throw ValidationError("micro-a requires a microscopic A side");
  }
  const double beta = ans.b.beta;
  const double eps = ans.b.eps;
  if (beta < -kTol || eps < -kTol) {
    throw ValidationError("micro-a requires beta, eps >= 0");
  }
  RegimeReport r;
  r.family = Family::MicroA;
  r.D = D;
  r.regime_id = micro_region(beta, eps, D);
  const double half_pairs = D * (D - 1) / 2.0;
  if (r.regime_id == "VI") {
    r.gamma = D;
    r.delta = 0.0;
  } else if (r.regime_id == "V") {
    r.gamma = D - eps * half_pairs;
    r.delta = beta * D;
  } else if (r.regime_id == "III") {
    r.gamma = D - eps * half_pairs;
    r.delta = eps * D;
  } else if (r.regime_id == "IV") {
    r.gamma = D - (D - 1) * (beta - eps + eps * D / 2.0);
    r.delta = beta + eps * (D - 1);
  } else if (r.regime_id == "II") {
    r.gamma = 1.0 + eps * half_pairs;
    r.delta = 1.0;
  } else if (r.regime_id == "I") {
    r.gamma = (D + 1) / 2.0;
    r.delta = 1.0;
  } else if (r.regime_id == "VII") {
    r.gamma = D - eps * half_pairs;
    r.delta = 1.0;
  } else {  // VIII
    r.gamma = D + 1.0 - eps * half_pairs - beta * D;
    r.delta = 1.0;
  }
  r.prolific = (r.regime_id == "I" || r.regime_id == "II" ||
                r.regime_id == "VII");
  r.alpha_adjustment = -(ans.a.alpha + ans.b.alpha);
  return r;
}

RegimeReport classify_symmetric(int D, const ScalingAnsatz& ans) {
  if (D < 2) throw ValidationError("symmetric classification requires D >= 2");
  if (std::abs(ans.a.beta - ans.b.beta) > kTol ||
      std::abs(ans.a.eps - ans.b.eps) > kTol) {
    throw ValidationError("symmetric family requires equal sides");
  }
  const double beta = ans.b.beta;
  const double eps = ans.b.eps;
  if (beta < -kTol || eps < -kTol) {
    throw ValidationError("symmetric requires beta, eps >= 0");
  }
  RegimeReport r;
  r.family = Family::Symmetric;
  r.D = D;
  r.regime_id = "S-" + micro_region(beta, eps, D);
  if (r.regime_id == "S-VI") {
    r.gamma = D;
    r.delta = 0.0;
  } else if (r.regime_id == "S-V") {
    r.gamma = D * (1.0 - eps * (D - 1));
    r.delta = 2.0 * beta * D;
  } else if (r.regime_id == "S-III") {
    r.gamma = D * (1.0 - eps * (D - 1));
    r.delta = 2.0 * eps * D;
  } else if (r.regime_id == "S-IV") {
    r.gamma = D - (D - 1) * (eps * (D - 2) + 2.0 * beta);
    r.delta = 2.0 * (beta + eps * (D - 1));
  } else if (r.regime_id == "S-II") {
    r.gamma = 2.0 - D + eps * D * (D - 1);
    r.delta = 2.0;
  } else if (r.regime_id == "S-I") {
    r.gamma = 1.0;
    r.delta = 2.0;
  } else if (r.regime_id == "S-VII") {
    r.gamma = D * (1.0 - eps * (D - 1));
    r.delta = 2.0;
  } else {  // S-VIII
    r.gamma = D + 2.0 - eps * D * (D - 1) - 2.0 * beta * D;
    r.delta = 2.0;
  }
  r.prolific = (r.regime_id == "S-I" || r.regime_id == "S-II");
  r.alpha_adjustment = -(ans.a.alpha + ans.b.alpha);
  return r;
}

}  // namespace

RegimeReport classify(int D, const ScalingAnsatz& ans, Family family) {
  switch (family) {
    case Family::D1:
      if (D != 1) throw ValidationError("D1 family requires D = 1");
      return classify_d1(ans);
    case Family::MicroA:
      return classify_micro_a(D, ans);
    case Family::Symmetric:
      return classify_symmetric(D, ans);
  }
  throw ValidationError("unknown family");
}

RegimeReport report_for_regime(const std::string& regime_id, int D) {
  if (regime_id.size() >= 1 && regime_id[0] >= '1' && regime_id[0] <= '6' &&
      regime_id.size() == 1) {
    if (D != 1) throw ValidationError("numeric regimes require D = 1");
    const double rep[7][2] = {{0, 0},     {1.0, 1.0}, {0.0, 1.0}, {0.5, 0.5},
                              {0.5, 1.5}, {1.0, 1.5}, {1.5, 1.5}};
    const int k = regime_id[0] - '0';
    return classify(1, ScalingAnsatz::d1(rep[k][0], rep[k][1]), Family::D1);
  }
  const bool symmetric = regime_id.rfind("S-", 0) == 0;
  const std::string roman = symmetric ? regime_id.substr(2) : regime_id;
  const double inv_d = 1.0 / D;
  double beta = 0.0, eps = 0.0;
  if (roman == "I") {
    beta = eps = inv_d;
  } else if (roman == "II") {
    beta = 1.0;
    eps = 0.0;
  } else if (roman == "III") {
    beta = eps = inv_d / 2.0;
  } else if (roman == "IV") {
    beta = inv_d;
    eps = 0.0;
  } else if (roman == "V") {
    beta = 0.0;
    eps = inv_d / 2.0;
  } else if (roman == "VI") {
    beta = eps = 0.0;
  } else if (roman == "VII") {
    beta = inv_d;
    eps = inv_d + 0.5;
  } else if (roman == "VIII") {
    beta = 1.0 + inv_d;
    eps = 0.0;
  } else {
    throw ValidationError("unknown regime id: " + regime_id);
  }
  const ScalingAnsatz ans = symmetric ? ScalingAnsatz::symmetric(beta, eps, D)
                                      : ScalingAnsatz::micro_a(beta, eps, D);
  RegimeReport r =
      classify(D, ans, symmetric ? Family::Symmetric : Family::MicroA);
  if (r.regime_id != regime_id) {
    throw ValidationError("representative ansatz misclassified");
  }
  return r;
}

bool is_leading(const PermTuple& s, const PermTuple& t,
                const RegimeReport& report) {
  require_same_shape(s, t);
  if (s.colors() != report.D) {
    throw ValidationError("tuple colours disagree with the report");
  }
  const std::string& id = report.regime_id;
  if (report.family == Family::D1) {
    const Permutation& sp = s[0];
    const Permutation& tp = t[0];
    if (id == "1") return genus(sp, tp) == 0;
    if (id == "2") return sp.cycle_count() == 1 && genus(sp, tp) == 0;
    if (id == "3") return sp.cycle_count() == 1 && tp == sp;
    if (id == "4") return sp.cycle_count() == 1 && tp.is_identity();
    if (id == "5") return tp.is_identity();
    if (id == "6") return sp.is_identity() && tp.is_identity();
    throw ValidationError("unknown regime id: " + id);
  }
  const std::string roman =
      report.family == Family::Symmetric ? id.substr(2) : id;
  if (report.family == Family::Symmetric) {
    if (id == "S-I") {
      return sigma_degree_x2(s) == 0 && sigma_degree_x2(t) == 0 &&
             box_x2(s, t) == 0 && all_genus_zero(s, t);
    }
    if (id == "S-II") return delta(s, t) == 0 && all_genus_zero(s, t);
    if (id == "S-VII") return is_diagonal(s) && t == s;
    if (id == "S-VIII") return s.is_identity() && t.is_identity();
    // S-III..S-VI coincide with the micro-a sets and fall through.
  }
  if (roman == "VI") return t == s && is_connected(s);
  if (roman == "V") {
    return t == s && is_diagonal(s) && s[0].cycle_count() == 1;
  }
  if (roman == "III") {
    return t == s && is_connected(s) && sigma_degree_x2(s) == 0;
  }
  if (roman == "IV") {
    return t == s && is_connected(s) && sigma_c_degree(s) == 0;
  }
  if (roman == "II") {
    return is_connected(s) && sigma_c_degree(s) == 0 && noncrossing_tuple(t, s);
  }
  if (roman == "VIII") {
    return is_connected(s) && sigma_c_degree(s) == 0 && t.is_identity();
  }
  if (roman == "I") {
    return is_connected(s) && noncrossing_tuple(t, s) &&
           sigma_degree_x2(t) == 0 && box_sigma(t, s) == 0;
  }
  if (roman == "VII") {
    return is_connected(s) && is_diagonal(t) && noncrossing_tuple(t, s) &&
           box_sigma(t, s) == 0;
  }
  throw ValidationError("unknown regime id: " + id);
}

namespace {

// ---- structured generators ----------------------------------------------

using Key = unsigned __int128;

Key pack_tuple(const std::vector<std::vector<int>>& images) {
  // Colour-major, first entry in the most significant nibble, so numeric
  // key order equals lexicographic tuple order. Values are 0-based, < 16.
  Key key = 0;
  for (const auto& row : images) {
    for (int v : row) key = (key << 4) | static_cast<unsigned>(v);
  }
  return key;
}

std::vector<std::vector<int>> unpack_tuple(Key key, int n, int D) {
  std::vector<std::vector<int>> images(D, std::vector<int>(n));
  for (int c = D - 1; c >= 0; --c) {
    for (int i = n - 1; i >= 0; --i) {
      images[c][i] = static_cast<int>(key & 0xF);
      key >>= 4;
    }
  }
  return images;
}

PermTuple tuple_from_images(const std::vector<std::vector<int>>& images) {
  std::vector<Permutation> parts;
  parts.reserve(images.size());
  for (const auto& row : images) {
    std::vector<int> img(row.size());
    for (size_t i = 0; i < row.size(); ++i) img[i] = row[i] + 1;
    parts.emplace_back(std::move(img));
  }
  return PermTuple(std::move(parts));
}

// Insert a fresh point with value x (0-based) into every colour as a fixed
// point, shifting existing values >= x.
std::vector<std::vector<int>> shift_insert(
    const std::vector<std::vector<int>>& images, int x) {
  const int D = static_cast<int>(images.size());
  const int k = static_cast<int>(images[0].size());
  std::vector<std::vector<int>> out(D, std::vector<int>(k + 1));
  for (int c = 0; c < D; ++c) {
    out[c][x] = x;
    for (int i = 0; i < k; ++i) {
      const int from = i + (i >= x ? 1 : 0);
      const int to = images[c][i] + (images[c][i] >= x ? 1 : 0);
      out[c][from] = to;
    }
  }
  return out;
}

void check_generator_shape(int n, int D, int cap) {
  if (n < 1 || D < 1) throw ValidationError("n and D must be positive");
  if (n > cap) {
    throw CapExceeded("enumeration capped at n = " + std::to_string(cap));
  }
  if (n * D > 32 || n > 16) {
    throw CapExceeded("tuple too large for the packed generator");
  }
}

void dedup(std::vector<Key>& keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
}

// Splice insertions produce each child from many parents, so the raw child
// list inflates well past the distinct count. Compacting at a doubling
// watermark keeps memory proportional to the deduplicated level while
// staying amortized linear.
template <typename K>
void compact_level(std::vector<K>& keys, std::size_t& watermark) {
  if (keys.size() < watermark) return;
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (keys.size() > kEmitCap) {
    throw CapExceeded("generator level too large");
  }
  watermark = std::max<std::size_t>(std::size_t{1} << 22, keys.size() * 2);
}

// Connected tuples with vanishing identity-colour degree, by splice
// insertions: each level-k tuple extends a level-(k-1) tuple by one point
// spliced into exactly one colour.
std::vector<PermTuple> cmelonic_tuples(int n, int D) {
  check_generator_shape(n, D, kStructuredCap);
  std::vector<Key> level = {0};  // the single 1-point tuple
  for (int k = 2; k <= n; ++k) {
    std::vector<Key> next;
    std::size_t watermark = std::size_t{1} << 22;
    for (Key parent : level) {
      const auto base = unpack_tuple(parent, k - 1, D);
      for (int x = 0; x < k; ++x) {
        const auto shifted = shift_insert(base, x);
        for (int c = 0; c < D; ++c) {
          for (int w = 0; w < k; ++w) {
            if (w == x) continue;
            auto child = shifted;
            child[c][x] = child[c][w];
            child[c][w] = x;
            next.push_back(pack_tuple(child));
            compact_level(next, watermark);
          }
        }
      }
    }
    dedup(next);
    if (next.size() > kEmitCap) {
      throw CapExceeded("generator level too large");
    }
    level = std::move(next);
  }
  std::vector<PermTuple> out;
  out.reserve(level.size());
  for (Key key : level) out.push_back(tuple_from_images(unpack_tuple(key, n, D)));
  return out;
}

// Connected tuples of vanishing degree. For D >= 3 these are generated by
// the two elementary insertions (a point spliced into one colour; a point
// spliced before a fixed target in every colour). For D = 2 the degree-zero
// condition is genus zero, which has no such generator; fall back to a
// budgeted filter.
std::vector<PermTuple> melonic_tuples(int n, int D) {
  if (D == 2) {
    if (std::pow(factorial_d(n), D) > kTupleBudget) {
      throw CapExceeded("melonic filter budget exceeded for D = 2");
    }
    std::vector<PermTuple> out;
    for_each_perm_tuple(n, D, [&](const PermTuple& s) {
      if (is_connected(s) && sigma_degree_x2(s) == 0) out.push_back(s);
    });
    return out;
  }
  check_generator_shape(n, D, kStructuredCap);
  std::vector<Key> level = {0};
  for (int k = 2; k <= n; ++k) {
    std::vector<Key> next;
    std::size_t watermark = std::size_t{1} << 22;
    for (Key parent : level) {
      const auto base = unpack_tuple(parent, k - 1, D);
      for (int x = 0; x < k; ++x) {
        const auto shifted = shift_insert(base, x);
        // One-colour splice.
        for (int c = 0; c < D; ++c) {
          for (int w = 0; w < k; ++w) {
            if (w == x) continue;
            auto child = shifted;
            child[c][x] = child[c][w];
            child[c][w] = x;
            next.push_back(pack_tuple(child));
          }
        }
        // Every-colour splice before a common target.
        for (int y = 0; y < k; ++y) {
          if (y == x) continue;
          auto child = shifted;
          for (int c = 0; c < D; ++c) {
            int pred = -1;
            for (int i = 0; i < k; ++i) {
              if (child[c][i] == y) pred = i;
            }
            child[c][pred] = x;
            child[c][x] = y;
          }
          next.push_back(pack_tuple(child));
        }
        compact_level(next, watermark);
      }
    }
    dedup(next);
    if (next.size() > kEmitCap) {
      throw CapExceeded("generator level too large");
    }
    level = std::move(next);
  }
  std::vector<PermTuple> out;
  out.reserve(level.size());
  for (Key key : level) out.push_back(tuple_from_images(unpack_tuple(key, n, D)));
  return out;
}

// All pairs with delta = 0, by the four delta-preserving insertions
// (isolated atom; splice into sigma only; into tau only; into both in one
// colour, allowed when the two predecessors share a joint cycle of that
// colour or lie in different components).
std::vector<std::pair<PermTuple, PermTuple>> delta_zero_pairs(int n, int D) {
  check_generator_shape(n, D, kFilteredCap);
  struct PairKey {
    Key s, t;
    bool operator<(const PairKey& o) const {
      return s != o.s ? s < o.s : t < o.t;
    }
    bool operator==(const PairKey& o) const { return s == o.s && t == o.t; }
  };
  std::vector<PairKey> level = {{0, 0}};
  for (int k = 2; k <= n; ++k) {
    std::vector<PairKey> next;
    std::size_t watermark = std::size_t{1} << 22;
    for (const PairKey& parent : level) {
      const auto sbase = unpack_tuple(parent.s, k - 1, D);
      const auto tbase = unpack_tuple(parent.t, k - 1, D);
      // Joint cycle labels per colour and global component labels of the
      // parent, for the both-sides insertion rule.
      std::vector<std::vector<int>> joint(D, std::vector<int>(k - 1));
      std::vector<int> comp(k - 1);
      {
        std::vector<int> uf(k - 1);
        std::iota(uf.begin(), uf.end(), 0);
        auto find = [&](auto&& self, int v) -> int {
          return uf[v] == v ? v : uf[v] = self(self, uf[v]);
        };
        for (int c = 0; c < D; ++c) {
          std::vector<int> cuf(k - 1);
          std::iota(cuf.begin(), cuf.end(), 0);
          auto cfind = [&](auto&& self, int v) -> int {
            return cuf[v] == v ? v : cuf[v] = self(self, cuf[v]);
          };
          for (int i = 0; i < k - 1; ++i) {
            cuf[cfind(cfind, i)] = cfind(cfind, sbase[c][i]);
            cuf[cfind(cfind, i)] = cfind(cfind, tbase[c][i]);
            uf[find(find, i)] = find(find, sbase[c][i]);
            uf[find(find, i)] = find(find, tbase[c][i]);
          }
          for (int i = 0; i < k - 1; ++i) joint[c][i] = cfind(cfind, i);
        }
        for (int i = 0; i < k - 1; ++i) comp[i] = find(find, i);
      }
      for (int x = 0; x < k; ++x) {
        const auto sshift = shift_insert(sbase, x);
        const auto tshift = shift_insert(tbase, x);
        // Isolated atom.
        next.push_back({pack_tuple(sshift), pack_tuple(tshift)});
        auto old_index = [&](int w) { return w - (w > x ? 1 : 0); };
        for (int c = 0; c < D; ++c) {
          for (int ws = -1; ws < k; ++ws) {
            if (ws == x) continue;
            for (int wt = -1; wt < k; ++wt) {
              if (wt == x) continue;
              if (ws < 0 && wt < 0) continue;
              if (ws >= 0 && wt >= 0) {
                const int ow = old_index(ws);
                const int ot = old_index(wt);
                const bool same_joint = joint[c][ow] == joint[c][ot];
                const bool diff_comp = comp[ow] != comp[ot];
                if (!same_joint && !diff_comp) continue;
              }
              auto schild = sshift;
              auto tchild = tshift;
              if (ws >= 0) {
                schild[c][x] = schild[c][ws];
                schild[c][ws] = x;
              }
              if (wt >= 0) {
                tchild[c][x] = tchild[c][wt];
                tchild[c][wt] = x;
              }
              next.push_back({pack_tuple(schild), pack_tuple(tchild)});
              compact_level(next, watermark);
            }
          }
        }
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    if (next.size() > kEmitCap) {
      throw CapExceeded("generator level too large");
    }
    level = std::move(next);
  }
  std::vector<std::pair<PermTuple, PermTuple>> out;
  out.reserve(level.size());
  for (const PairKey& key : level) {
    out.emplace_back(tuple_from_images(unpack_tuple(key.s, n, D)),
                     tuple_from_images(unpack_tuple(key.t, n, D)));
  }
  return out;
}

std::vector<PermTuple> filtered_tuples(
    int n, int D, const std::function<bool(const PermTuple&)>& pred) {
  if (std::pow(factorial_d(n), D) > kTupleBudget) {
    throw CapExceeded("tuple filter budget exceeded");
  }
  std::vector<PermTuple> out;
  for_each_perm_tuple(n, D, [&](const PermTuple& s) {
    if (pred(s)) out.push_back(s);
  });
  return out;
}

std::vector<PermTuple> noncrossing_tuples_on(const PermTuple& s) {
  std::vector<std::vector<Permutation>> per_color(s.colors());
  for (int c = 0; c < s.colors(); ++c) {
    for_each_noncrossing_on(s[c], [&](const Permutation& p) {
      per_color[c].push_back(p);
    });
  }
  std::vector<PermTuple> out;
  std::vector<size_t> idx(s.colors(), 0);
  while (true) {
    std::vector<Permutation> parts;
    parts.reserve(s.colors());
    for (int c = 0; c < s.colors(); ++c) parts.push_back(per_color[c][idx[c]]);
    out.emplace_back(std::move(parts));
    int c = s.colors() - 1;
    while (c >= 0) {
      if (++idx[c] < per_color[c].size()) break;
      idx[c] = 0;
      --c;
    }
    if (c < 0) break;
  }
  return out;
}

using PairList = std::vector<std::pair<PermTuple, PermTuple>>;

PairList leading_pairs(int D, int n, const RegimeReport& report) {
  const std::string& id = report.regime_id;
  PairList pairs;
  auto diag_pairs = [&](const std::vector<PermTuple>& sigmas) {
    for (const auto& s : sigmas) pairs.emplace_back(s, s);
  };
  if (report.family == Family::D1) {
    if (D != 1) throw ValidationError("D1 regime needs D = 1");
    if (id == "1") {
      if (factorial_d(n) * factorial_d(n) > kTupleBudget) {
        throw CapExceeded("D=1 planar-pair budget exceeded");
      }
      for_each_permutation(n, [&](const Permutation& sp) {
        for_each_permutation(n, [&](const Permutation& tp) {
          if (genus(sp, tp) == 0) {
            pairs.emplace_back(diagonal_tuple(sp, 1), diagonal_tuple(tp, 1));
          }
        });
      });
    } else if (id == "2") {
      for (const auto& ncy : all_ncycles(n)) {
        for_each_noncrossing_on(ncy, [&](const Permutation& tp) {
          pairs.emplace_back(diagonal_tuple(ncy, 1), diagonal_tuple(tp, 1));
        });
      }
    } else if (id == "3") {
      for (const auto& ncy : all_ncycles(n)) {
        pairs.emplace_back(diagonal_tuple(ncy, 1), diagonal_tuple(ncy, 1));
      }
    } else if (id == "4") {
      const PermTuple idt = PermTuple::identity(n, 1);
      for (const auto& ncy : all_ncycles(n)) {
        pairs.emplace_back(diagonal_tuple(ncy, 1), idt);
      }
    } else if (id == "5") {
      const PermTuple idt = PermTuple::identity(n, 1);
      for_each_permutation(n, [&](const Permutation& sp) {
        pairs.emplace_back(diagonal_tuple(sp, 1), idt);
      });
    } else if (id == "6") {
      pairs.emplace_back(PermTuple::identity(n, 1), PermTuple::identity(n, 1));
    } else {
      throw ValidationError("unknown regime id: " + id);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
  }

  const std::string roman =
      report.family == Family::Symmetric ? id.substr(2) : id;
  const bool symmetric = report.family == Family::Symmetric;

  if (symmetric && roman == "I") {
    check_generator_shape(n, D, kFilteredCap);
    const auto planar = filtered_tuples(
        n, D, [](const PermTuple& s) { return sigma_degree_x2(s) == 0; });
    for (const auto& s : planar) {
      for (const auto& t : planar) {
        if (box_x2(s, t) == 0 && all_genus_zero(s, t)) pairs.emplace_back(s, t);
      }
    }
  } else if (symmetric && roman == "II") {
    for (auto& [s, t] : delta_zero_pairs(n, D)) {
      if (all_genus_zero(s, t)) pairs.emplace_back(std::move(s), std::move(t));
    }
  } else if (symmetric && roman == "VII") {
    for_each_permutation(n, [&](const Permutation& p) {
      const PermTuple d = diagonal_tuple(p, D);
      pairs.emplace_back(d, d);
    });
  } else if (symmetric && roman == "VIII") {
    pairs.emplace_back(PermTuple::identity(n, D), PermTuple::identity(n, D));
  } else if (roman == "V") {
    for (const auto& ncy : all_ncycles(n)) {
      const PermTuple d = diagonal_tuple(ncy, D);
      pairs.emplace_back(d, d);
    }
  } else if (roman == "VI") {
    diag_pairs(filtered_tuples(n, D, [](const PermTuple& s) {
      return orbit_partition(s).block_count() == 1;
    }));
  } else if (roman == "III") {
    if (n > kStructuredCap) {
      throw CapExceeded("enumeration capped at n = " +
                        std::to_string(kStructuredCap));
    }
    diag_pairs(melonic_tuples(n, D));
  } else if (roman == "IV") {
    diag_pairs(cmelonic_tuples(n, D));
  } else if (roman == "II") {
    for (const auto& s : cmelonic_tuples(n, D)) {
      for (const auto& t : noncrossing_tuples_on(s)) {
        pairs.emplace_back(s, t);
        if (pairs.size() > kEmitCap) {
          throw CapExceeded("leading set too large");
        }
      }
    }
  } else if (roman == "VIII") {
    const PermTuple idt = PermTuple::identity(n, D);
    for (const auto& s : cmelonic_tuples(n, D)) pairs.emplace_back(s, idt);
  } else if (roman == "I") {
    check_generator_shape(n, D, kFilteredCap);
    const auto connected = filtered_tuples(
        n, D, [](const PermTuple& s) {
          return orbit_partition(s).block_count() == 1;
        });
    for (const auto& s : connected) {
      for (const auto& t : noncrossing_tuples_on(s)) {
        if (sigma_degree_x2(t) == 0 && box_sigma(t, s) == 0) {
          pairs.emplace_back(s, t);
        }
      }
      if (pairs.size() > kEmitCap) throw CapExceeded("leading set too large");
    }
  } else if (roman == "VII") {
    check_generator_shape(n, D, kFilteredCap);
    const auto connected = filtered_tuples(
        n, D, [](const PermTuple& s) {
          return orbit_partition(s).block_count() == 1;
        });
    std::vector<Permutation> perms = all_permutations(n);
    for (const auto& s : connected) {
      for (const auto& p : perms) {
        const PermTuple t = diagonal_tuple(p, D);
        if (noncrossing_tuple(t, s) && box_sigma(t, s) == 0) {
          pairs.emplace_back(s, t);
        }
      }
    }
  } else {
    throw ValidationError("unknown regime id: " + id);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace

void enumerate_leading(int D, int n, const RegimeReport& report,
                       const std::function<void(const LeadingGraph&)>& fn) {
  if (report.D != D) {
    throw ValidationError("report D disagrees with requested D");
  }
  for (auto& [s, t] : leading_pairs(D, n, report)) {
    fn(LeadingGraph{s, t, leading_weingarten(s, t)});
  }
}

std::vector<LeadingGraph> leading_graphs(int D, int n,
                                         const RegimeReport& report) {
  std::vector<LeadingGraph> out;
  enumerate_leading(D, n, report,
                    [&](const LeadingGraph& g) { out.push_back(g); });
  return out;
}

std::uint64_t count_leading(int D, int n, const std::string& regime_id) {
  return leading_pairs(D, n, report_for_regime(regime_id, D)).size();
}

BruteForceResult brute_force_leading(int D, int n, const ScalingAnsatz& ans,
                                     double gamma) {
  const double budget = std::pow(factorial_d(n), 2.0 * D);
  if (budget > kTupleBudget) {
    throw CapExceeded("brute force budget exceeded");
  }
  std::vector<PermTuple> tuples;
  for_each_perm_tuple(n, D, [&](const PermTuple& t) { tuples.push_back(t); });
  BruteForceResult res;
  res.max_value = -1e300;
  for (const auto& s : tuples) {
    for (const auto& t : tuples) {
      const double v = total_exponent(s, t, ans, gamma, D, n);
      if (v > res.max_value) res.max_value = v;
    }
  }
  for (const auto& s : tuples) {
    for (const auto& t : tuples) {
      const double v = total_exponent(s, t, ans, gamma, D, n);
      if (v >= res.max_value - kMaxTol) res.argmax.emplace_back(s, t);
    }
  }
  return res;
}

std::complex<double> asymptotic_cumulant(int n, const RegimeReport& report,
                                         const InvariantTable& trA,
                                         const InvariantTable& trB) {
  std::complex<double> total = 0.0;
  enumerate_leading(report.D, n, report, [&](const LeadingGraph& g) {
    const auto ita = trA.find(g.sigma);
    const auto itb = trB.find(g.tau.inverse());
    if (ita == trA.end() || itb == trB.end()) {
      throw ValidationError("invariant table is missing a leading tuple");
    }
    total += ita->second * itb->second * g.coeff.to_double();
  });
  return total;
}

MomentAsymptotics asymptotic_moment(int n, int D, double trA_scalar,
                                    double trB_scalar) {
  if (n < 1 || D < 1) throw ValidationError("n and D must be positive");
  return {std::pow(trA_scalar * trB_scalar, n), -n * D};
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string report_json(const RegimeReport& report) {
  std::string s = "{\"family\":\"" + family_name(report.family) +
                  "\",\"regime\":\"" + report.regime_id +
                  "\",\"D\":" + std::to_string(report.D) +
                  ",\"gamma\":" + format_double(report.gamma) +
                  ",\"delta\":" + format_double(report.delta) +
                  ",\"prolific\":" + (report.prolific ? "true" : "false") +
                  ",\"alpha_adjustment\":" +
                  format_double(report.alpha_adjustment) + "}";
  return s;
}

void leading_graphs_csv(std::ostream& os,
                        const std::vector<LeadingGraph>& graphs) {
  os << "sigma,tau,f_num,f_den\n";
  for (const auto& g : graphs) {
    os << '"' << to_string(g.sigma) << "\",\"" << to_string(g.tau) << "\","
       << g.coeff.num_str() << ',' << g.coeff.den_str() << '\n';
  }
}

}  // namespace thciz
