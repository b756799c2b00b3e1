#include "thciz/graphs.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

#include "thciz/errors.hpp"

namespace thciz {

namespace {

const char* kPalette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                          "#ff7f00", "#a65628", "#f781bf", "#999999",
                          "#66c2a5", "#1b1b1b"};

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

int orbit_count(const std::vector<int>& next) {
  const int m = static_cast<int>(next.size());
  std::vector<char> seen(m, 0);
  int count = 0;
  for (int i = 0; i < m; ++i) {
    if (seen[i]) continue;
    ++count;
    int j = i;
    while (!seen[j]) {
      seen[j] = 1;
      j = next[j];
    }
  }
  return count;
}

std::vector<int> inverse_match(const std::vector<int>& match) {
  std::vector<int> inv(match.size());
  for (int w = 0; w < static_cast<int>(match.size()); ++w) inv[match[w]] = w;
  return inv;
}

int pair_count(int q) { return q * (q - 1) / 2; }

}  // namespace

int ColoredGraph::color_row(int color) const {
  for (int r = 0; r < q; ++r) {
    if (colors[r] == color) return r;
  }
  throw ValidationError("no row with colour " + std::to_string(color));
}

ColoredGraph make_colored_graph(std::vector<int> colors,
                                std::vector<std::vector<int>> match) {
  ColoredGraph g;
  g.q = static_cast<int>(colors.size());
  if (g.q < 2) throw ValidationError("graph needs at least two colours");
  if (match.size() != colors.size()) {
    throw ValidationError("one matching per colour required");
  }
  g.m = static_cast<int>(match[0].size());
  if (g.m < 1) throw ValidationError("graph needs at least one vertex pair");
  for (int r = 0; r < g.q; ++r) {
    if (static_cast<int>(match[r].size()) != g.m) {
      throw ValidationError("matching rows have unequal sizes");
    }
    std::vector<char> seen(g.m, 0);
    for (int b : match[r]) {
      if (b < 0 || b >= g.m || seen[b]) {
        throw ValidationError("row is not a perfect matching");
      }
      seen[b] = 1;
    }
  }
  for (int r1 = 0; r1 < g.q; ++r1) {
    for (int r2 = r1 + 1; r2 < g.q; ++r2) {
      if (colors[r1] == colors[r2]) {
        throw ValidationError("duplicate colour name");
      }
    }
  }
  g.colors = std::move(colors);
  g.match = std::move(match);
  return g;
}

int component_count(const ColoredGraph& g) {
  UnionFind uf(2 * g.m);
  for (int r = 0; r < g.q; ++r) {
    for (int w = 0; w < g.m; ++w) uf.unite(w, g.m + g.match[r][w]);
  }
  return uf.count();
}

int face_count(const ColoredGraph& g, int r1, int r2) {
  if (r1 == r2 || r1 < 0 || r2 < 0 || r1 >= g.q || r2 >= g.q) {
    throw ValidationError("face rows must be two distinct rows");
  }
  const std::vector<int> inv2 = inverse_match(g.match[r2]);
  std::vector<int> next(g.m);
  for (int w = 0; w < g.m; ++w) next[w] = inv2[g.match[r1][w]];
  return orbit_count(next);
}

int total_face_count(const ColoredGraph& g) {
  int total = 0;
  for (int r1 = 0; r1 < g.q; ++r1) {
    for (int r2 = r1 + 1; r2 < g.q; ++r2) total += face_count(g, r1, r2);
  }
  return total;
}

int faces_with_row(const ColoredGraph& g, int r) {
  int total = 0;
  for (int r2 = 0; r2 < g.q; ++r2) {
    if (r2 != r) total += face_count(g, r, r2);
  }
  return total;
}

ColoredGraph delete_color_row(const ColoredGraph& g, int r) {
  if (r < 0 || r >= g.q) throw ValidationError("row out of range");
  if (g.q <= 2) throw ValidationError("cannot delete a row of a 2-coloured graph");
  std::vector<int> colors;
  std::vector<std::vector<int>> match;
  for (int i = 0; i < g.q; ++i) {
    if (i == r) continue;
    colors.push_back(g.colors[i]);
    match.push_back(g.match[i]);
  }
  return make_colored_graph(std::move(colors), std::move(match));
}

int degree_x2(const ColoredGraph& g) {
  const int K = component_count(g);
  return 2 * (g.q - 1) * K + (g.q - 1) * (g.q - 2) * g.m -
         2 * total_face_count(g);
}

int c_degree_x2(const ColoredGraph& g, int r) {
  const int K = component_count(g);
  return 2 * K + 2 * (g.q - 2) * g.m - 2 * faces_with_row(g, r);
}

bool is_melonic(const ColoredGraph& g) {
  if (g.q < 3) throw ValidationError("melonicity needs at least three colours");
  if (component_count(g) != 1) {
    throw ValidationError("melonicity is defined for connected graphs");
  }
  if (g.q == 3) return degree_x2(g) == 0;

  // Repeatedly contract a white/black pair joined by q-1 parallel edges.
  const int q = g.q;
  int m = g.m;
  std::vector<std::vector<int>> match = g.match;
  while (m > 1) {
    int fw = -1, fb = -1, spare_row = -1;
    for (int w = 0; w < m && fw < 0; ++w) {
      const int b = match[0][w];
      int hits = 0, other = -1;
      for (int r = 0; r < q; ++r) {
        if (match[r][w] == b) {
          ++hits;
        } else {
          other = r;
        }
      }
      if (hits == q - 1) {
        fw = w;
        fb = b;
        spare_row = other;
        continue;
      }
      // The q-1 parallel edges need not include row 0; try the majority
      // black endpoint among all rows at this white vertex.
      for (int r0 = 1; r0 < q && fw < 0; ++r0) {
        const int b2 = match[r0][w];
        if (b2 == b) continue;
        int hits2 = 0, other2 = -1;
        for (int r = 0; r < q; ++r) {
          if (match[r][w] == b2) {
            ++hits2;
          } else {
            other2 = r;
          }
        }
        if (hits2 == q - 1) {
          fw = w;
          fb = b2;
          spare_row = other2;
        }
      }
    }
    if (fw < 0) return false;
    // Reroute the spare row around the removed pair.
    const int b2 = match[spare_row][fw];
    const int w2 = inverse_match(match[spare_row])[fb];
    match[spare_row][w2] = b2;
    // Drop white fw and black fb, compacting with the last index. After the
    // reroute no row maps to black fb any more, so renaming black `last` to
    // fb keeps every row a matching on {0..m-2}.
    const int last = m - 1;
    for (int r = 0; r < q; ++r) {
      match[r][fw] = match[r][last];
      match[r].pop_back();
    }
    if (fb != last) {
      for (int r = 0; r < q; ++r) {
        for (int w = 0; w < last; ++w) {
          if (match[r][w] == last) match[r][w] = fb;
        }
      }
    }
    m = last;
  }
  return true;
}

ColoredGraph sigma_graph(const PermTuple& s) {
  const int n = s.size();
  const int D = s.colors();
  std::vector<int> colors;
  std::vector<std::vector<int>> match;
  for (int c = 0; c < D; ++c) {
    colors.push_back(c + 1);
    std::vector<int> row(n);
    for (int w = 0; w < n; ++w) row[w] = s[c](w + 1) - 1;
    match.push_back(std::move(row));
  }
  colors.push_back(D + 1);
  std::vector<int> idrow(n);
  std::iota(idrow.begin(), idrow.end(), 0);
  match.push_back(std::move(idrow));
  return make_colored_graph(std::move(colors), std::move(match));
}

ColoredGraph pair_graph(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int n = s.size();
  const int D = s.colors();
  const int m = 2 * n;
  std::vector<int> colors;
  std::vector<std::vector<int>> match;
  colors.push_back(0);
  std::vector<int> swap_row(m);
  for (int w = 0; w < m; ++w) swap_row[w] = (w < n) ? n + w : w - n;
  match.push_back(std::move(swap_row));
  for (int c = 0; c < D; ++c) {
    colors.push_back(c + 1);
    const Permutation tinv = t[c].inverse();
    std::vector<int> row(m);
    for (int w = 0; w < n; ++w) row[w] = s[c](w + 1) - 1;
    for (int w = 0; w < n; ++w) row[n + w] = n + tinv(w + 1) - 1;
    match.push_back(std::move(row));
  }
  colors.push_back(D + 1);
  std::vector<int> idrow(m);
  std::iota(idrow.begin(), idrow.end(), 0);
  match.push_back(std::move(idrow));
  return make_colored_graph(std::move(colors), std::move(match));
}

int sigma_degree_x2(const PermTuple& s) {
  const int n = s.size();
  const int D = s.colors();
  const int K = orbit_partition(s).block_count();
  int faces = 0;
  for (int c = 0; c < D; ++c) faces += s[c].cycle_count();
  for (int c1 = 0; c1 < D; ++c1) {
    for (int c2 = c1 + 1; c2 < D; ++c2) {
      faces += compose(s[c1], s[c2].inverse()).cycle_count();
    }
  }
  return 2 * D * K + n * D * (D - 1) - 2 * faces;
}

int sigma_c_degree(const PermTuple& s) {
  const int n = s.size();
  const int D = s.colors();
  const int K = orbit_partition(s).block_count();
  int faces = 0;
  for (int c = 0; c < D; ++c) faces += s[c].cycle_count();
  return K + n * (D - 1) - faces;
}

int pair_degree_x2(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int n = s.size();
  const int D = s.colors();
  const int q = D + 2;
  const int K = pair_orbit_partition(s, t).block_count();
  int faces = n;  // colour pair (0, D+1)
  for (int c = 0; c < D; ++c) {
    faces += compose(s[c], t[c].inverse()).cycle_count();  // (0, c)
    faces += s[c].cycle_count() + t[c].cycle_count();      // (c, D+1)
  }
  for (int c1 = 0; c1 < D; ++c1) {
    for (int c2 = c1 + 1; c2 < D; ++c2) {
      faces += compose(s[c1], s[c2].inverse()).cycle_count();
      faces += compose(t[c1], t[c2].inverse()).cycle_count();
    }
  }
  return 2 * (q - 1) * K + (q - 1) * (q - 2) * 2 * n - 2 * faces;
}

int pair_c_degree_x2(const PermTuple& s, const PermTuple& t, int color) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int n = s.size();
  const int D = s.colors();
  const int q = D + 2;
  if (color < 0 || color > D + 1) throw ValidationError("colour out of range");
  const int K = pair_orbit_partition(s, t).block_count();
  int faces = 0;
  if (color == 0) {
    faces = n;
    for (int c = 0; c < D; ++c) {
      faces += compose(s[c], t[c].inverse()).cycle_count();
    }
  } else if (color == D + 1) {
    faces = n;
    for (int c = 0; c < D; ++c) {
      faces += s[c].cycle_count() + t[c].cycle_count();
    }
  } else {
    const int c = color - 1;
    faces = compose(s[c], t[c].inverse()).cycle_count() + s[c].cycle_count() +
            t[c].cycle_count();
    for (int c2 = 0; c2 < D; ++c2) {
      if (c2 == c) continue;
      faces += compose(s[c], s[c2].inverse()).cycle_count();
      faces += compose(t[c], t[c2].inverse()).cycle_count();
    }
  }
  return 2 * K + 2 * (q - 2) * 2 * n - 2 * faces;
}

int genus(const Permutation& s, const Permutation& t) {
  if (s.size() != t.size()) throw ValidationError("size mismatch");
  const int n = s.size();
  const int joint = join(cycle_partition(s), cycle_partition(t)).block_count();
  const int num = n + 2 * joint - compose(s, t.inverse()).cycle_count() -
                  s.cycle_count() - t.cycle_count();
  if (num % 2 != 0) throw ValidationError("genus formula parity violated");
  return num / 2;
}

int delta(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int n = s.size();
  const int D = s.colors();
  int per_color = 0;
  for (int c = 0; c < D; ++c) {
    per_color +=
        join(cycle_partition(s[c]), cycle_partition(t[c])).block_count();
  }
  return n * (D - 1) + pair_orbit_partition(s, t).block_count() - per_color;
}

bool is_cmelonic(const PermTuple& s) {
  if (orbit_partition(s).block_count() != 1) {
    throw ValidationError("tuple is not transitive");
  }
  return sigma_c_degree(s) == 0;
}

GDelta build_g_delta(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  GDelta gd;
  gd.n = s.size();
  gd.D = s.colors();
  gd.cross_of.resize(gd.D);
  gd.cross_count.resize(gd.D);
  for (int c = 0; c < gd.D; ++c) {
    const SetPartition pc =
        join(cycle_partition(s[c]), cycle_partition(t[c]));
    gd.cross_of[c].resize(gd.n);
    for (int x = 1; x <= gd.n; ++x) gd.cross_of[c][x - 1] = pc.block_index_of(x);
    gd.cross_count[c] = pc.block_count();
    gd.cross_total += pc.block_count();
  }
  UnionFind uf(gd.n + gd.cross_total);
  int offset = gd.n;
  for (int c = 0; c < gd.D; ++c) {
    for (int x = 0; x < gd.n; ++x) uf.unite(x, offset + gd.cross_of[c][x]);
    offset += gd.cross_count[c];
  }
  gd.components = uf.count();
  gd.edge_count = gd.n * gd.D;
  gd.excess = gd.edge_count - (gd.n + gd.cross_total) + gd.components;
  return gd;
}

bool is_delta_arborescent(const PermTuple& s, const PermTuple& t) {
  return build_g_delta(s, t).is_forest();
}

ChainReduction chain_quadrangle_reduce(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  const int D = s.colors();
  int k = s.size();
  std::vector<int> labels(k);
  std::iota(labels.begin(), labels.end(), 1);
  // Images over compact 0-based indices.
  std::vector<std::vector<int>> sig(D, std::vector<int>(k));
  std::vector<std::vector<int>> tau(D, std::vector<int>(k));
  for (int c = 0; c < D; ++c) {
    for (int i = 0; i < k; ++i) {
      sig[c][i] = s[c](i + 1) - 1;
      tau[c][i] = t[c](i + 1) - 1;
    }
  }
  ChainReduction out;
  auto splice_out = [&](std::vector<int>& img, int i) {
    // Remove point i from the cycle structure of img, then drop index i.
    int pred = -1;
    for (int j = 0; j < k; ++j) {
      if (img[j] == i) pred = j;
    }
    img[pred] = img[i];
    img.erase(img.begin() + i);
    for (int& v : img) {
      if (v > i) --v;
    }
  };
  // Orbit count over the compact ground set, either for a single color or
  // jointly over all colors (only_color < 0).
  auto orbit_tally = [&](const std::vector<std::vector<int>>& sg,
                         const std::vector<std::vector<int>>& tu,
                         int only_color) {
    const int m = static_cast<int>(sg[0].size());
    UnionFind uf(m);
    for (int c = 0; c < D; ++c) {
      if (only_color >= 0 && c != only_color) continue;
      for (int j = 0; j < m; ++j) {
        uf.unite(j, sg[c][j]);
        uf.unite(j, tu[c][j]);
      }
    }
    return uf.count();
  };
  bool progress = true;
  while (progress) {
    progress = false;
    for (int i = 0; i < k && !progress; ++i) {
      int active_color = -1;
      int active_count = 0;
      for (int c = 0; c < D; ++c) {
        if (sig[c][i] != i || tau[c][i] != i) {
          active_color = c;
          ++active_count;
        }
      }
      if (active_count != 1) continue;
      // Deleting the point may split its active-color orbit in two. That is
      // allowed only when the whole graph disconnects along with it; a color
      // orbit splitting while the graph stays connected would lower the
      // cycle rank, and the reduction must leave the cycle rank unchanged.
      std::vector<std::vector<int>> sig2 = sig;
      std::vector<std::vector<int>> tau2 = tau;
      for (int c = 0; c < D; ++c) {
        splice_out(sig2[c], i);
        splice_out(tau2[c], i);
      }
      const int color_gain = orbit_tally(sig2, tau2, active_color) -
                             orbit_tally(sig, tau, active_color);
      const int global_gain =
          orbit_tally(sig2, tau2, -1) - orbit_tally(sig, tau, -1);
      if (color_gain != global_gain) continue;
      out.steps.push_back({labels[i], active_color + 1});
      sig = std::move(sig2);
      tau = std::move(tau2);
      labels.erase(labels.begin() + i);
      --k;
      progress = true;
    }
  }
  out.remaining_labels = labels;
  std::vector<Permutation> sp, tp;
  for (int c = 0; c < D; ++c) {
    std::vector<int> si(k), ti(k);
    for (int i = 0; i < k; ++i) {
      si[i] = sig[c][i] + 1;
      ti[i] = tau[c][i] + 1;
    }
    sp.emplace_back(std::move(si));
    tp.emplace_back(std::move(ti));
  }
  out.sigma = PermTuple(std::move(sp));
  out.tau = PermTuple(std::move(tp));
  out.reduced_to_identities = out.sigma.is_identity() && out.tau.is_identity();
  return out;
}

int box_sigma(const PermTuple& s, const PermTuple& t) {
  if (s.size() != t.size() || s.colors() != t.colors()) {
    throw ValidationError("tuple shape mismatch");
  }
  int per_color = 0;
  for (int c = 0; c < s.colors(); ++c) {
    per_color += cycle_partition(s[c]).block_count() -
                 join(cycle_partition(s[c]), cycle_partition(t[c])).block_count();
  }
  return pair_orbit_partition(s, t).block_count() -
         orbit_partition(s).block_count() + per_color;
}

int box_x2(const PermTuple& s, const PermTuple& t) {
  return box_sigma(s, t) + box_sigma(t, s);
}

std::string to_dot(const ColoredGraph& g) {
  std::ostringstream os;
  os << "graph colored {\n";
  os << "  layout=neato; overlap=false;\n";
  for (int w = 0; w < g.m; ++w) {
    os << "  w" << w << " [shape=circle,label=\"" << w + 1 << "\"];\n";
  }
  for (int b = 0; b < g.m; ++b) {
    os << "  b" << b
       << " [shape=circle,style=filled,fillcolor=black,fontcolor=white,label=\""
       << b + 1 << "\"];\n";
  }
  for (int r = 0; r < g.q; ++r) {
    const char* col = kPalette[r % 10];
    for (int w = 0; w < g.m; ++w) {
      os << "  w" << w << " -- b" << g.match[r][w] << " [color=\"" << col
         << "\",label=\"" << g.colors[r] << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string to_dot(const GDelta& gd) {
  std::ostringstream os;
  os << "graph incidence {\n";
  os << "  layout=neato; overlap=false;\n";
  for (int x = 0; x < gd.n; ++x) {
    os << "  p" << x + 1 << " [shape=circle,label=\"" << x + 1 << "\"];\n";
  }
  for (int c = 0; c < gd.D; ++c) {
    const char* col = kPalette[c % 10];
    for (int j = 0; j < gd.cross_count[c]; ++j) {
      os << "  x" << c + 1 << "_" << j << " [shape=box,color=\"" << col
         << "\",label=\"c" << c + 1 << "\"];\n";
    }
    for (int x = 0; x < gd.n; ++x) {
      os << "  p" << x + 1 << " -- x" << c + 1 << "_" << gd.cross_of[c][x]
         << " [color=\"" << col << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

void degree_table_csv(std::ostream& os,
                      const std::vector<std::pair<PermTuple, PermTuple>>& pairs) {
  os << "sigma,tau,n,D,components,degree_x2,identity_c_degree_sigma,delta,"
        "box_sigma,box_tau\n";
  for (const auto& [s, t] : pairs) {
    os << '"' << to_string(s) << "\",\"" << to_string(t) << "\"," << s.size()
       << ',' << s.colors() << ','
       << pair_orbit_partition(s, t).block_count() << ','
       << pair_degree_x2(s, t) << ',' << sigma_c_degree(s) << ','
       << delta(s, t) << ',' << box_sigma(s, t) << ',' << box_sigma(t, s)
       << '\n';
  }
}

}  // namespace thciz
