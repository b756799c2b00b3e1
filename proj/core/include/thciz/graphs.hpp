#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "thciz/perm.hpp"

namespace thciz {

// Bipartite edge-coloured graph: m white and m black vertices, one perfect
// matching per colour. match[r][w] is the black endpoint of the colour-r
// edge at white vertex w (all indices 0-based). colors[r] names row r.
struct ColoredGraph {
  int q = 0;
  int m = 0;
  std::vector<int> colors;
  std::vector<std::vector<int>> match;

  int color_row(int color) const;  // row index of a colour name
};

ColoredGraph make_colored_graph(std::vector<int> colors,
                                std::vector<std::vector<int>> match);

// Connected components (white and black vertices together).
int component_count(const ColoredGraph& g);
// Bicoloured cycles with colour rows r1 != r2.
int face_count(const ColoredGraph& g, int r1, int r2);
// Sum of face_count over unordered row pairs.
int total_face_count(const ColoredGraph& g);
// Faces whose two colours include row r.
int faces_with_row(const ColoredGraph& g, int r);
// Graph with row r removed.
ColoredGraph delete_color_row(const ColoredGraph& g, int r);

// Twice the degree: 2(q-1)K + (q-1)(q-2)m - 2F. Non-negative and even.
int degree_x2(const ColoredGraph& g);
// Twice the colour degree of row r: 2K + 2(q-2)m - 2F_c where F_c counts
// the faces containing colour row r.
int c_degree_x2(const ColoredGraph& g, int r);

// Melonicity. For q >= 4 this runs the reduction that repeatedly removes a
// white/black pair joined by q-1 parallel edges; for q == 3 a graph counts
// as melonic exactly when its degree vanishes. Throws ValidationError on
// disconnected input or q < 3.
bool is_melonic(const ColoredGraph& g);

// Graph of a single tuple: q = D+1 colours named 1..D+1 on n white and n
// black vertices; colour c <= D matches white w to black s[c](w), colour
// D+1 is the identity matching.
ColoredGraph sigma_graph(const PermTuple& s);

// Graph of a pair of tuples: q = D+2 colours named 0..D+1 on 2n white and
// 2n black vertices. Vertices 0..n-1 carry s, vertices n..2n-1 carry the
// inverse of t, colour 0 matches the two sides, colour D+1 is the identity.
ColoredGraph pair_graph(const PermTuple& s, const PermTuple& t);

// Closed forms of the same quantities straight from the tuples.
int sigma_degree_x2(const PermTuple& s);
// Colour degree of the identity matching colour D+1 (an integer here).
int sigma_c_degree(const PermTuple& s);
int pair_degree_x2(const PermTuple& s, const PermTuple& t);
// Colour degree (doubled) of colour row `color` in the pair graph;
// colour names run 0..D+1.
int pair_c_degree_x2(const PermTuple& s, const PermTuple& t, int color);

// Genus of the two-permutation surface:
// (n + 2|Pi(s,t)| - #(s t^-1) - #s - #t) / 2. Always a whole number >= 0.
int genus(const Permutation& s, const Permutation& t);

// n(D-1) + |Pi(s,t)| - sum_c |Pi(s_c,t_c)|. Symmetric and >= 0.
int delta(const PermTuple& s, const PermTuple& t);

// True when the tuple is connected with vanishing identity-colour degree.
// Throws ValidationError when the tuple is not transitive.
bool is_cmelonic(const PermTuple& s);

// Incidence structure behind delta: one round vertex per ground point and
// one cross vertex per joint cycle of (s_c, t_c) per colour.
struct GDelta {
  int n = 0;
  int D = 0;
  // cross_of[c][x-1] is the cross vertex of point x in colour c
  // (0-based id within colour c).
  std::vector<std::vector<int>> cross_of;
  std::vector<int> cross_count;  // per colour
  int cross_total = 0;
  int components = 0;
  int edge_count = 0;  // n * D
  int excess = 0;      // edges - vertices + components
  bool is_forest() const { return excess == 0; }
};

GDelta build_g_delta(const PermTuple& s, const PermTuple& t);

// True when the pair graph of (s, t) can be grown from isolated dipoles,
// equivalently when build_g_delta(s, t) is a forest.
bool is_delta_arborescent(const PermTuple& s, const PermTuple& t);

// One removal step of the chain reduction: the deleted point and the single
// colour in which it was still active.
struct ChainStep {
  int label = 0;
  int color = 0;  // 1-based colour
};

struct ChainReduction {
  std::vector<ChainStep> steps;
  std::vector<int> remaining_labels;  // original labels, ascending
  PermTuple sigma;                    // terminal pair on the relabelled set
  PermTuple tau;
  bool reduced_to_identities = false;
};

// Repeatedly removes the smallest deletable point: one that is non-trivial
// in exactly one colour of both tuples and trivial in all others, and whose
// removal splits the orbits of that colour only if the graph as a whole
// disconnects along with it (so each deletion preserves the cycle rank).
// The point is spliced out of its active colour. Terminates when no
// deletable point remains; reduced_to_identities is then equivalent to the
// pair having been delta-arborescent.
ChainReduction chain_quadrangle_reduce(const PermTuple& s, const PermTuple& t);

// |Pi(s,t)| - |Pi(s)| + sum_c (|Pi(s_c)| - |Pi(s_c,t_c)|). Non-negative.
int box_sigma(const PermTuple& s, const PermTuple& t);
// box_sigma(s,t) + box_sigma(t,s); the symmetric box is half of this.
int box_x2(const PermTuple& s, const PermTuple& t);

// Graphviz rendering.
std::string to_dot(const ColoredGraph& g);
std::string to_dot(const GDelta& gd);

/// CSV rows of graph statistics for a list of pairs. Columns:
// sigma,tau,n,D,components,degree_x2,identity_c_degree_sigma,delta,
// box_sigma,box_tau
void degree_table_csv(std::ostream& os,
                      const std::vector<std::pair<PermTuple, PermTuple>>& pairs);

}  // namespace thciz
