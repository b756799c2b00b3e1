#pragma once

#include <functional>
#include <string>
#include <vector>

#include "thciz/perm.hpp"
#include "thciz/rational.hpp"

namespace thciz {

// Trace-invariant values as a function of the permutation tuple.
using ExactInvariant = std::function<ExactRational(const PermTuple&)>;

// Connectivity exponent s(s,t) = sum_c #(s_c t_c^-1) - 2|Pi(s,t)| + 2.
int pair_connectivity_exponent(const PermTuple& s, const PermTuple& t);

// For the incidence graph with one round vertex per block of `big`, one
// square vertex per block of each pis[c], and an edge per block of
// small[c] joining its big-block to its pis[c]-block:
// sum_c |small_c| - sum_c |pis_c| - |big| + |big v pis_1 v ... v pis_D|.
// Zero exactly when that graph is a forest.
int partition_graph_excess(const SetPartition& big,
                           const std::vector<SetPartition>& pis,
                           const std::vector<SetPartition>& small);

// Every partition coarser than or equal to base, exactly once.
void enumerate_coarsenings(const SetPartition& base,
                           const std::function<void(const SetPartition&)>& fn);
std::vector<SetPartition> all_coarsenings(const SetPartition& base);

// Leading-order coefficient f[s,t]: full partition-family sum with the
// connectivity and tree constraints. Never zero; sign is
// (-1)^(nD - sum_c |Pi(nu_c)|) with nu_c = s_c t_c^-1.
ExactRational leading_weingarten_general(const PermTuple& s, const PermTuple& t);
// Same value through the fast paths: 1 for transitive pairs with s = t,
// product of cycle Moebius weights for transitive pairs, general sum
// otherwise.
ExactRational leading_weingarten(const PermTuple& s, const PermTuple& t);

// Finite-N Weingarten function of the unitary group U(N), exact. Solved
// from the class-reduced Gram system G w = e_id with G[s,t] = N^{#(st^-1)}.
// Requires N >= n; n capped (default 6). Results are memoised per (n, N);
// set THCIZ_WG_CACHE_DIR to also cache tables on disk.
ExactRational exact_weingarten(const Permutation& p, long N);

// Connected (cumulant-level) Weingarten of a pair of tuples:
// sum over partitions rho >= Pi(s,t) of (-1)^(|rho|-1) (|rho|-1)! times the
// product over blocks of prod_c Wg_N restricted to the block.
ExactRational connected_weingarten(const PermTuple& s, const PermTuple& t, long N);

// N^(2nD - s(s,t)) * connected_weingarten: converges to f[s,t] as N grows.
ExactRational rescaled_connected_weingarten(const PermTuple& s,
                                            const PermTuple& t, long N);

// Two-point extrapolation assuming value(N) = limit + c/N^2.
double richardson_extrapolate(double value1, long n1, double value2, long n2);

// Ready-made invariant tables.
// 1 on the identity tuple, 0 elsewhere.
ExactInvariant delta_invariant();
// Tr_s(identity operator) = N^(sum_c #(s_c)).
ExactInvariant identity_operator_invariant(long N);

// n-th moment of Tr(A U B U*) under the product Haar measure, exact:
// sum over (s, t) in S_n^D x S_n^D of trA(s) trB(t^-1) prod_c Wg_N(s_c t_c^-1).
ExactRational exact_moment(const ExactInvariant& trA, const ExactInvariant& trB,
                           int n, long N, int D);
// Moments for n = 1..n_max.
std::vector<ExactRational> exact_moments(const ExactInvariant& trA,
                                         const ExactInvariant& trB, int n_max,
                                         long N, int D);
// Standard moment-to-cumulant recursion; input moments[k-1] = M_k.
std::vector<ExactRational> cumulants_from_moments(
    const std::vector<ExactRational>& moments);

}  // namespace thciz
