#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "thciz/regimes.hpp"
#include "thciz/tensors.hpp"

namespace thciz {

// D independent N x N unitaries, each stored row-major.
struct HaarTuple {
  int N = 0;
  std::vector<std::vector<Complex>> factors;
};

// Counter-based draw: the result depends only on (N, D, seed, sample_index),
// never on thread count or call order. Complex Ginibre matrix, then QR with
// the phases of the R diagonal folded back into Q, which makes the
// distribution exactly Haar.
HaarTuple haar_tuple(int N, int D, std::uint64_t seed,
                     std::uint64_t sample_index);

// max over factors of the largest entry of |U^* U - I|.
double unitarity_defect(const HaarTuple& u);

// Tr(A (U_1 x ... x U_D) B (U_1 x ... x U_D)^*) for dense operators.
// Mode-wise conjugation of B, O(D N^{2D+1}) time and two side^2 scratch
// buffers.
Complex sample_overlap(const DenseOperator& a, const DenseOperator& b,
                       const HaarTuple& u);

// Rank-one case A = |a><a|, B = |b><b| (vectors of length N^D):
// |<a|(U_1 x ... x U_D)|b>|^2, O(D N^{D+1}) time.
double sample_overlap(const std::vector<Complex>& a,
                      const std::vector<Complex>& b, const HaarTuple& u);

struct EstimationOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  int n_max = 4;         // cumulant orders 1..n_max, at most 6
  int blocks = 100;      // jackknife blocks
  int threads = 0;       // 0 = hardware concurrency
  double t_scale = 1.0;  // estimate cumulants of t_scale * Tr(AUBU*)
};

struct CumulantEstimate {
  std::uint64_t samples = 0;
  int blocks = 0;
  std::vector<double> k;   // k[i] = estimated cumulant of order i + 1
  std::vector<double> se;  // jackknife standard errors, same indexing
};

// Monte Carlo cumulants of t_scale * Tr(A U B U^*) over independent Haar
// factors. Orders 1..4 use unbiased k-statistics, orders 5 and 6 the
// central-moment polynomials. Standard errors are leave-one-block-out
// jackknife over contiguous sample blocks. Requires samples >= 10 * blocks.
// Identical options give identical output for any thread count. Overlaps
// must be real up to rounding (Hermitian inputs); a large imaginary part
// throws ValidationError.
CumulantEstimate estimate_cumulants(const DenseOperator& a,
                                    const DenseOperator& b,
                                    const EstimationOptions& opts);
CumulantEstimate estimate_cumulants(const std::vector<Complex>& a,
                                    const std::vector<Complex>& b, int N,
                                    int D, const EstimationOptions& opts);

struct ConvergenceRow {
  int N = 0;
  int n = 0;
  double gamma = 0.0;
  double delta = 0.0;
  double measured = 0.0;
  double se = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;  // measured / predicted, NaN when predicted == 0
};

// Measured versus predicted rescaled cumulants across sizes. States are
// density matrices (unit trace), while the regime exponents describe
// operators whose rescaled invariants stay O(1); the bridge is one factor
// N^{c_X} per side with c_X = beta * D + eps * D(D-1)/2, so each sample is
// scaled by t = N^{gamma + c_A + c_B} and the order-n cumulant divided by
// N^delta. `predicted` sums rescaled exact invariants against the leading
// coefficients; `measured` comes from estimate_cumulants with opts.t_scale
// ignored and opts.seed re-derived per size. Requires the ansatz in its
// family's stated alpha convention (alpha_adjustment = 0).
std::vector<ConvergenceRow> convergence_table(const StateSpec& a,
                                              const StateSpec& b, int D,
                                              Family family,
                                              const ScalingAnsatz& ansatz,
                                              const std::vector<int>& sizes,
                                              const EstimationOptions& opts);

// CSV columns: N,n,gamma,delta,measured,stderr,predicted,ratio.
void convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

// Two-sided Kolmogorov-Smirnov p-value of the sample against U(0, 1),
// asymptotic formula with the Stephens small-sample correction.
double ks_uniform_pvalue(std::vector<double> xs);

// Two-sample Kolmogorov-Smirnov p-value, same asymptotic tail with the
// effective size n*m/(n+m).
double ks_two_sample_pvalue(std::vector<double> xs, std::vector<double> ys);

}  // namespace thciz
