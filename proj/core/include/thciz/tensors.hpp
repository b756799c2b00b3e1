#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "thciz/perm.hpp"

namespace thciz {

using Complex = std::complex<double>;

// Largest N^D for dense operators; keeps every operation desk-scale.
inline constexpr std::int64_t kMaxOperatorSide = 4096;

// Dense operator on (C^N)^{tensor D}, row-major, colour 0 most significant
// within each of the row and column multi-indices.
class DenseOperator {
 public:
  DenseOperator(int N, int D);
  static DenseOperator identity(int N, int D);

  int local_dim() const { return n_; }
  int factors() const { return d_; }
  std::int64_t side() const { return side_; }

  Complex& at(std::int64_t row, std::int64_t col) {
    return data_[row * side_ + col];
  }
  const Complex& at(std::int64_t row, std::int64_t col) const {
    return data_[row * side_ + col];
  }
  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  Complex trace() const;
  double hermiticity_defect() const;  // max |entry - conj(mirror)|
  double min_eigenvalue() const;      // of the hermitized matrix
  bool is_hermitian(double tol = 1e-10) const;
  bool is_positive(double tol = 1e-10) const;
  bool is_unit_trace(double tol = 1e-10) const;

 private:
  int n_ = 0;
  int d_ = 0;
  std::int64_t side_ = 0;
  std::vector<Complex> data_;
};

enum class StateKind {
  PureSeparable,
  ProductRank,
  MaximallyMixed,
  OneUniform,
  Interpolation,
  SeparableMixture,
};

std::string state_kind_name(StateKind kind);
StateKind parse_state_kind(const std::string& name);

// One local N x N density factor: a flat projector of the given rank placed
// at the given basis offset (wrapping), divided by the rank; rotate_seed != 0
// conjugates it by a deterministic pseudo-random unitary.
struct FactorSpec {
  int rank = 1;
  int offset = 0;
  std::uint64_t rotate_seed = 0;
};

struct MixtureComponent {
  double weight = 1.0;
  std::vector<FactorSpec> factors;  // one per colour
};

// dims by kind: product_rank takes one rank (all colours) or D ranks;
// interpolation takes {d1, ds, de} with d1 * ds * de^{D-1} = N;
// one_uniform needs N = m^{D-1}; the rest take no dims.
struct StateSpec {
  StateKind kind = StateKind::MaximallyMixed;
  std::vector<int> dims;
  std::vector<MixtureComponent> mixture;
};

StateSpec parse_state_spec_json(const std::string& text);
std::string state_spec_json(const StateSpec& spec);

// Contraction of n copies of A along the cycles of s: entry (j; i) of copy
// k has i^c_k matched to j^c of copy s_c(k). Copies are eliminated one at a
// time in an order chosen to keep the open-index frontier small; identity
// and single-cycle tuples contract at O(n * N^{2D}), while tuples whose
// colours interleave badly can need a larger frontier and throw CapExceeded
// past an internal memory bound.
Complex evaluate_trace_invariant(const DenseOperator& A, const PermTuple& s);

DenseOperator build_state(const StateSpec& spec, int N, int D);

// True when the spec describes a rank-one state, in which case
// build_pure_vector returns its wavefunction (length N^D).
bool is_pure_kind(const StateSpec& spec);
std::vector<Complex> build_pure_vector(const StateSpec& spec, int N, int D);

// Closed-form invariant values for the structured kinds, with no dense
// assembly; the oracle for evaluate_trace_invariant.
Complex exact_state_invariant(const StateSpec& spec, const PermTuple& s,
                              int N);

struct MixtureInvariant {
  Complex value = 0.0;     // full multilinear expansion
  Complex diagonal = 0.0;  // equal-component terms only
};

// Multilinear expansion of the invariant of a K-component separable mixture
// over component assignments; capped at K^n <= 1e6.
MixtureInvariant separable_mixture_invariant(const StateSpec& spec,
                                             const PermTuple& s, int N);

struct FitSample {
  int N = 0;
  PermTuple tuple;
  Complex value = 0.0;
};

struct FitResult {
  double beta_hat = 0.0;
  double eps_hat = 0.0;
  double residual = 0.0;
  std::array<std::array<double, 2>, 2> covariance = {{{0.0, 0.0}, {0.0, 0.0}}};
};

// Least squares of log|value| against
//   [sum_c (#(t_c) - n)] * log N * beta + [sum_{c1<c2} (#(t_c1 t_c2^-1) - n)]
//   * log N * eps + one intercept per distinct tuple.
// Needs >= 2 distinct N, a full-rank design, and positive magnitudes.
FitResult fit_scaling(const std::vector<FitSample>& samples);

// Binary operator file: magic "THCIZ1", then N, D, flags as little-endian
// uint32, then side^2 row-major entries as little-endian complex64
// (float32 real, float32 imaginary).
void write_operator(const std::string& path, const DenseOperator& op,
                    std::uint32_t flags = 0);
DenseOperator read_operator(const std::string& path);

}  // namespace thciz
