#include "thciz/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "thciz/errors.hpp"

namespace thciz {

namespace {

using RowMat =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::int64_t kMaxPureLength = std::int64_t(1) << 26;

// Philox 4x32, 10 rounds. One block of four 32-bit words per call.
std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> x,
                                      std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * x[0];
    const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * x[2];
    x = {std::uint32_t(p1 >> 32) ^ x[1] ^ k0, std::uint32_t(p1),
         std::uint32_t(p0 >> 32) ^ x[3] ^ k1, std::uint32_t(p0)};
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return x;
}

// Standard complex Gaussian from one Philox block, polar form.
Complex gaussian_from_words(const std::array<std::uint32_t, 4>& w) {
  const std::uint64_t hi = (std::uint64_t(w[0]) << 32) | w[1];
  const std::uint64_t lo = (std::uint64_t(w[2]) << 32) | w[3];
  const double u1 = (double(hi >> 11) + 1.0) * 0x1p-53;  // (0, 1]
  const double u2 = double(lo >> 11) * 0x1p-53;          // [0, 1)
  const double r = std::sqrt(-std::log(u1));
  const double th = 2.0 * M_PI * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

std::int64_t tensor_side(int N, int D) {
  if (N < 1 || N > kMaxOperatorSide) {
    throw ValidationError("local dimension out of range");
  }
  if (D < 1 || D > 24) throw ValidationError("colour count out of range");
  std::int64_t side = 1;
  for (int c = 0; c < D; ++c) {
    if (side > kMaxPureLength / N) throw CapExceeded("tensor too large");
    side *= N;
  }
  return side;
}

}  // namespace

HaarTuple haar_tuple(int N, int D, std::uint64_t seed,
                     std::uint64_t sample_index) {
  if (N < 1 || N > kMaxOperatorSide) {
    throw ValidationError("local dimension out of range");
  }
  if (D < 1 || D > 24) throw ValidationError("colour count out of range");
  const std::uint32_t k0 = std::uint32_t(seed);
  const std::uint32_t k1 = std::uint32_t(seed >> 32);
  HaarTuple out;
  out.N = N;
  out.factors.resize(D);
  Eigen::MatrixXcd g(N, N);
  for (int c = 0; c < D; ++c) {
    for (int r = 0; r < N; ++r) {
      for (int col = 0; col < N; ++col) {
        const auto words =
            philox10({std::uint32_t(r * N + col), std::uint32_t(c),
                      std::uint32_t(sample_index),
                      std::uint32_t(sample_index >> 32)},
                     k0, k1);
        g(r, col) = gaussian_from_words(words);
      }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd& packed = qr.matrixQR();
    for (int j = 0; j < N; ++j) {
      const Complex d = packed(j, j);
      const double m = std::abs(d);
      q.col(j) *= (m > 0.0) ? d / m : Complex(1.0, 0.0);
    }
    auto& f = out.factors[c];
    f.resize(std::size_t(N) * N);
    Eigen::Map<RowMat>(f.data(), N, N) = q;
  }
  return out;
}

double unitarity_defect(const HaarTuple& u) {
  const int N = u.N;
  double worst = 0.0;
  for (const auto& f : u.factors) {
    if (std::int64_t(f.size()) != std::int64_t(N) * N) {
      throw ValidationError("factor size does not match N");
    }
    Eigen::Map<const RowMat> m(f.data(), N, N);
    const Eigen::MatrixXcd d =
        m.adjoint() * m - Eigen::MatrixXcd::Identity(N, N);
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
  }
  return worst;
}

Complex sample_overlap(const DenseOperator& a, const DenseOperator& b,
                       const HaarTuple& u) {
  const int N = a.local_dim();
  const int D = a.factors();
  if (b.local_dim() != N || b.factors() != D || u.N != N ||
      int(u.factors.size()) != D) {
    throw ValidationError("operator and unitary shapes differ");
  }
  const std::int64_t side = a.side();
  std::vector<Complex> cur = b.data();
  std::vector<Complex> nxt(cur.size());

  // Rows: multiply by U_1 x ... x U_D, one mode at a time.
  std::int64_t pre = 1;
  std::int64_t post = side / N;
  for (int c = 0; c < D; ++c) {
    Eigen::Map<const RowMat> uc(u.factors[c].data(), N, N);
    for (std::int64_t p = 0; p < pre; ++p) {
      for (std::int64_t q = 0; q < post; ++q) {
        const std::int64_t base = (p * N * post + q) * side;
        Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> src(
            cur.data() + base, N, side, Eigen::OuterStride<>(post * side));
        Eigen::Map<RowMat, 0, Eigen::OuterStride<>> dst(
            nxt.data() + base, N, side, Eigen::OuterStride<>(post * side));
        dst.noalias() = uc * src;
      }
    }
    cur.swap(nxt);
    pre *= N;
    post /= N;
  }

  // Columns: multiply by the adjoint, one mode at a time.
  pre = 1;
  post = side / N;
  for (int c = 0; c < D; ++c) {
    Eigen::Map<const RowMat> uc(u.factors[c].data(), N, N);
    for (std::int64_t p = 0; p < pre; ++p) {
      for (std::int64_t q = 0; q < post; ++q) {
        const std::int64_t base = p * N * post + q;
        Eigen::Map<const Eigen::MatrixXcd, 0,
                   Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>
            src(cur.data() + base, side, N,
                Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(post, side));
        Eigen::Map<Eigen::MatrixXcd, 0,
                   Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>
            dst(nxt.data() + base, side, N,
                Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(post, side));
        dst.noalias() = src * uc.adjoint();
      }
    }
    cur.swap(nxt);
    pre *= N;
    post /= N;
  }

  Eigen::Map<const RowMat> am(a.data().data(), side, side);
  Eigen::Map<const RowMat> cm(cur.data(), side, side);
  return (am.transpose().cwiseProduct(cm)).sum();
}

double sample_overlap(const std::vector<Complex>& a,
                      const std::vector<Complex>& b, const HaarTuple& u) {
  const int N = u.N;
  const int D = int(u.factors.size());
  const std::int64_t side = tensor_side(N, D);
  if (std::int64_t(a.size()) != side || std::int64_t(b.size()) != side) {
    throw ValidationError("vector length does not match N^D");
  }
  std::vector<Complex> cur = b;
  std::vector<Complex> nxt(cur.size());
  std::int64_t pre = 1;
  std::int64_t post = side / N;
  for (int c = 0; c < D; ++c) {
    Eigen::Map<const RowMat> uc(u.factors[c].data(), N, N);
    for (std::int64_t p = 0; p < pre; ++p) {
      for (std::int64_t q = 0; q < post; ++q) {
        const std::int64_t base = p * N * post + q;
        Eigen::Map<const Eigen::VectorXcd, 0, Eigen::InnerStride<>> src(
            cur.data() + base, N, Eigen::InnerStride<>(post));
        Eigen::Map<Eigen::VectorXcd, 0, Eigen::InnerStride<>> dst(
            nxt.data() + base, N, Eigen::InnerStride<>(post));
        dst.noalias() = uc * src;
      }
    }
    cur.swap(nxt);
    pre *= N;
    post /= N;
  }
  Complex ip = 0.0;
  for (std::int64_t k = 0; k < side; ++k) ip += std::conj(a[k]) * cur[k];
  return std::norm(ip);
}

namespace {

// Cumulants of t * (Z + center) from raw power sums of Z. Orders 1..4 are
// the unbiased k-statistics; 5 and 6 come from central moments.
std::vector<double> cumulants_from_power_sums(const std::array<double, 7>& s,
                                              double n, int n_max,
                                              double center, double t) {
  const long double nn = n;
  const long double s1 = s[1], s2 = s[2], s3 = s[3];
  const long double s4 = s[4], s5 = s[5], s6 = s[6];
  std::vector<double> k(n_max, 0.0);
  long double tp = t;
  k[0] = double((s1 / nn + center) * tp);
  if (n_max >= 2) {
    tp *= t;
    k[1] = double((nn * s2 - s1 * s1) / (nn * (nn - 1)) * tp);
  }
  if (n_max >= 3) {
    tp *= t;
    k[2] = double((2 * s1 * s1 * s1 - 3 * nn * s1 * s2 + nn * nn * s3) /
                  (nn * (nn - 1) * (nn - 2)) * tp);
  }
  if (n_max >= 4) {
    tp *= t;
    const long double num = -6 * s1 * s1 * s1 * s1 +
                            12 * nn * s1 * s1 * s2 -
                            3 * nn * (nn - 1) * s2 * s2 -
                            4 * nn * (nn + 1) * s1 * s3 +
                            nn * nn * (nn + 1) * s4;
    k[3] = double(num / (nn * (nn - 1) * (nn - 2) * (nn - 3)) * tp);
  }
  if (n_max >= 5) {
    const long double mu = s1 / nn;
    const long double m2 = s2 / nn - mu * mu;
    const long double m3 = s3 / nn - 3 * mu * s2 / nn + 2 * mu * mu * mu;
    const long double m4 = s4 / nn - 4 * mu * s3 / nn +
                           6 * mu * mu * s2 / nn - 3 * mu * mu * mu * mu;
    const long double m5 = s5 / nn - 5 * mu * s4 / nn +
                           10 * mu * mu * s3 / nn -
                           10 * mu * mu * mu * s2 / nn +
                           4 * mu * mu * mu * mu * mu;
    tp *= t;
    k[4] = double((m5 - 10 * m3 * m2) * tp);
    if (n_max >= 6) {
      const long double m6 = s6 / nn - 6 * mu * s5 / nn +
                             15 * mu * mu * s4 / nn -
                             20 * mu * mu * mu * s3 / nn +
                             15 * mu * mu * mu * mu * s2 / nn -
                             5 * mu * mu * mu * mu * mu * mu;
      tp *= t;
      k[5] = double((m6 - 15 * m4 * m2 - 10 * m3 * m3 + 30 * m2 * m2 * m2) *
                    tp);
    }
  }
  return k;
}

CumulantEstimate run_estimate(const EstimationOptions& o,
                              const std::function<double(std::uint64_t)>& f) {
  if (o.n_max < 1 || o.n_max > 6) {
    throw ValidationError("cumulant order must be between 1 and 6");
  }
  if (o.blocks < 2) throw ValidationError("need at least 2 jackknife blocks");
  if (o.samples < std::uint64_t(10) * std::uint64_t(o.blocks)) {
    throw ValidationError("need at least 10 samples per jackknife block");
  }
  const int nblocks = o.blocks;
  const std::uint64_t total = o.samples;
  std::vector<std::uint64_t> start(std::size_t(nblocks) + 1, 0);
  {
    const std::uint64_t m = total / std::uint64_t(nblocks);
    const std::uint64_t r = total % std::uint64_t(nblocks);
    std::uint64_t acc = 0;
    for (int b = 0; b < nblocks; ++b) {
      start[std::size_t(b)] = acc;
      acc += m + (std::uint64_t(b) < r ? 1 : 0);
    }
    start[std::size_t(nblocks)] = acc;
  }

  // Fixed shift from a short pre-pass; it cancels rounding error in the
  // centered power sums and drops out of every cumulant but the mean.
  const std::uint64_t probe = std::min<std::uint64_t>(1000, total);
  double center = 0.0;
  for (std::uint64_t i = 0; i < probe; ++i) center += f(i);
  center /= double(probe);

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int threads = o.threads > 0 ? o.threads : int(hw);
  threads = std::max(1, std::min(threads, nblocks));

  std::vector<std::array<double, 7>> block_sums(
      std::size_t(nblocks), std::array<double, 7>{});
  std::vector<std::exception_ptr> errors;
  errors.resize(std::size_t(threads));
  auto work = [&](int tid) {
    for (int b = tid; b < nblocks; b += threads) {
      auto& s = block_sums[std::size_t(b)];
      for (std::uint64_t i = start[std::size_t(b)];
           i < start[std::size_t(b) + 1]; ++i) {
        const double z = f(i) - center;
        double zp = z;
        for (int p = 1; p <= 6; ++p) {
          s[std::size_t(p)] += zp;
          zp *= z;
        }
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t);
        } catch (...) {
          errors[std::size_t(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::array<double, 7> sums{};
  for (const auto& s : block_sums) {
    for (int p = 1; p <= 6; ++p) sums[std::size_t(p)] += s[std::size_t(p)];
  }

  CumulantEstimate out;
  out.samples = total;
  out.blocks = nblocks;
  out.k = cumulants_from_power_sums(sums, double(total), o.n_max, center,
                                    o.t_scale);

  std::vector<std::vector<double>> theta;
  theta.resize(std::size_t(nblocks));
  for (int b = 0; b < nblocks; ++b) {
    std::array<double, 7> rest{};
    for (int p = 1; p <= 6; ++p) {
      rest[std::size_t(p)] =
          sums[std::size_t(p)] - block_sums[std::size_t(b)][std::size_t(p)];
    }
    const double nb =
        double(total - (start[std::size_t(b) + 1] - start[std::size_t(b)]));
    theta[std::size_t(b)] =
        cumulants_from_power_sums(rest, nb, o.n_max, center, o.t_scale);
  }
  out.se.assign(std::size_t(o.n_max), 0.0);
  for (int ord = 0; ord < o.n_max; ++ord) {
    double mean = 0.0;
    for (int b = 0; b < nblocks; ++b) {
      mean += theta[std::size_t(b)][std::size_t(ord)];
    }
    mean /= nblocks;
    double var = 0.0;
    for (int b = 0; b < nblocks; ++b) {
      const double d = theta[std::size_t(b)][std::size_t(ord)] - mean;
      var += d * d;
    }
    out.se[std::size_t(ord)] =
        std::sqrt(double(nblocks - 1) / double(nblocks) * var);
  }
  return out;
}

}  // namespace

CumulantEstimate estimate_cumulants(const DenseOperator& a,
                                    const DenseOperator& b,
                                    const EstimationOptions& opts) {
  const int N = a.local_dim();
  const int D = a.factors();
  if (b.local_dim() != N || b.factors() != D) {
    throw ValidationError("operator shapes differ");
  }
  const double imag_tol = 1e-9 * std::pow(double(N), D);
  auto f = [&, N, D](std::uint64_t i) {
    const HaarTuple u = haar_tuple(N, D, opts.seed, i);
    const Complex v = sample_overlap(a, b, u);
    if (std::abs(v.imag()) > imag_tol) {
      throw ValidationError(
          "overlap has a large imaginary part; operators must be Hermitian");
    }
    return v.real();
  };
  return run_estimate(opts, f);
}

CumulantEstimate estimate_cumulants(const std::vector<Complex>& a,
                                    const std::vector<Complex>& b, int N,
                                    int D, const EstimationOptions& opts) {
  const std::int64_t side = tensor_side(N, D);
  if (std::int64_t(a.size()) != side || std::int64_t(b.size()) != side) {
    throw ValidationError("vector length does not match N^D");
  }
  auto f = [&, N, D](std::uint64_t i) {
    return sample_overlap(a, b, haar_tuple(N, D, opts.seed, i));
  };
  return run_estimate(opts, f);
}

namespace {

// Exact invariant of the density-matrix state, rescaled to the O(1)
// operator convention: one factor N^{c_side} per point, then the ansatz
// exponent removed.
Complex rescaled_invariant(const StateSpec& spec, const PermTuple& s, int N,
                           const SideAnsatz& side, double c_side) {
  SideAnsatz flat;
  flat.alpha = 0.0;
  flat.beta = side.beta;
  flat.eps = side.eps;
  const double expo =
      double(s.size()) * c_side - invariant_scaling_exponent(s, flat);
  return exact_state_invariant(spec, s, N) * std::pow(double(N), expo);
}

}  // namespace

std::vector<ConvergenceRow> convergence_table(const StateSpec& a,
                                              const StateSpec& b, int D,
                                              Family family,
                                              const ScalingAnsatz& ansatz,
                                              const std::vector<int>& sizes,
                                              const EstimationOptions& opts) {
  const RegimeReport report = classify(D, ansatz, family);
  if (std::abs(report.alpha_adjustment) > 1e-9) {
    throw ValidationError(
        "convergence table needs the family's stated alpha convention");
  }
  const double ca =
      ansatz.a.beta * D + ansatz.a.eps * double(D) * (D - 1) / 2.0;
  const double cb =
      ansatz.b.beta * D + ansatz.b.eps * double(D) * (D - 1) / 2.0;
  const bool pure = is_pure_kind(a) && is_pure_kind(b);
  std::vector<ConvergenceRow> rows;
  for (const int N : sizes) {
    EstimationOptions local = opts;
    local.seed = opts.seed ^ (0x9E3779B97F4A7C15ull * std::uint64_t(N));
    local.t_scale = std::pow(double(N), report.gamma + ca + cb);
    CumulantEstimate est;
    if (pure) {
      est = estimate_cumulants(build_pure_vector(a, N, D),
                               build_pure_vector(b, N, D), N, D, local);
    } else {
      est = estimate_cumulants(build_state(a, N, D), build_state(b, N, D),
                               local);
    }
    const double denom = std::pow(double(N), report.delta);
    for (int n = 1; n <= local.n_max; ++n) {
      InvariantTable ta;
      InvariantTable tb;
      enumerate_leading(D, n, report, [&](const LeadingGraph& g) {
        if (!ta.count(g.sigma)) {
          ta.emplace(g.sigma, rescaled_invariant(a, g.sigma, N, ansatz.a, ca));
        }
        const PermTuple ti = g.tau.inverse();
        if (!tb.count(ti)) {
          tb.emplace(ti, rescaled_invariant(b, ti, N, ansatz.b, cb));
        }
      });
      ConvergenceRow row;
      row.N = N;
      row.n = n;
      row.gamma = report.gamma;
      row.delta = report.delta;
      row.measured = est.k[std::size_t(n - 1)] / denom;
      row.se = est.se[std::size_t(n - 1)] / denom;
      row.predicted = asymptotic_cumulant(n, report, ta, tb).real();
      row.ratio = row.predicted != 0.0
                      ? row.measured / row.predicted
                      : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
  }
  return rows;
}

void convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "N,n,gamma,delta,measured,stderr,predicted,ratio\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  r.N, r.n, r.gamma, r.delta, r.measured, r.se, r.predicted,
                  r.ratio);
    os << buf;
  }
}

double ks_uniform_pvalue(std::vector<double> xs) {
  if (xs.empty()) throw ValidationError("empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = std::min(1.0, std::max(0.0, xs[i]));
    d = std::max(d, std::max(double(i + 1) / n - x, x - double(i) / n));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::min(1.0, std::max(0.0, p));
}

double ks_two_sample_pvalue(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw ValidationError("empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = double(xs.size());
  const double ny = double(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / nx - double(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace thciz
