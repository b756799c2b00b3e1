#include "thciz/tensors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "thciz/errors.hpp"

namespace thciz {

namespace {

constexpr std::int64_t kFrontierCap = std::int64_t(1) << 24;
constexpr int kContractionSlotCap = 8;
constexpr double kMixtureCap = 1e6;

std::int64_t ipow64(std::int64_t base, int exp) {
  std::int64_t v = 1;
  for (int k = 0; k < exp; ++k) v *= base;
  return v;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return (splitmix64(state) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

Eigen::MatrixXcd seeded_unitary(int N, std::uint64_t seed) {
  std::uint64_t state = seed;
  Eigen::MatrixXcd g(N, N);
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) {
      const double u1 = uniform01(state);
      const double u2 = uniform01(state);
      const double mag = std::sqrt(-std::log(u1));
      g(r, c) = Complex(mag * std::cos(2 * M_PI * u2),
                        mag * std::sin(2 * M_PI * u2));
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < N; ++c) {
    const Complex d = r(c, c);
    const double a = std::abs(d);
    q.col(c) *= (a > 0 ? d / a : Complex(1.0));
  }
  return q;
}

}  // namespace

DenseOperator::DenseOperator(int N, int D) : n_(N), d_(D) {
  if (N < 1 || D < 1) throw ValidationError("N and D must be positive");
  side_ = 1;
  for (int c = 0; c < D; ++c) {
    side_ *= N;
    if (side_ > kMaxOperatorSide) {
      throw CapExceeded("operator side N^D exceeds " +
                        std::to_string(kMaxOperatorSide));
    }
  }
  data_.assign(static_cast<size_t>(side_) * side_, Complex(0.0));
}

DenseOperator DenseOperator::identity(int N, int D) {
  DenseOperator op(N, D);
  for (std::int64_t k = 0; k < op.side_; ++k) op.at(k, k) = 1.0;
  return op;
}

Complex DenseOperator::trace() const {
  Complex t = 0.0;
  for (std::int64_t k = 0; k < side_; ++k) t += at(k, k);
  return t;
}

double DenseOperator::hermiticity_defect() const {
  double worst = 0.0;
  for (std::int64_t r = 0; r < side_; ++r) {
    for (std::int64_t c = r; c < side_; ++c) {
      worst = std::max(worst, std::abs(at(r, c) - std::conj(at(c, r))));
    }
  }
  return worst;
}

double DenseOperator::min_eigenvalue() const {
  const auto s = static_cast<Eigen::Index>(side_);
  Eigen::MatrixXcd h(s, s);
  for (Eigen::Index r = 0; r < s; ++r) {
    for (Eigen::Index c = 0; c < s; ++c) {
      h(r, c) = 0.5 * (at(r, c) + std::conj(at(c, r)));
    }
  }
  if (side_ <= 512) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }
  // Two-phase power iteration: spectral radius first, then the extreme
  // eigenvalue of (bound * I - H), whose dominant mode is H's smallest.
  auto dominant = [&](const Eigen::MatrixXcd& m) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(s, Complex(1.0));
    for (Eigen::Index k = 0; k < s; ++k) v(k) += Complex(0.0, 1e-3 * (k % 7));
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < 2000; ++it) {
      Eigen::VectorXcd w = m * v;
      const double norm = w.norm();
      if (norm == 0.0) return 0.0;
      v = w / norm;
      const double ray = (v.adjoint() * m * v)(0).real();
      if (it > 4 && std::abs(ray - prev) < 1e-12 * std::max(1.0, norm)) {
        return ray;
      }
      prev = ray;
    }
    return prev;
  };
  const double bound = h.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  const Eigen::MatrixXcd shifted =
      Eigen::MatrixXcd(bound * Eigen::MatrixXcd::Identity(s, s) - h);
  return bound - dominant(shifted);
}

bool DenseOperator::is_hermitian(double tol) const {
  return hermiticity_defect() <= tol;
}

bool DenseOperator::is_positive(double tol) const {
  return min_eigenvalue() >= -tol;
}

bool DenseOperator::is_unit_trace(double tol) const {
  return std::abs(trace() - Complex(1.0)) <= tol;
}

std::string state_kind_name(StateKind kind) {
  switch (kind) {
    case StateKind::PureSeparable:
      return "pure-separable";
    case StateKind::ProductRank:
      return "product-rank";
    case StateKind::MaximallyMixed:
      return "max-mixed";
    case StateKind::OneUniform:
      return "one-uniform";
    case StateKind::Interpolation:
      return "interpolation";
    case StateKind::SeparableMixture:
      return "separable-mixture";
  }
  throw ValidationError("unknown state kind");
}

StateKind parse_state_kind(const std::string& name) {
  std::string k = name;
  std::replace(k.begin(), k.end(), '_', '-');
  if (k == "pure-separable") return StateKind::PureSeparable;
  if (k == "product-rank") return StateKind::ProductRank;
  if (k == "max-mixed" || k == "maximally-mixed") {
    return StateKind::MaximallyMixed;
  }
  if (k == "one-uniform") return StateKind::OneUniform;
  if (k == "interpolation") return StateKind::Interpolation;
  if (k == "separable-mixture") return StateKind::SeparableMixture;
  throw ValidationError("unknown state kind: " + name);
}

StateSpec parse_state_spec_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad state spec JSON: ") + e.what());
  }
  try {
    StateSpec spec;
    spec.kind = parse_state_kind(j.at("kind").get<std::string>());
    if (j.contains("dims")) spec.dims = j["dims"].get<std::vector<int>>();
    if (j.contains("mixture")) {
      for (const auto& comp : j["mixture"]) {
        MixtureComponent mc;
        mc.weight = comp.at("weight").get<double>();
        for (const auto& f : comp.at("factors")) {
          FactorSpec fs;
          fs.rank = f.value("rank", 1);
          fs.offset = f.value("offset", 0);
          fs.rotate_seed = f.value("rotate_seed", std::uint64_t(0));
          mc.factors.push_back(fs);
        }
        spec.mixture.push_back(std::move(mc));
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad state spec JSON: ") + e.what());
  }
}

std::string state_spec_json(const StateSpec& spec) {
  nlohmann::json j;
  j["kind"] = state_kind_name(spec.kind);
  if (!spec.dims.empty()) j["dims"] = spec.dims;
  if (!spec.mixture.empty()) {
    nlohmann::json mix = nlohmann::json::array();
    for (const auto& comp : spec.mixture) {
      nlohmann::json factors = nlohmann::json::array();
      for (const auto& f : comp.factors) {
        factors.push_back({{"rank", f.rank},
                           {"offset", f.offset},
                           {"rotate_seed", f.rotate_seed}});
      }
      mix.push_back({{"weight", comp.weight}, {"factors", factors}});
    }
    j["mixture"] = mix;
  }
  return j.dump();
}

Complex evaluate_trace_invariant(const DenseOperator& A, const PermTuple& s) {
  const int D = A.factors();
  const int N = A.local_dim();
  if (s.colors() != D) throw ValidationError("tuple colours do not match D");
  const int n = s.size();
  if (n > kContractionSlotCap) {
    throw CapExceeded("invariant contraction capped at n = " +
                      std::to_string(kContractionSlotCap));
  }

  // Index variable (c, k) is the contracted value shared by copy k (as its
  // column index in colour c) and copy s_c(k) (as its row index there).
  std::vector<std::vector<int>> succ(D, std::vector<int>(n));
  std::vector<std::vector<int>> pred(D, std::vector<int>(n));
  for (int c = 0; c < D; ++c) {
    for (int k = 1; k <= n; ++k) {
      succ[c][k - 1] = s[c](k) - 1;
      pred[c][s[c](k) - 1] = k - 1;
    }
  }

  // Pick the elimination order with the smallest worst-step variable count.
  std::vector<int> best_order(n);
  std::iota(best_order.begin(), best_order.end(), 0);
  int best_width = n * D + 1;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  do {
    std::vector<int> position(n);
    for (int p = 0; p < n; ++p) position[order[p]] = p;
    int width = 0;
    for (int p = 0; p < n; ++p) {
      int active = 0;
      for (int c = 0; c < D; ++c) {
        for (int k = 0; k < n; ++k) {
          const int lo = std::min(position[k], position[succ[c][k]]);
          const int hi = std::max(position[k], position[succ[c][k]]);
          if (lo <= p && p <= hi) ++active;
        }
      }
      width = std::max(width, active);
    }
    if (width < best_width) {
      best_width = width;
      best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  double frontier = 1.0;
  for (int k = 0; k < best_width; ++k) frontier *= N;
  if (frontier > static_cast<double>(kFrontierCap)) {
    throw CapExceeded("contraction frontier exceeds the memory bound");
  }

  std::vector<int> position(n);
  for (int p = 0; p < n; ++p) position[best_order[p]] = p;

  auto var_id = [&](int c, int k) { return c * n + k; };
  std::vector<Complex> tensor = {Complex(1.0)};
  std::vector<int> open;  // variable ids, first is most significant

  for (int p = 0; p < n; ++p) {
    const int slot = best_order[p];
    std::vector<int> involved;  // this copy's row and column variables
    for (int c = 0; c < D; ++c) {
      involved.push_back(var_id(c, slot));
      involved.push_back(var_id(c, pred[c][slot]));
    }
    std::sort(involved.begin(), involved.end());
    involved.erase(std::unique(involved.begin(), involved.end()),
                   involved.end());

    std::vector<int> all = open;
    for (int v : involved) {
      if (std::find(open.begin(), open.end(), v) == open.end()) {
        all.push_back(v);
      }
    }
    auto still_open = [&](int v) {
      const int c = v / n;
      const int k = v % n;
      const int other = succ[c][k];
      const int last = std::max(position[k], position[other]);
      return last > p;
    };
    std::vector<int> next_open;
    for (int v : all) {
      if (still_open(v)) next_open.push_back(v);
    }

    std::int64_t total = 1;
    for (size_t i = 0; i < all.size(); ++i) total *= N;
    std::int64_t next_size = 1;
    for (size_t i = 0; i < next_open.size(); ++i) next_size *= N;
    if (total > kFrontierCap) {
      throw CapExceeded("contraction frontier exceeds the memory bound");
    }

    std::vector<int> value_of(static_cast<size_t>(n) * D, 0);
    std::vector<Complex> next(static_cast<size_t>(next_size), Complex(0.0));
    for (std::int64_t idx = 0; idx < total; ++idx) {
      std::int64_t rem = idx;
      for (size_t i = all.size(); i-- > 0;) {
        value_of[all[i]] = static_cast<int>(rem % N);
        rem /= N;
      }
      std::int64_t old_idx = 0;
      for (int v : open) old_idx = old_idx * N + value_of[v];
      std::int64_t row = 0, col = 0;
      for (int c = 0; c < D; ++c) {
        row = row * N + value_of[var_id(c, pred[c][slot])];
        col = col * N + value_of[var_id(c, slot)];
      }
      std::int64_t new_idx = 0;
      for (int v : next_open) new_idx = new_idx * N + value_of[v];
      next[new_idx] += tensor[old_idx] * A.at(row, col);
    }
    tensor = std::move(next);
    open = std::move(next_open);
  }
  return tensor[0];
}

namespace {

struct PartyLayout {
  int d1 = 1, ds = 1, de = 1;
  int D = 1;
  // Decoded digits for each local index: u, v, then D-1 digits base de,
  // digit t belonging to the t-th other colour in increasing order.
  std::vector<int> u, v;
  std::vector<std::vector<int>> w;
};

PartyLayout decode_layout(int N, int D, int d1, int ds, int de) {
  PartyLayout lay;
  lay.d1 = d1;
  lay.ds = ds;
  lay.de = de;
  lay.D = D;
  const int wspan = static_cast<int>(ipow64(de, D - 1));
  if (static_cast<std::int64_t>(d1) * ds * wspan != N) {
    throw ValidationError("sub-dimensions do not factor N");
  }
  lay.u.resize(N);
  lay.v.resize(N);
  lay.w.assign(N, std::vector<int>(D - 1, 0));
  for (int i = 0; i < N; ++i) {
    lay.u[i] = i / (ds * wspan);
    const int rem = i % (ds * wspan);
    lay.v[i] = rem / wspan;
    int wrem = rem % wspan;
    for (int t = D - 2; t >= 0; --t) {
      lay.w[i][t] = wrem % de;
      wrem /= de;
    }
  }
  return lay;
}

// Nonzero support of the delta-pattern wavefunction: each unordered colour
// pair carries one free digit, mirrored into both parties' slots.
std::vector<std::int64_t> pattern_support(int N, int D,
                                          const PartyLayout& lay) {
  const int de = lay.de;
  const int pairs = D * (D - 1) / 2;
  std::vector<std::pair<int, int>> pair_list;
  for (int c1 = 0; c1 < D; ++c1) {
    for (int c2 = c1 + 1; c2 < D; ++c2) pair_list.push_back({c1, c2});
  }
  // Digit slot of colour c for partner c2: index of c2 among the others.
  auto digit_slot = [&](int c, int partner) {
    int t = 0;
    for (int o = 0; o < D; ++o) {
      if (o == c) continue;
      if (o == partner) return t;
      ++t;
    }
    throw ValidationError("partner colour out of range");
  };
  const std::int64_t count = ipow64(de, pairs);
  std::vector<std::int64_t> support;
  support.reserve(static_cast<size_t>(count));
  std::vector<int> digits(pairs, 0);
  for (std::int64_t z = 0; z < count; ++z) {
    std::int64_t rem = z;
    for (int t = pairs - 1; t >= 0; --t) {
      digits[t] = static_cast<int>(rem % de);
      rem /= de;
    }
    std::vector<std::vector<int>> wdig(D, std::vector<int>(D - 1, 0));
    for (int t = 0; t < pairs; ++t) {
      const auto [c1, c2] = pair_list[t];
      wdig[c1][digit_slot(c1, c2)] = digits[t];
      wdig[c2][digit_slot(c2, c1)] = digits[t];
    }
    std::int64_t flat = 0;
    for (int c = 0; c < D; ++c) {
      int widx = 0;
      for (int t = 0; t < D - 1; ++t) widx = widx * de + wdig[c][t];
      // u = 0, v = 0 within each party.
      flat = flat * N + widx;
    }
    support.push_back(flat);
  }
  return support;
}

void validate_mixture(const StateSpec& spec, int N, int D) {
  if (spec.mixture.empty()) {
    throw ValidationError("separable mixture needs at least one component");
  }
  double total = 0.0;
  for (const auto& comp : spec.mixture) {
    if (!(comp.weight > 0.0)) {
      throw ValidationError("mixture weights must be positive");
    }
    if (static_cast<int>(comp.factors.size()) != D) {
      throw ValidationError("each mixture component needs D factors");
    }
    for (const auto& f : comp.factors) {
      if (f.rank < 1 || f.rank > N) {
        throw ValidationError("factor rank out of range");
      }
      if (f.offset < 0 || f.offset >= N) {
        throw ValidationError("factor offset out of range");
      }
    }
    total += comp.weight;
  }
  if (total <= 0.0) throw ValidationError("mixture weights must be positive");
}

Eigen::MatrixXcd factor_matrix(const FactorSpec& f, int N) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
  for (int k = 0; k < f.rank; ++k) {
    const int i = (f.offset + k) % N;
    m(i, i) = 1.0 / f.rank;
  }
  if (f.rotate_seed != 0) {
    const Eigen::MatrixXcd q = seeded_unitary(N, f.rotate_seed);
    m = q * m * q.adjoint();
  }
  return m;
}

int one_uniform_base(int N, int D) {
  if (D < 2) throw ValidationError("one-uniform states need D >= 2");
  for (int m = 1; m <= N; ++m) {
    if (ipow64(m, D - 1) == N) return m;
  }
  throw ValidationError("one-uniform state needs N = m^(D-1)");
}

void interpolation_dims(const StateSpec& spec, int N, int D, int& d1, int& ds,
                        int& de) {
  if (spec.dims.size() != 3) {
    throw ValidationError("interpolation takes dims {d1, ds, de}");
  }
  d1 = spec.dims[0];
  ds = spec.dims[1];
  de = spec.dims[2];
  if (d1 < 1 || ds < 1 || de < 1) {
    throw ValidationError("sub-dimensions must be positive");
  }
  if (static_cast<std::int64_t>(d1) * ds * ipow64(de, D - 1) != N) {
    throw ValidationError("sub-dimensions do not factor N");
  }
  if (de > 1 && D < 2) {
    throw ValidationError("entangled sub-dimension needs D >= 2");
  }
}

std::vector<int> product_ranks(const StateSpec& spec, int N, int D) {
  std::vector<int> ranks;
  if (spec.dims.size() == 1) {
    ranks.assign(D, spec.dims[0]);
  } else if (static_cast<int>(spec.dims.size()) == D) {
    ranks = spec.dims;
  } else {
    throw ValidationError("product-rank takes one rank or D ranks");
  }
  for (int r : ranks) {
    if (r < 1 || r > N) throw ValidationError("rank out of range");
  }
  return ranks;
}

}  // namespace

bool is_pure_kind(const StateSpec& spec) {
  switch (spec.kind) {
    case StateKind::PureSeparable:
    case StateKind::OneUniform:
      return true;
    case StateKind::ProductRank:
      return std::all_of(spec.dims.begin(), spec.dims.end(),
                         [](int r) { return r == 1; });
    case StateKind::Interpolation:
      return spec.dims.size() == 3 && spec.dims[1] == 1;
    default:
      return false;
  }
}

std::vector<Complex> build_pure_vector(const StateSpec& spec, int N, int D) {
  if (N < 1 || D < 1) throw ValidationError("N and D must be positive");
  const std::int64_t side = ipow64(N, D);
  if (side > kMaxOperatorSide) {
    throw CapExceeded("state side exceeds the dense cap");
  }
  std::vector<Complex> psi(static_cast<size_t>(side), Complex(0.0));
  switch (spec.kind) {
    case StateKind::PureSeparable:
      psi[0] = 1.0;
      return psi;
    case StateKind::ProductRank:
      for (int r : product_ranks(spec, N, D)) {
        if (r != 1) throw ValidationError("state is not pure");
      }
      psi[0] = 1.0;
      return psi;
    case StateKind::OneUniform: {
      const int m = one_uniform_base(N, D);
      const auto lay = decode_layout(N, D, 1, 1, m);
      const auto support = pattern_support(N, D, lay);
      const double amp = 1.0 / std::sqrt(static_cast<double>(support.size()));
      for (std::int64_t flat : support) psi[flat] = amp;
      return psi;
    }
    case StateKind::Interpolation: {
      int d1, ds, de;
      interpolation_dims(spec, N, D, d1, ds, de);
      if (ds != 1) throw ValidationError("state is not pure");
      const auto lay = decode_layout(N, D, d1, ds, de);
      const auto support = pattern_support(N, D, lay);
      const double amp = 1.0 / std::sqrt(static_cast<double>(support.size()));
      for (std::int64_t flat : support) psi[flat] = amp;
      return psi;
    }
    default:
      throw ValidationError("state is not pure");
  }
}

DenseOperator build_state(const StateSpec& spec, int N, int D) {
  if (N < 1 || D < 1) throw ValidationError("N and D must be positive");
  switch (spec.kind) {
    case StateKind::PureSeparable:
    case StateKind::OneUniform: {
      const auto psi = build_pure_vector(spec, N, D);
      DenseOperator op(N, D);
      const std::int64_t side = op.side();
      for (std::int64_t r = 0; r < side; ++r) {
        if (psi[r] == Complex(0.0)) continue;
        for (std::int64_t c = 0; c < side; ++c) {
          if (psi[c] == Complex(0.0)) continue;
          op.at(r, c) = psi[r] * std::conj(psi[c]);
        }
      }
      return op;
    }
    case StateKind::ProductRank: {
      const auto ranks = product_ranks(spec, N, D);
      DenseOperator op(N, D);
      double w = 1.0;
      for (int r : ranks) w /= r;
      const std::int64_t side = op.side();
      for (std::int64_t i = 0; i < side; ++i) {
        std::int64_t rem = i;
        bool inside = true;
        for (int c = D - 1; c >= 0; --c) {
          const int digit = static_cast<int>(rem % N);
          rem /= N;
          if (digit >= ranks[c]) {
            inside = false;
            break;
          }
        }
        if (inside) op.at(i, i) = w;
      }
      return op;
    }
    case StateKind::MaximallyMixed: {
      DenseOperator op(N, D);
      const double w = 1.0 / static_cast<double>(op.side());
      for (std::int64_t i = 0; i < op.side(); ++i) op.at(i, i) = w;
      return op;
    }
    case StateKind::Interpolation: {
      int d1, ds, de;
      interpolation_dims(spec, N, D, d1, ds, de);
      // Pure on the d1 slots and the de pattern, uniform on the ds slots:
      // build the pattern within a fixed ds assignment, then sum the ds
      // diagonal over all assignments.
      const int inner_n = N / ds;
      const auto lay_in = decode_layout(inner_n, D, d1, 1, de);
      const auto support = pattern_support(inner_n, D, lay_in);
      const double amp = 1.0 / std::sqrt(static_cast<double>(support.size()));
      DenseOperator op(N, D);
      const int wspan = static_cast<int>(ipow64(de, D - 1));
      // Map an inner flat index and a ds digit tuple to the full index.
      auto lift = [&](std::int64_t inner, const std::vector<int>& vdig) {
        std::int64_t flat = 0;
        std::vector<int> digits(D);
        std::int64_t rem = inner;
        for (int c = D - 1; c >= 0; --c) {
          digits[c] = static_cast<int>(rem % inner_n);
          rem /= inner_n;
        }
        for (int c = 0; c < D; ++c) {
          const int u = digits[c] / wspan;
          const int w = digits[c] % wspan;
          const int local = (u * ds + vdig[c]) * wspan + w;
          flat = flat * N + local;
        }
        return flat;
      };
      const std::int64_t vcount = ipow64(ds, D);
      const double mix = 1.0 / static_cast<double>(vcount);
      std::vector<int> vdig(D, 0);
      for (std::int64_t vz = 0; vz < vcount; ++vz) {
        std::int64_t rem = vz;
        for (int c = D - 1; c >= 0; --c) {
          vdig[c] = static_cast<int>(rem % ds);
          rem /= ds;
        }
        for (std::int64_t a : support) {
          const std::int64_t ra = lift(a, vdig);
          for (std::int64_t b : support) {
            op.at(ra, lift(b, vdig)) += mix * amp * amp;
          }
        }
      }
      return op;
    }
    case StateKind::SeparableMixture: {
      validate_mixture(spec, N, D);
      double total = 0.0;
      for (const auto& comp : spec.mixture) total += comp.weight;
      DenseOperator op(N, D);
      const std::int64_t side = op.side();
      for (const auto& comp : spec.mixture) {
        std::vector<Eigen::MatrixXcd> fac;
        fac.reserve(D);
        for (const auto& f : comp.factors) fac.push_back(factor_matrix(f, N));
        const double w = comp.weight / total;
        for (std::int64_t r = 0; r < side; ++r) {
          for (std::int64_t c = 0; c < side; ++c) {
            Complex v = w;
            std::int64_t rr = r, cc = c;
            for (int q = D - 1; q >= 0; --q) {
              const int ri = static_cast<int>(rr % N);
              const int ci = static_cast<int>(cc % N);
              rr /= N;
              cc /= N;
              v *= fac[q](ri, ci);
              if (v == Complex(0.0)) break;
            }
            op.at(r, c) += v;
          }
        }
      }
      return op;
    }
  }
  throw ValidationError("unknown state kind");
}

Complex exact_state_invariant(const StateSpec& spec, const PermTuple& s,
                              int N) {
  const int D = s.colors();
  const int n = s.size();
  int cycle_deficit = 0;  // sum_c (#s_c - n)
  for (int c = 0; c < D; ++c) cycle_deficit += s[c].cycle_count() - n;
  int pair_deficit = 0;  // sum_{c1<c2} (#(s_c1 s_c2^-1) - n)
  for (int c1 = 0; c1 < D; ++c1) {
    for (int c2 = c1 + 1; c2 < D; ++c2) {
      pair_deficit += compose(s[c1], s[c2].inverse()).cycle_count() - n;
    }
  }
  switch (spec.kind) {
    case StateKind::PureSeparable:
      return 1.0;
    case StateKind::ProductRank: {
      const auto ranks = product_ranks(spec, N, D);
      double v = 1.0;
      for (int c = 0; c < D; ++c) {
        v *= std::pow(static_cast<double>(ranks[c]),
                      s[c].cycle_count() - n);
      }
      return v;
    }
    case StateKind::MaximallyMixed:
      return std::pow(static_cast<double>(N), cycle_deficit);
    case StateKind::OneUniform: {
      one_uniform_base(N, D);
      return std::pow(static_cast<double>(N),
                      static_cast<double>(pair_deficit) / (D - 1));
    }
    case StateKind::Interpolation: {
      int d1, ds, de;
      interpolation_dims(spec, N, D, d1, ds, de);
      return std::pow(static_cast<double>(ds), cycle_deficit) *
             std::pow(static_cast<double>(de), pair_deficit);
    }
    case StateKind::SeparableMixture:
      return separable_mixture_invariant(spec, s, N).value;
  }
  throw ValidationError("unknown state kind");
}

MixtureInvariant separable_mixture_invariant(const StateSpec& spec,
                                             const PermTuple& s, int N) {
  if (spec.kind != StateKind::SeparableMixture) {
    throw ValidationError("spec is not a separable mixture");
  }
  const int D = s.colors();
  const int n = s.size();
  validate_mixture(spec, N, D);
  const int K = static_cast<int>(spec.mixture.size());
  if (std::pow(static_cast<double>(K), n) > kMixtureCap) {
    throw CapExceeded("mixture expansion exceeds the K^n cap");
  }
  double total = 0.0;
  for (const auto& comp : spec.mixture) total += comp.weight;
  std::vector<double> weights;
  for (const auto& comp : spec.mixture) weights.push_back(comp.weight / total);

  // Per colour and cycle, the trace of every component chain.
  struct CycleTable {
    std::vector<int> slots;  // 0-based, in successor order
    std::vector<Complex> trace;
  };
  std::vector<CycleTable> tables;
  for (int c = 0; c < D; ++c) {
    std::vector<Eigen::MatrixXcd> fac;
    for (int k = 0; k < K; ++k) {
      fac.push_back(factor_matrix(spec.mixture[k].factors[c], N));
    }
    for (const auto& cyc : s[c].cycles()) {
      CycleTable tab;
      for (int e : cyc) tab.slots.push_back(e - 1);
      const int len = static_cast<int>(tab.slots.size());
      const std::int64_t count = ipow64(K, len);
      tab.trace.resize(static_cast<size_t>(count));
      std::vector<int> comp(len, 0);
      for (std::int64_t z = 0; z < count; ++z) {
        std::int64_t rem = z;
        for (int t = len - 1; t >= 0; --t) {
          comp[t] = static_cast<int>(rem % K);
          rem /= K;
        }
        Eigen::MatrixXcd chain = fac[comp[0]];
        for (int t = 1; t < len; ++t) chain = chain * fac[comp[t]];
        tab.trace[z] = chain.trace();
      }
      tables.push_back(std::move(tab));
    }
  }

  MixtureInvariant out;
  std::vector<int> assign(n, 0);
  while (true) {
    double w = 1.0;
    for (int t = 0; t < n; ++t) w *= weights[assign[t]];
    Complex term = w;
    for (const auto& tab : tables) {
      std::int64_t z = 0;
      for (int slot : tab.slots) z = z * K + assign[slot];
      term *= tab.trace[z];
    }
    out.value += term;
    if (std::all_of(assign.begin(), assign.end(),
                    [&](int v) { return v == assign[0]; })) {
      out.diagonal += term;
    }
    int t = n - 1;
    while (t >= 0 && ++assign[t] == K) assign[t--] = 0;
    if (t < 0) break;
  }
  return out;
}

FitResult fit_scaling(const std::vector<FitSample>& samples) {
  if (samples.size() < 2) throw ValidationError("need at least two samples");
  std::vector<PermTuple> groups;
  std::vector<int> group_of(samples.size());
  std::vector<int> distinct_n;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].N < 2) throw ValidationError("sample N must be >= 2");
    if (!(std::abs(samples[i].value) > 0.0)) {
      throw ValidationError("sample magnitudes must be positive");
    }
    const auto it = std::find(groups.begin(), groups.end(), samples[i].tuple);
    if (it == groups.end()) {
      groups.push_back(samples[i].tuple);
      group_of[i] = static_cast<int>(groups.size()) - 1;
    } else {
      group_of[i] = static_cast<int>(it - groups.begin());
    }
    if (std::find(distinct_n.begin(), distinct_n.end(), samples[i].N) ==
        distinct_n.end()) {
      distinct_n.push_back(samples[i].N);
    }
  }
  if (distinct_n.size() < 2) {
    throw ValidationError("need samples at two or more sizes N");
  }
  const int G = static_cast<int>(groups.size());
  const int rows = static_cast<int>(samples.size());
  const int cols = 2 + G;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (int r = 0; r < rows; ++r) {
    const auto& sample = samples[static_cast<size_t>(r)];
    const int n = sample.tuple.size();
    const int D = sample.tuple.colors();
    int cyc = 0, prs = 0;
    for (int c = 0; c < D; ++c) cyc += sample.tuple[c].cycle_count() - n;
    for (int c1 = 0; c1 < D; ++c1) {
      for (int c2 = c1 + 1; c2 < D; ++c2) {
        prs += compose(sample.tuple[c1], sample.tuple[c2].inverse())
                   .cycle_count() -
               n;
      }
    }
    const double logn = std::log(static_cast<double>(sample.N));
    design(r, 0) = cyc * logn;
    design(r, 1) = prs * logn;
    design(r, 2 + group_of[static_cast<size_t>(r)]) = 1.0;
    rhs(r) = std::log(std::abs(sample.value));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) throw ValidationError("rank-deficient fit design");
  const Eigen::VectorXd x = qr.solve(rhs);
  FitResult res;
  res.beta_hat = x(0);
  res.eps_hat = x(1);
  res.residual = (design * x - rhs).norm();
  const int dof = rows - cols;
  const double sigma2 =
      dof > 0 ? res.residual * res.residual / dof : 0.0;
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::MatrixXd cov = sigma2 * gram.inverse();
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) res.covariance[r][c] = cov(r, c);
  }
  return res;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

float get_f32(std::istream& is) {
  const std::uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

constexpr char kMagic[6] = {'T', 'H', 'C', 'I', 'Z', '1'};

}  // namespace

void write_operator(const std::string& path, const DenseOperator& op,
                    std::uint32_t flags) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open file for writing: " + path);
  os.write(kMagic, 6);
  put_u32(os, static_cast<std::uint32_t>(op.local_dim()));
  put_u32(os, static_cast<std::uint32_t>(op.factors()));
  put_u32(os, flags);
  for (const Complex& v : op.data()) {
    put_f32(os, static_cast<float>(v.real()));
    put_f32(os, static_cast<float>(v.imag()));
  }
  if (!os) throw ValidationError("short write: " + path);
}

DenseOperator read_operator(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open file: " + path);
  char magic[6];
  is.read(magic, 6);
  if (!is || std::memcmp(magic, kMagic, 6) != 0) {
    throw ValidationError("bad magic in tensor file: " + path);
  }
  const std::uint32_t n = get_u32(is);
  const std::uint32_t d = get_u32(is);
  get_u32(is);  // flags
  if (!is || n < 1 || d < 1 || n > 4096 || d > 24) {
    throw ValidationError("bad header in tensor file: " + path);
  }
  DenseOperator op(static_cast<int>(n), static_cast<int>(d));
  for (Complex& v : op.data()) {
    const float re = get_f32(is);
    const float im = get_f32(is);
    v = Complex(re, im);
  }
  if (!is) throw ValidationError("truncated tensor file: " + path);
  return op;
}

}  // namespace thciz
