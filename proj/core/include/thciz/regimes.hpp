#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thciz/coeff.hpp"
#include "thciz/perm.hpp"
#include "thciz/rational.hpp"

namespace thciz {

enum class Family { D1, MicroA, Symmetric };

std::string family_name(Family f);  // "d1", "micro-a", "symmetric"
Family parse_family(const std::string& name);

// Exponents of one side of the scaling hypothesis
// Tr_s(X) ~ N^{alpha n + beta sum_c #(s_c) + eps sum_{c1<c2} #(s_c1 s_c2^-1)}.
struct SideAnsatz {
  double alpha = 0.0;
  double beta = 0.0;
  double eps = 0.0;
};

struct ScalingAnsatz {
  SideAnsatz a;
  SideAnsatz b;

  // A-side microscopic (all zero), B-side (beta, eps), alpha = 0.
  static ScalingAnsatz micro_a(double beta, double eps, int D);
  // Both sides (beta, eps), alpha = 0.
  static ScalingAnsatz symmetric(double beta, double eps, int D);
  // D = 1 convention: alpha = eps = 0 on both sides.
  static ScalingAnsatz d1(double beta_a, double beta_b);
};

// alpha making the full trace O(1): -beta*D - eps*D(D-1)/2.
double normalized_alpha(double beta, double eps, int D);

struct RegimeReport {
  Family family = Family::MicroA;
  std::string regime_id;  // "1".."6", "I".."VIII", "S-I".."S-VIII"
  int D = 0;
  double gamma = 0.0;
  double delta = 0.0;
  bool prolific = false;
  // Extra shift of gamma when the supplied alphas deviate from the alpha = 0
  // convention the closed forms assume: rescaling by gamma + alpha_adjustment
  // restores the stated delta. Reported, never silently folded into gamma.
  double alpha_adjustment = 0.0;
};

// alpha n + beta sum_c #(t_c) + eps sum_{c1<c2} #(t_c1 t_c2^-1).
double invariant_scaling_exponent(const PermTuple& t, const SideAnsatz& side);
// s(s,t) = sum_c #(s_c t_c^-1) - 2|Pi(s,t)| + 2.
int pair_scaling_exponent(const PermTuple& s, const PermTuple& t);

// n(gamma - 2D) + s(s,t) + s_A(s) + s_B(t).
double total_exponent(const PermTuple& s, const PermTuple& t,
                      const ScalingAnsatz& ans, double gamma, int D, int n);

// The same value split along the Euler relation into genus, connectivity,
// and per-colour cycle terms. genus_form always equals value.
struct ExponentBreakdown {
  double value = 0.0;
  int s_pair = 0;
  double s_a = 0.0;
  double s_b = 0.0;
  int components = 0;        // |Pi(s,t)|
  int genus_sum = 0;         // sum_c g(s_c, t_c)
  int joint_cycle_sum = 0;   // sum_c |Pi(s_c, t_c)|
  double genus_form = 0.0;
};
ExponentBreakdown total_exponent_breakdown(const PermTuple& s,
                                           const PermTuple& t,
                                           const ScalingAnsatz& ans,
                                           double gamma, int D, int n);

// Maps the ansatz to its regime with the closed-form (gamma, delta).
// Families: D1 needs D == 1 and beta_a <= beta_b; micro-a needs a
// microscopic A side and beta, eps >= 0; symmetric needs equal sides.
RegimeReport classify(int D, const ScalingAnsatz& ans, Family family);

// Canonical report for a regime id at a representative ansatz.
RegimeReport report_for_regime(const std::string& regime_id, int D);

// Whether (s, t) lies in the regime's leading-order set.
bool is_leading(const PermTuple& s, const PermTuple& t,
                const RegimeReport& report);

struct LeadingGraph {
  PermTuple sigma;
  PermTuple tau;
  ExactRational coeff;  // f[sigma, tau]
};

// Every leading pair exactly once, in lexicographic (sigma, tau) order,
// with coeff = leading_weingarten. Structured generators per regime;
// throws CapExceeded beyond the documented caps.
void enumerate_leading(int D, int n, const RegimeReport& report,
                       const std::function<void(const LeadingGraph&)>& fn);
std::vector<LeadingGraph> leading_graphs(int D, int n,
                                         const RegimeReport& report);
std::uint64_t count_leading(int D, int n, const std::string& regime_id);

struct BruteForceResult {
  std::vector<std::pair<PermTuple, PermTuple>> argmax;
  double max_value = 0.0;
};

// Exhaustive maximization of total_exponent over S_n^D x S_n^D.
// Ties within 1e-9 are all reported. Capped at (n!)^{2D} <= ~2.2e6.
BruteForceResult brute_force_leading(int D, int n, const ScalingAnsatz& ans,
                                     double gamma);

using InvariantTable = std::map<PermTuple, std::complex<double>>;

// sum over the leading set of trA[s] * trB[t^-1] * f[s,t].
std::complex<double> asymptotic_cumulant(int n, const RegimeReport& report,
                                         const InvariantTable& trA,
                                         const InvariantTable& trB);

// Large-N moment behaviour: value = coefficient * N^n_power.
struct MomentAsymptotics {
  double coefficient = 0.0;
  int n_power = 0;
};
MomentAsymptotics asymptotic_moment(int n, int D, double trA_scalar,
                                    double trB_scalar);

std::string report_json(const RegimeReport& report);
// CSV columns: sigma, tau, f_num, f_den.
void leading_graphs_csv(std::ostream& os,
                        const std::vector<LeadingGraph>& graphs);

}  // namespace thciz
