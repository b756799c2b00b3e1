// Command line frontend for the tensor overlap toolkit: regime
// classification, leading-graph enumeration, exact coefficients and
// moments, invariant evaluation, scaling fits, and Monte Carlo
// convergence tables. Emits CSV or JSON for plotting.

#include <complex>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thciz/coeff.hpp"
#include "thciz/errors.hpp"
#include "thciz/graphs.hpp"
#include "thciz/montecarlo.hpp"
#include "thciz/perm.hpp"
#include "thciz/rational.hpp"
#include "thciz/regimes.hpp"
#include "thciz/tensors.hpp"

namespace {

using nlohmann::json;
using namespace thciz;

struct GlobalFlags {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string format = "csv";
  int exact_wg_cap = 6;
};

// Accepts "3/4" exact or "0.75" decimal.
double parse_number(const std::string& text) {
  try {
    return ExactRational::from_string(text).to_double();
  } catch (const ValidationError&) {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw ValidationError("bad number: " + text);
    return v;
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ValidationError("empty entry in list: " + text);
    out.push_back(std::stoi(item));
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

void echo_config(const std::string& command, const GlobalFlags& g,
                 const json& params) {
  json cfg;
  cfg["command"] = command;
  cfg["seed"] = g.seed;
  cfg["threads"] = g.threads;
  cfg["format"] = g.format;
  cfg["params"] = params;
  std::cerr << "config " << cfg.dump() << "\n";
}

json report_to_json(const RegimeReport& r) {
  return json::parse(report_json(r));
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  int D = 2;
  std::string family;
  std::string beta, eps;
  std::string beta_a, beta_b;
  std::string alpha_a = "0", alpha_b = "0";
};

int cmd_classify(const GlobalFlags& g, const ClassifyArgs& a) {
  const std::string fam_name =
      !a.family.empty() ? a.family : (a.D == 1 ? "d1" : "micro-a");
  const Family fam = parse_family(fam_name);
  ScalingAnsatz ans;
  if (fam == Family::D1) {
    if (a.beta_a.empty() || a.beta_b.empty()) {
      throw ValidationError("d1 family needs --beta-a and --beta-b");
    }
    ans = ScalingAnsatz::d1(parse_number(a.beta_a), parse_number(a.beta_b));
  } else {
    if (a.beta.empty() || a.eps.empty()) {
      throw ValidationError("family " + fam_name + " needs --beta and --eps");
    }
    const double beta = parse_number(a.beta);
    const double eps = parse_number(a.eps);
    ans = fam == Family::MicroA ? ScalingAnsatz::micro_a(beta, eps, a.D)
                                : ScalingAnsatz::symmetric(beta, eps, a.D);
  }
  ans.a.alpha += parse_number(a.alpha_a);
  ans.b.alpha += parse_number(a.alpha_b);
  echo_config("classify", g,
              json{{"D", a.D}, {"family", fam_name}});
  const RegimeReport rep = classify(a.D, ans, fam);
  if (g.format == "json") {
    std::cout << report_to_json(rep).dump(2) << "\n";
  } else {
    std::cout << "family,regime,gamma,delta,prolific,alpha_adjustment\n";
    std::cout << family_name(rep.family) << ',' << rep.regime_id << ','
              << rep.gamma << ',' << rep.delta << ',' << rep.prolific << ','
              << rep.alpha_adjustment << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// enumerate

struct EnumerateArgs {
  int D = 2;
  int n = 2;
  std::string regime;
  std::string family;
  std::string beta, eps, beta_a, beta_b;
  bool brute = false;
};

RegimeReport resolve_report(const EnumerateArgs& a, ScalingAnsatz* ans_out) {
  if (!a.regime.empty() && a.beta.empty() && a.beta_a.empty()) {
    const RegimeReport rep = report_for_regime(a.regime, a.D);
    if (ans_out) {
      // Representative ansatz is re-derived from the regime id for brute
      // force; report_for_regime keeps the two in sync.
      *ans_out = ScalingAnsatz{};
    }
    return rep;
  }
  ClassifyArgs c;
  c.D = a.D;
  c.family = a.family;
  c.beta = a.beta;
  c.eps = a.eps;
  c.beta_a = a.beta_a;
  c.beta_b = a.beta_b;
  const std::string fam_name =
      !c.family.empty() ? c.family : (a.D == 1 ? "d1" : "micro-a");
  const Family fam = parse_family(fam_name);
  ScalingAnsatz ans;
  if (fam == Family::D1) {
    ans = ScalingAnsatz::d1(parse_number(c.beta_a), parse_number(c.beta_b));
  } else {
    const double beta = parse_number(c.beta);
    const double eps = parse_number(c.eps);
    ans = fam == Family::MicroA ? ScalingAnsatz::micro_a(beta, eps, a.D)
                                : ScalingAnsatz::symmetric(beta, eps, a.D);
  }
  if (ans_out) *ans_out = ans;
  const RegimeReport rep = classify(a.D, ans, fam);
  if (!a.regime.empty() && rep.regime_id != a.regime) {
    throw ValidationError("ansatz classifies to regime " + rep.regime_id +
                          ", not " + a.regime);
  }
  return rep;
}

// Representative ansatz for a bare regime id, used only by --brute-force.
ScalingAnsatz representative_ansatz(const std::string& id, int D) {
  const std::map<std::string, std::pair<double, double>> micro = {
      {"I", {1.0 / D, 1.0 / D}},   {"II", {1.0, 0.0}},
      {"III", {0.2, 0.2}},         {"IV", {0.4, 0.1}},
      {"V", {0.0, 0.5}},           {"VI", {0.0, 0.0}},
      {"VII", {1.0 / D, 0.9}},     {"VIII", {1.2, 0.1}},
  };
  if (id.rfind("S-", 0) == 0) {
    const auto it = micro.find(id.substr(2));
    if (it == micro.end()) throw ValidationError("unknown regime id: " + id);
    return ScalingAnsatz::symmetric(it->second.first, it->second.second, D);
  }
  if (micro.count(id)) {
    const auto& be = micro.at(id);
    return ScalingAnsatz::micro_a(be.first, be.second, D);
  }
  static const std::map<std::string, std::pair<double, double>> d1 = {
      {"1", {1.0, 1.0}}, {"2", {0.0, 1.0}}, {"3", {0.5, 0.5}},
      {"4", {0.5, 1.5}}, {"5", {0.0, 0.5}}, {"6", {0.0, 0.0}},
  };
  const auto it = d1.find(id);
  if (it == d1.end()) throw ValidationError("unknown regime id: " + id);
  return ScalingAnsatz::d1(it->second.first, it->second.second);
}

int cmd_enumerate(const GlobalFlags& g, const EnumerateArgs& a) {
  ScalingAnsatz ans;
  const RegimeReport rep = resolve_report(a, &ans);
  if (!a.regime.empty() && a.beta.empty() && a.beta_a.empty()) {
    ans = representative_ansatz(a.regime, a.D);
  }
  echo_config("enumerate", g,
              json{{"D", a.D},
                   {"n", a.n},
                   {"regime", rep.regime_id},
                   {"brute_force", a.brute}});
  std::vector<LeadingGraph> graphs;
  if (a.brute) {
    const BruteForceResult br = brute_force_leading(a.D, a.n, ans, rep.gamma);
    for (const auto& [s, t] : br.argmax) {
      graphs.push_back({s, t, leading_weingarten(s, t)});
    }
  } else {
    graphs = leading_graphs(a.D, a.n, rep);
  }
  if (g.format == "json") {
    json rows = json::array();
    for (const auto& gr : graphs) {
      rows.push_back({{"sigma", to_string(gr.sigma)},
                      {"tau", to_string(gr.tau)},
                      {"f", gr.coeff.str()}});
    }
    json out;
    out["report"] = report_to_json(rep);
    out["count"] = graphs.size();
    out["graphs"] = rows;
    std::cout << out.dump(2) << "\n";
  } else {
    leading_graphs_csv(std::cout, graphs);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// coefficient

int cmd_coefficient(const GlobalFlags& g, const std::string& sigma,
                    const std::string& tau) {
  const PermTuple s = parse_perm_tuple(sigma);
  const PermTuple t = parse_perm_tuple(tau);
  echo_config("coefficient", g, json{{"sigma", sigma}, {"tau", tau}});
  const ExactRational f = leading_weingarten(s, t);
  if (g.format == "json") {
    json out{{"sigma", to_string(s)},
             {"tau", to_string(t)},
             {"f", f.str()},
             {"decimal", f.to_double()}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "sigma,tau,f,decimal\n";
    std::cout << '"' << to_string(s) << "\",\"" << to_string(t) << "\","
              << f.str() << ',' << f.to_double() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// invariant

StateSpec resolve_state(const std::string& text, int D) {
  if (!text.empty() && (text[0] == '{' || text[0] == '@')) {
    if (text[0] == '{') return parse_state_spec_json(text);
    std::ifstream in(text.substr(1));
    if (!in) throw ValidationError("cannot open state file " + text.substr(1));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_state_spec_json(buf.str());
  }
  StateSpec spec;
  std::string name = text;
  std::string arg;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    name = text.substr(0, colon);
    arg = text.substr(colon + 1);
  }
  spec.kind = parse_state_kind(name);
  if (spec.kind == StateKind::ProductRank) {
    spec.dims = {arg.empty() ? 1 : std::stoi(arg)};
  } else if (spec.kind == StateKind::Interpolation) {
    if (arg.empty()) {
      throw ValidationError("interpolation needs dims, e.g. interpolation:1,2,3");
    }
    spec.dims = parse_int_list(arg);
  } else if (!arg.empty()) {
    throw ValidationError("state kind " + name + " takes no argument");
  }
  (void)D;
  return spec;
}

struct InvariantArgs {
  std::string state;
  int D = 2;
  int N = 4;
  std::string sigma;
  bool dense = false;
};

int cmd_invariant(const GlobalFlags& g, const InvariantArgs& a) {
  const StateSpec spec = resolve_state(a.state, a.D);
  const PermTuple s = parse_perm_tuple(a.sigma);
  if (s.colors() != a.D) {
    throw ValidationError("tuple has " + std::to_string(s.colors()) +
                          " colours, expected D = " + std::to_string(a.D));
  }
  echo_config("invariant", g,
              json{{"state", state_spec_json(spec)},
                   {"D", a.D},
                   {"N", a.N},
                   {"sigma", to_string(s)},
                   {"dense", a.dense}});
  Complex value;
  std::string method;
  if (a.dense || spec.kind == StateKind::SeparableMixture) {
    const DenseOperator rho = build_state(spec, a.N, a.D);
    value = evaluate_trace_invariant(rho, s);
    method = "dense";
  } else {
    value = exact_state_invariant(spec, s, a.N);
    method = "closed-form";
  }
  if (g.format == "json") {
    json out{{"state", state_kind_name(spec.kind)},
             {"sigma", to_string(s)},
             {"N", a.N},
             {"D", a.D},
             {"value_re", value.real()},
             {"value_im", value.imag()},
             {"method", method}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "state,sigma,N,D,value_re,value_im,method\n";
    std::cout << state_kind_name(spec.kind) << ",\"" << to_string(s) << "\","
              << a.N << ',' << a.D << ',' << value.real() << ','
              << value.imag() << ',' << method << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string family = "max-mixed";
  int D = 2;
  std::string sizes = "2,3,4,5";
  std::vector<std::string> tuples;
};

std::vector<PermTuple> default_fit_tuples(int D) {
  // Probes chosen so the two design columns are independent.
  std::vector<std::string> texts;
  if (D == 2) {
    texts = {"2,1;1,2", "2,1;2,1", "2,3,1;2,3,1", "2,1;1,2,repeat"};
    texts.pop_back();
  } else {
    // One swapped colour; all colours swapped; a 3-cycle diagonal.
    std::string one, all, cyc;
    for (int c = 0; c < D; ++c) {
      one += (c == 0 ? "2,1" : ";1,2");
      if (c > 0) {
        all += ";2,1";
        cyc += ";2,3,1";
      } else {
        all += "2,1";
        cyc += "2,3,1";
      }
    }
    texts = {one, all, cyc};
  }
  std::vector<PermTuple> out;
  for (const auto& t : texts) out.push_back(parse_perm_tuple(t));
  return out;
}

int cmd_fit(const GlobalFlags& g, const FitArgs& a) {
  const StateSpec spec = resolve_state(a.family, a.D);
  const std::vector<int> sizes = parse_int_list(a.sizes);
  std::vector<PermTuple> tuples;
  if (a.tuples.empty()) {
    tuples = default_fit_tuples(a.D);
  } else {
    for (const auto& t : a.tuples) tuples.push_back(parse_perm_tuple(t));
  }
  echo_config("fit", g,
              json{{"family", state_kind_name(spec.kind)},
                   {"D", a.D},
                   {"N", a.sizes},
                   {"tuples", tuples.size()}});
  std::vector<FitSample> samples;
  for (const int N : sizes) {
    for (const auto& t : tuples) {
      samples.push_back({N, t, exact_state_invariant(spec, t, N)});
    }
  }
  const FitResult fr = fit_scaling(samples);
  if (g.format == "json") {
    json out{{"beta", fr.beta_hat},
             {"eps", fr.eps_hat},
             {"residual", fr.residual},
             {"family", state_kind_name(spec.kind)},
             {"D", a.D}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "family,D,beta,eps,residual\n";
    std::cout << state_kind_name(spec.kind) << ',' << a.D << ',' << fr.beta_hat
              << ',' << fr.eps_hat << ',' << fr.residual << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string regime = "V";
  std::string family = "micro-a";
  int D = 2;
  std::string sizes = "4,6,8";
  std::string orders = "2,3";
  std::uint64_t samples = 100000;
  int blocks = 100;
  std::string state_a;
  std::string state_b;
};

// (beta, eps) of the named state family as a fixed power law in N.
std::pair<double, double> state_scaling(const StateSpec& spec, int D) {
  switch (spec.kind) {
    case StateKind::PureSeparable:
      return {0.0, 0.0};
    case StateKind::ProductRank:
      if (spec.dims.empty() ||
          std::all_of(spec.dims.begin(), spec.dims.end(),
                      [](int r) { return r == 1; })) {
        return {0.0, 0.0};
      }
      throw ValidationError(
          "product-rank with rank > 1 has no fixed scaling exponents");
    case StateKind::MaximallyMixed:
      return {1.0, 0.0};
    case StateKind::OneUniform:
      return {0.0, 1.0 / (D - 1)};
    default:
      throw ValidationError("state kind " + state_kind_name(spec.kind) +
                            " has no fixed scaling exponents");
  }
}

int cmd_simulate(const GlobalFlags& g, const SimulateArgs& a) {
  const Family fam = parse_family(a.family);
  std::string sa = a.state_a, sb = a.state_b;
  if (sa.empty() && sb.empty() && a.regime == "V" && fam == Family::MicroA) {
    sa = "pure-separable";
    sb = "one-uniform";
  }
  if (sa.empty() || sb.empty()) {
    throw ValidationError("simulate needs --state-a and --state-b");
  }
  const StateSpec spec_a = resolve_state(sa, a.D);
  const StateSpec spec_b = resolve_state(sb, a.D);
  const auto [ba, ea] = state_scaling(spec_a, a.D);
  const auto [bb, eb] = state_scaling(spec_b, a.D);
  ScalingAnsatz ans;
  if (fam == Family::Symmetric) {
    if (ba != bb || ea != eb) {
      throw ValidationError("symmetric family needs identical state scalings");
    }
    ans = ScalingAnsatz::symmetric(bb, eb, a.D);
  } else {
    if (ba != 0.0 || ea != 0.0) {
      throw ValidationError("micro-a family needs a microscopic A state");
    }
    ans = ScalingAnsatz::micro_a(bb, eb, a.D);
  }
  const RegimeReport rep = classify(a.D, ans, fam);
  if (!a.regime.empty() && rep.regime_id != a.regime) {
    throw ValidationError("states classify to regime " + rep.regime_id +
                          ", not " + a.regime);
  }
  const std::vector<int> sizes = parse_int_list(a.sizes);
  const std::vector<int> orders = parse_int_list(a.orders);
  EstimationOptions opts;
  opts.samples = a.samples;
  opts.seed = g.seed;
  opts.threads = g.threads;
  opts.blocks = a.blocks;
  opts.n_max = *std::max_element(orders.begin(), orders.end());
  echo_config("simulate", g,
              json{{"regime", rep.regime_id},
                   {"family", a.family},
                   {"D", a.D},
                   {"N", a.sizes},
                   {"n", a.orders},
                   {"samples", a.samples},
                   {"state_a", state_kind_name(spec_a.kind)},
                   {"state_b", state_kind_name(spec_b.kind)}});
  auto rows = convergence_table(spec_a, spec_b, a.D, fam, ans, sizes, opts);
  // Keep only the requested orders.
  std::vector<ConvergenceRow> kept;
  for (const auto& r : rows) {
    if (std::find(orders.begin(), orders.end(), r.n) != orders.end()) {
      kept.push_back(r);
    }
  }
  if (g.format == "json") {
    json arr = json::array();
    for (const auto& r : kept) {
      arr.push_back({{"N", r.N},
                     {"n", r.n},
                     {"gamma", r.gamma},
                     {"delta", r.delta},
                     {"measured", r.measured},
                     {"stderr", r.se},
                     {"predicted", r.predicted},
                     {"ratio", r.ratio}});
    }
    std::cout << arr.dump(2) << "\n";
  } else {
    convergence_csv(std::cout, kept);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// oracle-exact

struct OracleArgs {
  std::string probe_a = "delta";
  std::string probe_b = "delta";
  int n_max = 3;
  long N = 6;
  int D = 1;
};

ExactInvariant resolve_probe(const std::string& text, long N, int D) {
  std::string name = text;
  std::string arg;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    name = text.substr(0, colon);
    arg = text.substr(colon + 1);
  }
  if (name == "delta") return delta_invariant();
  if (name == "identity") return identity_operator_invariant(N);
  if (name == "max-mixed") {
    return [N](const PermTuple& s) {
      int e = 0;
      for (int c = 0; c < s.colors(); ++c) e += s[c].cycle_count();
      return ExactRational::ipow(N, e - s.size() * s.colors());
    };
  }
  if (name == "one-uniform") {
    if (D != 2) {
      throw ValidationError("one-uniform oracle probe implemented for D = 2");
    }
    return [N](const PermTuple& s) {
      const int e = compose(s[0], s[1].inverse()).cycle_count() - s.size();
      return ExactRational::ipow(N, e);
    };
  }
  if (name == "product-rank") {
    const long r = arg.empty() ? 1 : std::stol(arg);
    if (r < 1) throw ValidationError("rank must be positive");
    return [r](const PermTuple& s) {
      int e = 0;
      for (int c = 0; c < s.colors(); ++c) e += s[c].cycle_count();
      return ExactRational::ipow(r, e - s.size() * s.colors());
    };
  }
  throw ValidationError("unknown probe: " + text);
}

int cmd_oracle_exact(const GlobalFlags& g, const OracleArgs& a) {
  const ExactInvariant trA = resolve_probe(a.probe_a, a.N, a.D);
  const ExactInvariant trB = resolve_probe(a.probe_b, a.N, a.D);
  echo_config("oracle-exact", g,
              json{{"probe_a", a.probe_a},
                   {"probe_b", a.probe_b},
                   {"n_max", a.n_max},
                   {"N", a.N},
                   {"D", a.D}});
  const auto moments = exact_moments(trA, trB, a.n_max, a.N, a.D);
  const auto cumulants = cumulants_from_moments(moments);
  if (g.format == "json") {
    json arr = json::array();
    for (int n = 1; n <= a.n_max; ++n) {
      arr.push_back({{"n", n},
                     {"moment", moments[n - 1].str()},
                     {"moment_decimal", moments[n - 1].to_double()},
                     {"cumulant", cumulants[n - 1].str()},
                     {"cumulant_decimal", cumulants[n - 1].to_double()}});
    }
    std::cout << arr.dump(2) << "\n";
  } else {
    std::cout << "n,moment,moment_decimal,cumulant,cumulant_decimal\n";
    for (int n = 1; n <= a.n_max; ++n) {
      std::cout << n << ',' << moments[n - 1].str() << ','
                << moments[n - 1].to_double() << ',' << cumulants[n - 1].str()
                << ',' << cumulants[n - 1].to_double() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor overlap toolkit"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--exact-wg-cap", g.exact_wg_cap,
                 "largest order for exact Weingarten tables");

  ClassifyArgs ca;
  auto* classify_cmd = app.add_subcommand("classify", "map an ansatz to its regime");
  classify_cmd->add_option("--D", ca.D, "number of unitary factors")->required();
  classify_cmd->add_option("--family", ca.family, "d1 | micro-a | symmetric");
  classify_cmd->add_option("--beta", ca.beta, "beta exponent (decimal or p/q)");
  classify_cmd->add_option("--eps", ca.eps, "eps exponent (decimal or p/q)");
  classify_cmd->add_option("--beta-a", ca.beta_a, "d1: A side beta");
  classify_cmd->add_option("--beta-b", ca.beta_b, "d1: B side beta");
  classify_cmd->add_option("--alpha-a", ca.alpha_a, "extra A-side alpha");
  classify_cmd->add_option("--alpha-b", ca.alpha_b, "extra B-side alpha");

  EnumerateArgs ea;
  auto* enum_cmd = app.add_subcommand("enumerate", "list the leading pairs");
  enum_cmd->add_option("--D", ea.D)->required();
  enum_cmd->add_option("--n", ea.n)->required();
  enum_cmd->add_option("--regime", ea.regime, "regime id, e.g. IV or S-II or 3");
  enum_cmd->add_option("--family", ea.family);
  enum_cmd->add_option("--beta", ea.beta);
  enum_cmd->add_option("--eps", ea.eps);
  enum_cmd->add_option("--beta-a", ea.beta_a);
  enum_cmd->add_option("--beta-b", ea.beta_b);
  enum_cmd->add_flag("--brute-force", ea.brute,
                     "exhaustive exponent maximization instead of the generator");

  std::string co_sigma, co_tau;
  auto* coeff_cmd = app.add_subcommand("coefficient", "leading coefficient f[sigma,tau]");
  coeff_cmd->add_option("--sigma", co_sigma)->required();
  coeff_cmd->add_option("--tau", co_tau)->required();

  InvariantArgs ia;
  auto* inv_cmd = app.add_subcommand("invariant", "trace invariant of a state");
  inv_cmd->add_option("--state", ia.state,
                      "kind name, kind:args, inline JSON, or @file")
      ->required();
  inv_cmd->add_option("--D", ia.D)->required();
  inv_cmd->add_option("--N", ia.N)->required();
  inv_cmd->add_option("--sigma", ia.sigma)->required();
  inv_cmd->add_flag("--dense", ia.dense, "force the dense contraction route");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "recover scaling exponents");
  fit_cmd->add_option("--family", fa.family, "state family to probe")->required();
  fit_cmd->add_option("--D", fa.D)->required();
  fit_cmd->add_option("--N", fa.sizes, "comma separated sizes")->required();
  fit_cmd->add_option("--tuple", fa.tuples, "probe tuple (repeatable)");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo convergence table");
  sim_cmd->add_option("--regime", sa.regime);
  sim_cmd->add_option("--family", sa.family);
  sim_cmd->add_option("--D", sa.D)->required();
  sim_cmd->add_option("--N", sa.sizes, "comma separated sizes");
  sim_cmd->add_option("--n", sa.orders, "comma separated cumulant orders");
  sim_cmd->add_option("--samples", sa.samples);
  sim_cmd->add_option("--blocks", sa.blocks);
  sim_cmd->add_option("--state-a", sa.state_a);
  sim_cmd->add_option("--state-b", sa.state_b);

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle-exact", "exact finite-size moments");
  oracle_cmd->add_option("--probe-a", oa.probe_a,
                         "delta | identity | max-mixed | one-uniform | product-rank:r");
  oracle_cmd->add_option("--probe-b", oa.probe_b);
  oracle_cmd->add_option("--n-max", oa.n_max);
  oracle_cmd->add_option("--N", oa.N)->required();
  oracle_cmd->add_option("--D", oa.D)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(classify_cmd)) return cmd_classify(g, ca);
    if (app.got_subcommand(enum_cmd)) return cmd_enumerate(g, ea);
    if (app.got_subcommand(coeff_cmd)) return cmd_coefficient(g, co_sigma, co_tau);
    if (app.got_subcommand(inv_cmd)) return cmd_invariant(g, ia);
    if (app.got_subcommand(fit_cmd)) return cmd_fit(g, fa);
    if (app.got_subcommand(sim_cmd)) return cmd_simulate(g, sa);
    if (app.got_subcommand(oracle_cmd)) return cmd_oracle_exact(g, oa);
    throw ValidationError("no subcommand");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
