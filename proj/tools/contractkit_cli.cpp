// contractkit command-line front end. One verb per process; JSON report on
// stdout, diagnostics on stderr.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contractkit/applications.hpp"
#include "contractkit/channel_algebra.hpp"
#include "contractkit/contraction.hpp"
#include "contractkit/divergences.hpp"
#include "contractkit/io.hpp"
#include "contractkit/sobolev.hpp"

namespace {

using namespace ck;

struct Common {
  std::string phi = "kl";
  std::uint64_t seed = 0;
  int starts = 16;
  double tol = 1e-9;
  std::string lambda_grid;
  bool exact = false;
};

struct Args {
  Common c;
  std::string mu, nu, channel, channel2, mu2, graph, strategy = "auto", a_set, b_set, eps_grid;
  double eps = 1e-3;
  std::optional<double> eta, big_c, small_c;
  std::size_t q = 2, samples = 200, intermediate = 0;
  double beta = 0.0;
  bool no_opconv = false, kernels = false;
};

void add_common(CLI::App* sub, Common& c, bool with_phi = true) {
  if (with_phi) sub->add_option("--phi", c.phi, "kl, chi2, tv, hellinger, lecam:<λ>, alpha:<p>");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--starts", c.starts, "ascent starts")->check(CLI::NonNegativeNumber);
  sub->add_option("--tol", c.tol, "ascent tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--lambda-grid", c.lambda_grid, "comma-separated Le Cam λ values");
  sub->add_flag("--exact", c.exact, "print shortest round-trip digits");
}

EtaOptions eta_options(const Common& c) {
  EtaOptions o;
  o.seed = c.seed;
  o.starts = c.starts;
  o.tol = c.tol;
  if (!c.lambda_grid.empty()) o.lambda_grid = parse_real_list(c.lambda_grid, "--lambda-grid");
  for (double l : o.lambda_grid)
    if (!(l > 0.0 && l < 1.0)) throw Error(ErrorCode::ValidationError, "--lambda-grid: values must lie in (0,1)");
  return o;
}

SobolevOptions sobolev_options(const Common& c) {
  SobolevOptions o;
  o.seed = c.seed;
  o.tol = c.tol;
  o.starts = std::max(c.starts, 32);
  return o;
}

Json bounds_json(const std::vector<BoundEntry>& v, const ReportStyle& st) {
  Json a = Json::array();
  for (const auto& b : v) {
    Json j;
    j["tag"] = b.tag;
    j["value"] = number(b.value, st);
    j["applicable"] = b.applicable;
    j["reason"] = b.reason;
    a.push_back(j);
  }
  return a;
}

Json eta_json(const EtaReport& r, const ReportStyle& st) {
  Json j;
  j["phi"] = r.phi_name;
  j["estimate"] = number(r.estimate, st);
  j["converged"] = r.converged;
  j["witness"] = r.witness ? vector_json(r.witness->mass(), st) : Json(nullptr);
  j["lower_bounds"] = bounds_json(r.lower_bounds, st);
  j["upper_bounds"] = bounds_json(r.upper_bounds, st);
  j["max_lower"] = number(r.max_lower(), st);
  j["min_upper"] = number(r.min_upper(), st);
  return j;
}

EtaReport eta_report(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& o) {
  if (phi.name == "tv") {
    // TV has no differentiable ascent; η is exactly the Dobrushin coefficient.
    EtaReport r = eta_bounds(phi, pair, o);
    r.estimate = dobrushin(pair.k);
    return r;
  }
  return eta_numeric(phi, pair, o);
}

int emit(const Json& j) {
  std::cout << dump(j);
  return 0;
}

int cmd_divergence(const Args& a) {
  ReportStyle st{a.c.exact};
  auto phi = phi_from_name(a.c.phi);
  Dist nu = load_dist(a.nu), mu = load_dist(a.mu);
  Json j;
  j["command"] = "divergence";
  j["phi"] = phi.name;
  j["divergence"] = number(phi_divergence(phi, nu, mu), st);
  return emit(j);
}

int cmd_eta(const Args& a, bool bounds_only) {
  ReportStyle st{a.c.exact};
  auto phi = phi_from_name(a.c.phi);
  auto pair = validate_admissible(load_dist(a.mu), load_channel(a.channel));
  auto o = eta_options(a.c);
  o.opconv_cap = !a.no_opconv;
  Json j;
  j["command"] = bounds_only ? "bounds" : "eta";
  if (bounds_only) {
    auto r = eta_bounds(phi, pair, o);
    j["report"] = eta_json(r, st);
    j["report"].erase("estimate");
    j["report"].erase("converged");
    j["report"].erase("witness");
    return emit(j);
  }
  auto r = eta_report(phi, pair, o);
  j.update(eta_json(r, st));
  emit(j);
  return r.converged ? 0 : 3;
}

int cmd_adjoint(const Args& a) {
  ReportStyle st{a.c.exact};
  auto pair = validate_admissible(load_dist(a.mu), load_channel(a.channel));
  Json j;
  j["command"] = "adjoint";
  j["output_law"] = dist_json(pair.output_law, st);
  j["adjoint"] = channel_json(adjoint(pair), st);
  return emit(j);
}

int cmd_tensor(const Args& a) {
  ReportStyle st{a.c.exact};
  Channel k1 = load_channel(a.channel), k2 = load_channel(a.channel2);
  Json j;
  j["command"] = "tensor";
  j["channel"] = channel_json(tensor(k1, k2), st);
  if (!a.mu.empty()) {
    Dist m1 = load_dist(a.mu), m2 = load_dist(a.mu2.empty() ? a.mu : a.mu2);
    j["law"] = dist_json(tensor(m1, m2), st);
    auto phi = phi_from_name(a.c.phi);
    auto o = eta_options(a.c);
    o.opconv_cap = false;
    auto rep = tensorization_check(phi, {validate_admissible(m1, k1), validate_admissible(m2, k2)}, std::nullopt, o);
    Json t;
    t["phi"] = phi.name;
    Json comps = Json::array();
    for (double e : rep.component_eta) comps.push_back(number(e, st));
    t["component_eta"] = comps;
    t["component_max"] = number(rep.component_max, st);
    t["product_eta_bound"] = number(rep.product_eta_bound, st);
    if (rep.chi2_product_eta) t["chi2_product_eta"] = number(*rep.chi2_product_eta, st);
    j["tensorization"] = t;
  }
  return emit(j);
}

std::vector<FactorStrategy> strategies(const std::string& s) {
  if (s == "auto") return {FactorStrategy::DsbsClosedForm, FactorStrategy::SpectralSqrt, FactorStrategy::Parametric};
  if (s == "dsbs") return {FactorStrategy::DsbsClosedForm};
  if (s == "spectral") return {FactorStrategy::SpectralSqrt};
  if (s == "parametric") return {FactorStrategy::Parametric};
  throw Error(ErrorCode::ValidationError, "--strategy must be auto, dsbs, spectral or parametric");
}

Json factor_json(const Factorization& f, const ReportStyle& st) {
  Json j;
  j["strategy"] = f.strategy;
  j["residual"] = number(f.residual, st);
  j["accepted"] = f.accepted;
  j["channel"] = channel_json(f.k, st);
  return j;
}

int cmd_factor(const Args& a) {
  ReportStyle st{a.c.exact};
  auto rp = make_reversible(load_dist(a.mu), load_channel(a.channel));
  auto f = factor_through(rp, strategies(a.strategy), a.intermediate, a.c.seed);
  Json j;
  j["command"] = "factor";
  j.update(factor_json(f, st));
  return emit(j);
}

int cmd_sobolev(const Args& a) {
  ReportStyle st{a.c.exact};
  auto rp = make_reversible(load_dist(a.mu), load_channel(a.channel));
  auto so = sobolev_options(a.c);
  auto pc = poincare_constant(rp);
  Json j;
  j["command"] = "sobolev";
  j["lambda_tilde"] = number(pc.lambda_tilde, st);
  j["abs_gap"] = number(pc.abs_gap, st);
  bool conv = true;
  for (int p : {0, 1, 2}) {
    auto r = log_sobolev_constant(rp, p, so);
    conv = conv && r.converged;
    j["rho_" + std::to_string(p)] = number(r.value, st);
  }
  j["converged"] = conv;
  try {
    auto f = factor_through(rp, strategies(a.strategy), a.intermediate, a.c.seed);
    j["factorization"] = factor_json(f, st);
    auto o = eta_options(a.c);
    auto br = sobolev_sdpi_bridge(rp, f, phi_from_name(a.c.phi), so, o);
    Json b;
    b["eta_chi2"] = number(br.eta_chi2, st);
    b["eta_kl"] = number(br.eta_kl, st);
    Json checks = Json::array();
    for (const auto& c : br.checks) {
      Json x;
      x["tag"] = c.tag;
      x["lhs"] = number(c.lhs, st);
      x["rhs"] = number(c.rhs, st);
      x["ok"] = c.ok;
      if (c.advisory) x["advisory"] = true;
      checks.push_back(x);
    }
    b["checks"] = checks;
    j["bridge"] = b;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPsd && e.code() != ErrorCode::NoFactorizationFound) throw;
    j["bridge_skipped"] = e.what();
  }
  emit(j);
  return conv ? 0 : 3;
}

int cmd_mix_time(const Args& a) {
  ReportStyle st{a.c.exact};
  auto phi = phi_from_name(a.c.phi);
  auto rp = make_reversible(load_dist(a.mu), load_channel(a.channel));
  double eta = 0.0;
  bool conv = true;
  if (a.eta) {
    eta = *a.eta;
  } else {
    auto pair = validate_admissible(rp.mu, rp.m);
    auto o = eta_options(a.c);
    o.opconv_cap = false;
    auto r = eta_report(phi, pair, o);
    eta = r.estimate;
    conv = r.converged;
  }
  auto m = mixing_time_bound(phi, rp, a.eps, eta);
  Json j;
  j["command"] = "mix-time";
  j["phi"] = phi.name;
  j["eta"] = number(eta, st);
  j["eps"] = number(a.eps, st);
  j["d_star"] = number(m.d_star, st);
  j["t_bound"] = m.t_bound;
  j["dominated"] = m.dominated;
  j["reached"] = m.reached;
  Json traj = Json::array();
  for (std::size_t t = 0; t < m.trajectory.size(); ++t)
    traj.push_back(Json::array({t, number(m.trajectory[t], st), number(m.envelope[t], st)}));
  j["trajectory"] = traj;
  emit(j);
  return conv ? 0 : 3;
}

int cmd_fmmc(const Args& a) {
  ReportStyle st{a.c.exact};
  Graph g = load_graph(a.graph);
  Dist mu = a.mu.empty() ? Dist::uniform(g.n) : load_dist(a.mu);
  auto r = fmmc_solve(g, mu);
  Json j;
  j["command"] = "fmmc";
  j["value"] = number(r.value, st);
  j["slem"] = number(std::sqrt(r.value), st);
  j["iterations"] = r.iterations;
  j["kernel"] = channel_json(r.kernel, st);
  Json c;
  c["eigenvalue"] = number(r.cert_eigenvalue, st);
  c["vector"] = vector_json(r.cert_vector, st);
  c["residual"] = number(r.cert_residual, st);
  j["certificate"] = c;
  return emit(j);
}

GraphModel model(const Args& a) {
  GraphModel gm{load_graph(a.graph), a.q, a.beta, {}};
  return gm;
}

int cmd_potts(const Args& a) {
  ReportStyle st{a.c.exact};
  auto gm = model(a);
  auto phi = phi_from_name(a.c.phi);
  auto k = potts_kernels(gm);
  auto r = sw_hb_compare(gm, phi, eta_options(a.c));
  Json j;
  j["command"] = "potts";
  j["phi"] = phi.name;
  j["states"] = k.gibbs.size();
  j["max_degree"] = r.max_degree;
  j["gibbs"] = vector_json(k.gibbs.mass(), st);
  j["eta_hb"] = number(r.eta_hb, st);
  j["eta_sw"] = number(r.eta_sw, st);
  j["sw_vs_hb_bound"] = number(r.our_bound, st);
  if (r.ullrich_bound) j["ullrich_bound"] = number(*r.ullrich_bound, st);
  j["sw_within_bound"] = r.sw_within_ours;
  j["bound_below_ullrich"] = r.ours_below_ullrich;
  if (a.kernels || k.gibbs.size() <= 16) {
    j["hb"] = matrix_json(k.hb.rows(), st);
    j["sw"] = matrix_json(k.sw.rows(), st);
  }
  emit(j);
  return r.converged ? 0 : 3;
}

int cmd_info_sup(const Args& a) {
  ReportStyle st{a.c.exact};
  auto phi = phi_from_name(a.c.phi);
  Dist mu = load_dist(a.mu);
  Channel k = load_channel(a.channel);
  auto joint = JointLaw::from_pair(mu, k);
  std::vector<double> grid;
  if (!a.eps_grid.empty()) grid = parse_real_list(a.eps_grid, "--eps-grid");
  auto r = info_contraction_sup(phi, joint, a.samples, grid, eta_options(a.c));
  Json j;
  j["command"] = "info-sup";
  j["phi"] = phi.name;
  j["sup_estimate"] = number(r.sup_estimate, st);
  j["eta_reference"] = number(r.eta_reference, st);
  j["gap"] = number(r.gap, st);
  j["best_source"] = r.best_source;
  j["consistent"] = r.consistent;
  emit(j);
  return r.consistent ? 0 : 3;
}

int cmd_reconstruct(const Args& a) {
  ReportStyle st{a.c.exact};
  auto gm = model(a);
  auto phi = phi_from_name(a.c.phi);
  auto sa = parse_index_list(a.a_set, "--a"), sb = parse_index_list(a.b_set, "--b");
  std::optional<SpatialConstants> sc;
  if (a.big_c || a.small_c) {
    if (!a.big_c || !a.small_c) throw Error(ErrorCode::ValidationError, "--C and --c go together");
    sc = SpatialConstants{*a.big_c, *a.small_c};
  }
  auto r = reconstruction_report(gm, sa, sb, phi, sc, eta_options(a.c));
  Json j;
  j["command"] = "reconstruct";
  j["phi"] = phi.name;
  j["info"] = number(r.info, st);
  j["info_chi2"] = number(r.info_chi2, st);
  j["s_squared"] = number(r.s_squared, st);
  j["distance"] = r.reachable ? Json(r.distance) : Json("inf");
  j["eta_ab"] = number(r.eta_ab, st);
  j["eta_ba"] = number(r.eta_ba, st);
  j["product_lower_bound"] = number(r.product_lower, st);
  j["product_holds"] = r.product_holds;
  if (r.spatial_bound) {
    j["boundary"] = r.boundary;
    j["spatial_eta"] = number(*r.spatial_eta, st);
    j["spatial_bound"] = number(*r.spatial_bound, st);
  }
  return emit(j);
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double got) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << got << ")\n";
    if (!ok) ++failures;
  };
  EtaOptions o;
  o.opconv_cap = false;
  for (double e : {0.05, 0.2, 0.45}) {
    auto pair = validate_admissible(Dist::bern(0.5), Channel::bsc(e));
    double want = (1 - 2 * e) * (1 - 2 * e);
    double s2 = eta_chi2(pair).eta;
    check("bsc chi2 eta at " + std::to_string(e), std::abs(s2 - want) <= 1e-10, s2);
    double kl = eta_numeric(phi_kl(), pair, o).estimate;
    check("bsc kl eta at " + std::to_string(e), std::abs(kl - want) <= 1e-5, kl);
    double d = dobrushin(pair.k);
    check("bsc dobrushin at " + std::to_string(e), std::abs(d - (1 - 2 * e)) <= 1e-15, d);
    auto rp = make_reversible(Dist::bern(0.5), Channel::bsc(e));
    double lt = poincare_constant(rp).lambda_tilde;
    check("dsbs gap at " + std::to_string(e), std::abs(lt - 2 * e) <= 1e-10, lt);
    auto f = factor_through(rp);
    double delta = 0.5 * (1 + std::sqrt(1 - 2 * e));
    check("dsbs factor at " + std::to_string(e), std::abs(f.k(0, 1) - delta) <= 1e-12 && f.residual < 1e-12,
          f.k(0, 1));
  }
  double path = graph_rw_bound(Graph::path(3), 0.4).bound;
  check("two-edge path bound at 0.4", std::abs(path - 0.68) <= 1e-12, path);
  for (std::size_t n : {2, 4, 7}) {
    double d = mixing_d_star(phi_kl(), Dist::uniform(n));
    check("kl d_star on uniform " + std::to_string(n), std::abs(d - std::log(static_cast<double>(n))) <= 1e-12, d);
  }
  return failures == 0 ? 0 : 1;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NonConverged:
    case ErrorCode::BridgeViolation:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contraction coefficients, Sobolev constants and their applications on finite alphabets"};
  app.require_subcommand(1);
  Args a;

  auto* div = app.add_subcommand("divergence", "D_Φ(ν‖μ)");
  add_common(div, a.c);
  div->add_option("--nu", a.nu)->required();
  div->add_option("--mu", a.mu)->required();

  auto* eta = app.add_subcommand("eta", "contraction coefficient with its bound ladder");
  auto* bnd = app.add_subcommand("bounds", "bound ladder without the ascent");
  for (auto* s : {eta, bnd}) {
    add_common(s, a.c);
    s->add_option("--mu", a.mu)->required();
    s->add_option("--channel", a.channel)->required();
    s->add_flag("--no-opconv", a.no_opconv, "skip the operator-convex cap sweep");
  }

  auto* adj = app.add_subcommand("adjoint", "backward channel K*");
  add_common(adj, a.c, false);
  adj->add_option("--mu", a.mu)->required();
  adj->add_option("--channel", a.channel)->required();

  auto* ten = app.add_subcommand("tensor", "product channel and tensorization check");
  add_common(ten, a.c);
  ten->add_option("--channel", a.channel)->required();
  ten->add_option("--channel2", a.channel2)->required();
  ten->add_option("--mu", a.mu);
  ten->add_option("--mu2", a.mu2);

  auto* sob = app.add_subcommand("sobolev", "Poincaré and log-Sobolev constants with the SDPI bridge");
  auto* fac = app.add_subcommand("factor", "factor a reversible kernel as K*K");
  for (auto* s : {sob, fac}) {
    add_common(s, a.c, s == sob);
    s->add_option("--mu", a.mu)->required();
    s->add_option("--channel", a.channel, "reversible kernel")->required();
    s->add_option("--strategy", a.strategy, "auto, dsbs, spectral, parametric");
    s->add_option("--intermediate", a.intermediate, "intermediate alphabet size for parametric search");
  }

  auto* mix = app.add_subcommand("mix-time", "mixing-time bound with exact trajectory");
  add_common(mix, a.c);
  mix->add_option("--mu", a.mu)->required();
  mix->add_option("--channel", a.channel)->required();
  mix->add_option("--eps", a.eps)->check(CLI::PositiveNumber);
  mix->add_option("--eta", a.eta, "use this η instead of the numeric estimate");

  auto* fm = app.add_subcommand("fmmc", "fastest mixing reversible chain on a graph");
  add_common(fm, a.c, false);
  fm->add_option("--graph", a.graph)->required();
  fm->add_option("--mu", a.mu);

  auto* po = app.add_subcommand("potts", "heat-bath vs Swendsen-Wang");
  auto* rc = app.add_subcommand("reconstruct", "correlation decay report");
  for (auto* s : {po, rc}) {
    add_common(s, a.c);
    s->add_option("--graph", a.graph)->required();
    s->add_option("--q", a.q)->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
    s->add_option("--beta", a.beta)->check(CLI::NonNegativeNumber);
  }
  po->add_flag("--kernels", a.kernels, "print both kernels regardless of size");
  rc->add_option("--a", a.a_set)->required();
  rc->add_option("--b", a.b_set)->required();
  rc->add_option("--C", a.big_c);
  rc->add_option("--c", a.small_c);

  auto* is = app.add_subcommand("info-sup", "sup of I_Φ(U;Y)/I_Φ(U;X)");
  add_common(is, a.c);
  is->add_option("--mu", a.mu)->required();
  is->add_option("--channel", a.channel)->required();
  is->add_option("--samples", a.samples);
  is->add_option("--eps-grid", a.eps_grid, "fractions of the largest admissible ε");

  auto* st = app.add_subcommand("selftest", "closed-form checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*div) return cmd_divergence(a);
    if (*eta) return cmd_eta(a, false);
    if (*bnd) return cmd_eta(a, true);
    if (*adj) return cmd_adjoint(a);
    if (*ten) return cmd_tensor(a);
    if (*sob) return cmd_sobolev(a);
    if (*fac) return cmd_factor(a);
    if (*mix) return cmd_mix_time(a);
    if (*fm) return cmd_fmmc(a);
    if (*po) return cmd_potts(a);
    if (*rc) return cmd_reconstruct(a);
    if (*is) return cmd_info_sup(a);
    if (*st) return cmd_selftest();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
