#include <doctest.h>

#include <cmath>
#include <random>

#include <contractkit/applications.hpp>
#include <contractkit/channel_algebra.hpp>

#include "oracles.hpp"

using namespace ck;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ck::Error");
  return ErrorCode::Domain;
}

EtaOptions fast() {
  EtaOptions o;
  o.starts = 8;
  return o;
}

GraphModel edge_model(double beta) { return GraphModel{Graph::path(2), 2, beta, {}}; }

}  // namespace

TEST_CASE("mixing d_star") {
  for (std::size_t n : {2, 4, 7}) CHECK(mixing_d_star(phi_kl(), Dist::uniform(n)) == doctest::Approx(std::log(n)));
  // General law: worst vertex is the lightest one.
  Vec mu(3);
  mu << 0.2, 0.3, 0.5;
  CHECK(mixing_d_star(phi_kl(), Dist(mu)) == doctest::Approx(std::log(5.0)));
  CHECK(mixing_d_star(phi_chi2(), Dist::uniform(4)) == doctest::Approx(3.0));
  // Reverse KL: Φ(u) = −log u, unbounded at 0.
  auto rkl = make_generator("revkl", [](double u) { return -std::log(u); }, INFINITY, PhiFlags{false, false, true});
  CHECK(code_of([&] { mixing_d_star(rkl, Dist::uniform(2)); }) == ErrorCode::Domain);
  CHECK(mixing_d_star(phi_lecam(0.5), Dist::uniform(2)) == doctest::Approx(0.5 * phi_lecam(0.5)(2.0) + 0.25));
}

TEST_CASE("mixing time bound examples") {
  auto rp = make_reversible(Dist::bern(0.5), Channel::bsc(0.2));
  auto z = mixing_time_bound(phi_kl(), rp, 1.0, 0.36);
  CHECK(z.t_bound == 0);
  auto r = mixing_time_bound(phi_kl(), rp, 1e-3, 0.36);
  CHECK(r.t_bound == static_cast<std::size_t>(std::ceil(std::log(std::log(2.0) / 1e-3) / std::log(1 / 0.36))));
  CHECK(r.dominated);
  CHECK(r.reached);
  REQUIRE(r.trajectory.size() == r.t_bound + 1);
  // Oracle: from δ_0, BSC(0.2)^t flips with probability (1 − 0.6^t)/2.
  for (std::size_t t = 0; t <= r.t_bound; ++t) {
    double p = (1 - std::pow(0.6, double(t))) / 2;
    double d = oracle::kl({1 - p, p}, {0.5, 0.5});
    CHECK(r.trajectory[t] == doctest::Approx(d).epsilon(1e-10));
  }
  CHECK(code_of([&] { mixing_time_bound(phi_kl(), rp, 1e-3, 1.0); }) == ErrorCode::Domain);
  CHECK(code_of([&] { mixing_time_bound(phi_kl(), rp, 0.0, 0.5); }) == ErrorCode::Domain);
}

TEST_CASE("mixing trajectories are dominated on random reversible chains") {
  auto g = oracle::rng(41);
  for (int t = 0; t < 20; ++t) {
    auto [mu, k] = oracle::rand_reversible(g, 3 + t % 3);
    auto rp = make_reversible(Dist(oracle::from_v(mu)), Channel(oracle::from_m(k)));
    double eta = dobrushin(rp.m);
    REQUIRE(eta < 1.0);
    for (const auto& phi : {phi_kl(), phi_chi2()}) {
      auto rep = mixing_time_bound(phi, rp, 1e-4, eta);
      CHECK(rep.dominated);
      CHECK(rep.reached);
      for (std::size_t s = 0; s < rep.trajectory.size(); ++s) CHECK(rep.trajectory[s] <= rep.envelope[s] + 1e-12);
    }
  }
}

TEST_CASE("fmmc trivial cases") {
  auto two = fmmc_solve(Graph::path(2), Dist::uniform(2));
  CHECK(two.value < 1e-8);
  CHECK(two.kernel(0, 1) == doctest::Approx(0.5).epsilon(1e-4));
  auto k3 = fmmc_solve(Graph::complete(3), Dist::uniform(3));
  CHECK(k3.value < 1e-8);
  CHECK(code_of([] { fmmc_solve(Graph(3, {{0, 1}}), Dist::uniform(3)); }) == ErrorCode::Disconnected);
}

TEST_CASE("fmmc on the 3-path matches a grid oracle") {
  double oracle_value = oracle::p3_grid_oracle();
  auto res = fmmc_solve(Graph::path(3), Dist::uniform(3));
  CHECK(std::abs(res.value - oracle_value) < 1e-6);
  CHECK(res.cert_residual < 1e-8);
  // Kernel is symmetric, stochastic and zero off the edges.
  const Mat& k = res.kernel.rows();
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(k(0, 2) == 0.0);
  CHECK((k.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(std::abs(fmmc_objective(Graph::path(3), Dist::uniform(3), Vec::Constant(2, 1.0 / 6)) - 0.25) < 1e-12);
  // History of best values never goes up.
  for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] <= res.history[i - 1] + 1e-15);
}

TEST_CASE("fmmc is invariant under relabeling") {
  Graph a(4, {{0, 1}, {1, 2}, {2, 3}, {1, 3}});
  // Permutation 0→2, 1→0, 2→3, 3→1.
  Graph b(4, {{2, 0}, {0, 3}, {3, 1}, {0, 1}});
  double va = fmmc_solve(a, Dist::uniform(4)).value;
  double vb = fmmc_solve(b, Dist::uniform(4)).value;
  CHECK(std::abs(va - vb) < 1e-8);
  CHECK(va >= 0.0);
  CHECK(va <= 1.0);
}

TEST_CASE("gibbs law of a single edge") {
  auto g = gibbs(edge_model(std::log(2.0)));
  double expect[] = {2.0 / 6, 1.0 / 6, 1.0 / 6, 2.0 / 6};
  for (int i = 0; i < 4; ++i) CHECK(g[static_cast<std::size_t>(i)] == doctest::Approx(expect[i]).epsilon(1e-14));
  auto u = gibbs(GraphModel{Graph::path(3), 3, 0.0, {}});
  for (std::size_t i = 0; i < 27; ++i) CHECK(u[i] == doctest::Approx(1.0 / 27));
  auto c = decode_config(5, 2, 3);
  CHECK(c == std::vector<std::size_t>{1, 0, 1});
  CHECK(code_of([] { gibbs(GraphModel{Graph::path(13), 2, 0.1, {}}); }) == ErrorCode::SizeLimit);
}

TEST_CASE("potts kernels leave gibbs invariant and the coupling is consistent") {
  std::vector<GraphModel> models = {edge_model(0.0), edge_model(0.5), GraphModel{Graph::path(3), 3, 0.7, {}},
                                    GraphModel{Graph(4, {{0, 1}, {0, 2}, {0, 3}}), 2, 0.3, {}}};
  for (const auto& gm : models) {
    auto k = potts_kernels(gm);
    const Vec& pi = k.gibbs.mass();
    CHECK((k.hb.rows().transpose() * pi - pi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((k.sw.rows().transpose() * pi - pi).cwiseAbs().maxCoeff() < 1e-10);
    Mat flow = pi.asDiagonal() * k.sw.rows();
    CHECK((flow - flow.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Mat hflow = pi.asDiagonal() * k.hb.rows();
    CHECK((hflow - hflow.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((k.coupling.mass().rowwise().sum() - pi).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Random-cluster marginal on one edge: ∅ ∝ (1−p)q², {e} ∝ pq.
  double beta = 0.5, p = 1 - std::exp(-beta);
  auto k = potts_kernels(edge_model(beta));
  Vec col = k.coupling.mass().colwise().sum();
  double z = (1 - p) * 4 + p * 2;
  CHECK(std::abs(col[0] - (1 - p) * 4 / z) < 1e-12);
  CHECK(std::abs(col[1] - p * 2 / z) < 1e-12);
}

TEST_CASE("swendsen-wang mixes in one step at infinite temperature") {
  auto k = potts_kernels(GraphModel{Graph::path(3), 2, 0.0, {}});
  CHECK(eta_chi2(validate_admissible(k.gibbs, k.sw)).eta < 1e-12);
  auto rep = sw_hb_compare(edge_model(0.0), phi_kl(), fast());
  CHECK(rep.sw_within_ours);
  CHECK(rep.eta_sw < 1e-8);
}

TEST_CASE("sw vs hb comparison") {
  for (double beta : {0.0, 0.5}) {
    auto gm = edge_model(beta);
    auto k = potts_kernels(gm);
    auto chi = sw_hb_compare(gm, phi_chi2(), fast());
    CHECK(chi.sw_within_ours);
    CHECK(chi.ours_below_ullrich);
    REQUIRE(chi.ullrich_bound.has_value());
    CHECK(chi.our_bound <= *chi.ullrich_bound + 1e-12);
    // Brute-force oracle for the heat-bath kernel: χ² η = second eigenvalue².
    Mat s = k.gibbs.mass().cwiseSqrt().asDiagonal() * k.hb.rows() *
            k.gibbs.mass().cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
    auto ev = es.eigenvalues();
    double second = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 2]));
    CHECK(std::abs(chi.eta_hb - second * second) < 1e-5);
    auto kl = sw_hb_compare(gm, phi_kl(), fast());
    CHECK(kl.sw_within_ours);
  }
  auto star = sw_hb_compare(GraphModel{Graph(4, {{0, 1}, {0, 2}, {0, 3}}), 2, 0.001, {}}, phi_chi2(), fast());
  CHECK(star.max_degree == 3);
  CHECK(star.ours_below_ullrich);
  CHECK(*star.ullrich_bound - star.our_bound > 0);
  CHECK(code_of([] { sw_hb_compare(edge_model(0.1), phi_tv()); }) == ErrorCode::UnsupportedPhi);
}

TEST_CASE("sw and ullrich bound formulas") {
  CHECK(sw_bound(2, 0.0, 1, 0.5) == doctest::Approx(1 - 0.75 / (8 - 0.25)));
  double root = 1 - (1 - std::sqrt(0.5)) / (2 * 64);
  CHECK(ullrich_bound(2, 0.0, 1, 0.5) == doctest::Approx(root * root));
}

TEST_CASE("information contraction supremum") {
  double e = 0.2;
  auto joint = JointLaw::from_pair(Dist::bern(0.5), Channel::bsc(e));
  auto kl = info_contraction_sup(phi_kl(), joint, 200, {}, fast());
  CHECK(kl.consistent);
  CHECK(kl.sup_estimate >= 0.9 * (1 - 2 * e) * (1 - 2 * e));
  CHECK(kl.sup_estimate <= kl.eta_reference + 1e-6);
  auto g = oracle::rng(42);
  for (int t = 0; t < 5; ++t) {
    auto mu = oracle::rand_simplex(g, 2, 0.1);
    auto k = oracle::rand_channel(g, 2, 2, 0.05);
    Dist px(oracle::from_v(mu));
    Channel kc(oracle::from_m(k));
    auto rep = info_contraction_sup(phi_chi2(), JointLaw::from_pair(px, kc), 200, {}, fast());
    double s2 = eta_chi2(validate_admissible(px, kc)).eta;
    CHECK(std::abs(rep.sup_estimate - s2) < 1e-4);
    CHECK(rep.consistent);
  }
}

TEST_CASE("phi information of a mixture") {
  // U uniform on two values, X|U deterministic: I(U;X) = H(X) = log 2.
  Mat xu = Mat::Identity(2, 2);
  CHECK(phi_information_mixture(phi_kl(), Vec::Constant(2, 0.5), xu, Dist::uniform(2)) ==
        doctest::Approx(std::log(2.0)));
  // U independent of X.
  Mat same(2, 2);
  same << 0.3, 0.7, 0.3, 0.7;
  CHECK(std::abs(phi_information_mixture(phi_kl(), Vec::Constant(2, 0.5), same, Dist::bern(0.7))) < 1e-15);
}

TEST_CASE("reconstruction on small Potts models") {
  auto zero = reconstruction_report(GraphModel{Graph::path(3), 2, 0.0, {}}, {0}, {2}, phi_kl(), std::nullopt, fast());
  CHECK(std::abs(zero.info) < 1e-14);
  CHECK(zero.distance == 2);
  double prev = 0.0;
  for (double beta : {0.2, 0.5, 1.0, 2.0}) {
    GraphModel gm{Graph::path(3), 2, beta, {}};
    auto rep = reconstruction_report(gm, {0}, {2}, phi_kl(), std::nullopt, fast());
    // Oracle: endpoints agree with prob (e^{2β} + 1)/(e^{2β} + 1 + 2e^β), both marginals uniform.
    double a = std::exp(2 * beta) + 1, d = 2 * std::exp(beta);
    double agree = a / (a + d);
    double mi = std::log(2.0) - (-(agree * std::log(agree) + (1 - agree) * std::log(1 - agree)));
    CHECK(rep.info == doctest::Approx(mi).epsilon(1e-10));
    CHECK(rep.info > prev);
    prev = rep.info;
    CHECK(rep.s_squared <= rep.info_chi2 + 1e-12);
    CHECK(rep.product_holds);
  }
  CHECK(code_of([] { reconstruction_report(GraphModel{Graph::path(3), 2, 0.5, {}}, {0, 1}, {1}, phi_kl()); }) ==
        ErrorCode::OverlappingSets);
  CHECK(code_of([] { reconstruction_report(GraphModel{Graph::path(13), 2, 0.5, {}}, {0}, {1}, phi_kl()); }) ==
        ErrorCode::SizeLimit);
  auto far = reconstruction_report(GraphModel{Graph(3, {{0, 1}}), 2, 0.5, {}}, {0}, {2}, phi_kl(), std::nullopt,
                                   fast());
  CHECK_FALSE(far.reachable);
  CHECK(std::abs(far.info) < 1e-14);
}

TEST_CASE("gibbs sampler product bound on random binary joints") {
  auto g = oracle::rng(43);
  for (int t = 0; t < 30; ++t) {
    Dist px(oracle::from_v(oracle::rand_simplex(g, 2, 0.1)));
    Channel k(oracle::from_m(oracle::rand_channel(g, 2, 2, 0.05)));
    auto pair = validate_admissible(px, k);
    auto back = validate_admissible(pair.output_law, adjoint(pair));
    double prod = eta_numeric(phi_kl(), pair, fast()).estimate * eta_numeric(phi_kl(), back, fast()).estimate;
    // X → Y → X′ and Y → X → Y′.
    double ixx = phi_information(phi_kl(), JointLaw::from_pair(px, compose(adjoint(pair), k)));
    double ix = phi_information(phi_kl(), JointLaw::from_pair(px, Channel::identity(2)));
    double iyy = phi_information(phi_kl(), JointLaw::from_pair(pair.output_law, compose(k, adjoint(pair))));
    double iy = phi_information(phi_kl(), JointLaw::from_pair(pair.output_law, Channel::identity(2)));
    CHECK(prod >= std::max(ixx / ix, iyy / iy) - 1e-5);
  }
}
