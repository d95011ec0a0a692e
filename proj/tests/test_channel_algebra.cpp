#include <doctest.h>

#include <cmath>
#include <random>

#include <contractkit/channel_algebra.hpp>
#include <contractkit/contraction.hpp>

#include "oracles.hpp"

using namespace ck;
using oracle::V;

namespace {

double max_abs(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

AdmissiblePair random_pair(std::mt19937_64& r, std::size_t nx, std::size_t ny) {
  auto mu = oracle::rand_simplex(r, nx, 0.05);
  auto k = oracle::rand_channel(r, nx, ny, 0.02);
  return validate_admissible(Dist(oracle::from_v(mu)), Channel(oracle::from_m(k)));
}

void check_stochastic(const Channel& k) {
  for (Eigen::Index x = 0; x < k.rows().rows(); ++x) {
    CHECK(std::abs(k.rows().row(x).sum() - 1.0) < 1e-12);
    CHECK(k.rows().row(x).minCoeff() >= 0.0);
  }
}

}  // namespace

TEST_CASE("adjoint examples") {
  for (double e : {0.05, 0.2, 0.4}) {
    auto a = adjoint(validate_admissible(Dist::bern(0.5), Channel::bsc(e)));
    CHECK(max_abs(a.rows(), Channel::bsc(e).rows()) < 1e-15);
  }
  double p = 0.3, e = 0.15;
  auto a = adjoint(validate_admissible(Dist::bern(p), Channel::bsc(e)));
  double expect = (1 - e) * (1 - p) / ((1 - e) * (1 - p) + e * p);
  CHECK(a(0, 0) == doctest::Approx(expect).epsilon(1e-14));
  auto id = adjoint(validate_admissible(Dist(oracle::from_v({0.2, 0.5, 0.3})), Channel::identity(3)));
  CHECK(max_abs(id.rows(), Mat::Identity(3, 3)) < 1e-15);
}

TEST_CASE("adjoint duality and involution") {
  auto r = oracle::rng(21);
  for (int t = 0; t < 100; ++t) {
    auto pair = random_pair(r, 2 + t % 3, 2 + (t / 3) % 3);
    auto ks = adjoint(pair);
    check_stochastic(ks);
    std::normal_distribution<double> n;
    Vec f(static_cast<Eigen::Index>(pair.mu.size())), g(static_cast<Eigen::Index>(pair.output_law.size()));
    for (auto& x : f) x = n(r);
    for (auto& x : g) x = n(r);
    // f lives on X, g on Y.
    double lhs = pair.mu.mass().dot(f.cwiseProduct(apply_fn(pair.k, g)));
    double rhs = pair.output_law.mass().dot(apply_fn(ks, f).cwiseProduct(g));
    CHECK(std::abs(lhs - rhs) < 1e-12);
    auto back = adjoint(validate_admissible(pair.output_law, ks));
    CHECK(max_abs(back.rows(), pair.k.rows()) < 1e-12);
  }
}

TEST_CASE("apply and apply_fn") {
  double p = 0.3, e = 0.2;
  auto out = apply(Channel::bsc(e), Dist::bern(p));
  CHECK(out[1] == doctest::Approx(p * (1 - e) + (1 - p) * e).epsilon(1e-15));
  auto r = oracle::rng(22);
  auto k = Channel(oracle::from_m(oracle::rand_channel(r, 3, 4)));
  Vec one = apply_fn(k, Vec::Ones(4));
  CHECK((one.array() - 1.0).abs().maxCoeff() < 1e-15);
  Vec f(2);
  f << 0.0, 1.0;
  Vec kf = apply_fn(Channel::bsc(0.2), f);
  CHECK(kf[0] == doctest::Approx(0.2));
  CHECK(kf[1] == doctest::Approx(0.8));
  try {
    apply(k, Dist::bern(0.5));
    FAIL("no throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::AlphabetMismatch);
  }
}

TEST_CASE("compose and tensor") {
  double a = 0.1, b = 0.3;
  auto c = compose(Channel::bsc(a), Channel::bsc(b));
  CHECK(max_abs(c.rows(), Channel::bsc(a * (1 - b) + b * (1 - a)).rows()) < 1e-15);
  auto ii = tensor(Channel::identity(2), Channel::identity(3));
  CHECK(max_abs(ii.rows(), Mat::Identity(6, 6)) < 1e-15);
  auto bb = tensor(Channel::bsc(0.2), Channel::bsc(0.2));
  check_stochastic(bb);
  // Leftmost factor most significant: index = 2·x1 + x2.
  auto t = tensor(Channel::bsc(0.1), Channel::bsc(0.3));
  CHECK(t(1 * 2 + 0, 0 * 2 + 1) == doctest::Approx(0.1 * 0.3));
  CHECK(t(0, 1) == doctest::Approx(0.9 * 0.3));
  try {
    compose(Channel::bsc(0.1), Channel::identity(3));
    FAIL("no throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::AlphabetMismatch);
  }
  auto d = tensor(Dist::bern(0.2), Dist::bern(0.7));
  CHECK(d[3] == doctest::Approx(0.14));
}

TEST_CASE("compose and tensor associativity") {
  auto r = oracle::rng(23);
  for (int t = 0; t < 30; ++t) {
    auto a = Channel(oracle::from_m(oracle::rand_channel(r, 2, 3)));
    auto b = Channel(oracle::from_m(oracle::rand_channel(r, 3, 2)));
    auto c = Channel(oracle::from_m(oracle::rand_channel(r, 2, 2)));
    CHECK(max_abs(compose(compose(c, b), a).rows(), compose(c, compose(b, a)).rows()) < 1e-14);
    CHECK(max_abs(tensor(tensor(a, b), c).rows(), tensor(a, tensor(b, c)).rows()) < 1e-14);
    // compose(a, b) runs b first.
    CHECK(max_abs(compose(b, a).rows(), a.rows() * b.rows()) < 1e-14);
  }
}

TEST_CASE("mixture_local") {
  auto single = mixture_local({Channel::bsc(0.2)}, Dist::uniform(1));
  CHECK(max_abs(single.rows(), Channel::bsc(0.2).rows()) < 1e-15);
  double e = 0.2;
  auto mix = mixture_local({Channel::bsc(e), Channel::bsc(e)}, Dist::uniform(2));
  check_stochastic(mix);
  // Oracle: half the time flip site 1, half the time site 2.
  Mat expect = 0.5 * (oracle::from_m({{1 - e, 0, e, 0}, {0, 1 - e, 0, e}, {e, 0, 1 - e, 0}, {0, e, 0, 1 - e}}) +
                      oracle::from_m({{1 - e, e, 0, 0}, {e, 1 - e, 0, 0}, {0, 0, 1 - e, e}, {0, 0, e, 1 - e}}));
  CHECK(max_abs(mix.rows(), expect) < 1e-15);
  auto pair = validate_admissible(Dist::uniform(4), mix);
  CHECK(eta_chi2(pair).eta <= 1 - 4 * e * (1 - e) / 2 + 1e-12);
  try {
    mixture_local({Channel(oracle::from_m({{0.5, 0.5, 0.0}, {0.2, 0.3, 0.5}}))}, Dist::uniform(1));
    FAIL("no throw");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Domain);
  }
}

TEST_CASE("doeblin_alpha") {
  for (double e : {0.0, 0.1, 0.35, 0.5}) {
    auto d = doeblin_alpha(Channel::bsc(e));
    CHECK(d.alpha == doctest::Approx(2 * e).epsilon(1e-15));
    if (e > 0) {
      REQUIRE(d.base.has_value());
      CHECK((*d.base)[0] == doctest::Approx(0.5));
    }
  }
  auto id = doeblin_alpha(Channel::identity(2));
  CHECK(id.alpha == 0.0);
  CHECK_FALSE(id.base.has_value());
  auto c = doeblin_alpha(Channel::constant(Dist(oracle::from_v({0.2, 0.8})), 3));
  CHECK(c.alpha == doctest::Approx(1.0));
}

TEST_CASE("erasure decomposition reconstructs K") {
  auto r = oracle::rng(24);
  for (int t = 0; t < 50; ++t) {
    auto k = Channel(oracle::from_m(oracle::rand_channel(r, 3, 3, 0.3)));
    auto d = doeblin_alpha(k);
    REQUIRE(d.alpha > 0.0);
    auto dec = erasure_decomposition(k, d.alpha);
    CHECK(dec.erasure.outputs() == k.inputs() + 1);
    // Erasure symbol is the last output.
    for (std::size_t x = 0; x < k.inputs(); ++x) CHECK(dec.erasure(x, k.inputs()) == doctest::Approx(d.alpha));
    CHECK(max_abs(compose(dec.tail, dec.erasure).rows(), k.rows()) < 1e-12);
  }
}

TEST_CASE("exchangeable pair") {
  for (double d : {0.1, 0.3}) {
    auto ex = exchangeable_pair(validate_admissible(Dist::bern(0.5), Channel::bsc(d)));
    double eps = 2 * d * (1 - d);
    Mat dsbs(2, 2);
    dsbs << (1 - eps) / 2, eps / 2, eps / 2, (1 - eps) / 2;
    CHECK(max_abs(ex.joint.mass(), dsbs) < 1e-15);
  }
  Vec mu(3);
  mu << 0.2, 0.3, 0.5;
  auto idx = exchangeable_pair(validate_admissible(Dist(mu), Channel::identity(3)));
  CHECK(max_abs(idx.joint.mass(), Mat(mu.asDiagonal())) < 1e-15);

  auto r = oracle::rng(25);
  for (int t = 0; t < 100; ++t) {
    auto pair = random_pair(r, 2 + t % 3, 2 + (t / 2) % 3);
    auto ex = exchangeable_pair(pair);
    const Mat& m = ex.joint.mass();
    CHECK(max_abs(m, m.transpose()) < 1e-14);
    CHECK((m.rowwise().sum() - pair.mu.mass()).cwiseAbs().maxCoeff() < 1e-14);
    // Density update: K*f = d(νK)/d(μK) for f = dν/dμ.
    auto nu = oracle::rand_simplex(r, pair.mu.size());
    Vec f = oracle::from_v(nu).cwiseQuotient(pair.mu.mass());
    Vec lhs = apply_fn(adjoint(pair), f);
    Vec rhs = apply(pair.k, Dist(oracle::from_v(nu))).mass().cwiseQuotient(pair.output_law.mass());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}
