#include <doctest.h>

#include "pottsflow/oracle.hpp"
#include "pottsflow/synthetic.hpp"
#include "pottsflow/two_label.hpp"

using namespace pottsflow;
using Field = ScalarFieldXd;
using VField = VectorField2Xd;
using Problem = TwoLabelProblem<double>;
using State = TwoLabelState<double>;
using Params = SolverParams<double>;

namespace {

Problem pixel_problem(double cs, double ct, double alpha = 0.5) {
  return {Field::Constant(1, 1, cs), Field::Constant(1, 1, ct), alpha};
}

Problem random_problem(GridShape s, double alpha, std::uint64_t seed) {
  return {random_field(s, 0.0, 1.0, seed), random_field(s, 0.0, 1.0, seed + 1), alpha};
}

State random_state(GridShape s, std::uint64_t seed) {
  State st = State::zero(s);
  st.u = random_field(s, -1, 1, seed);
  st.ps = random_field(s, -1, 1, seed + 1);
  st.pt = random_field(s, -1, 1, seed + 2);
  st.q = {random_field(s, -1, 1, seed + 3), random_field(s, -1, 1, seed + 4)};
  st.q_bar = {random_field(s, -1, 1, seed + 5), random_field(s, -1, 1, seed + 6)};
  st.pt_bar = random_field(s, -1, 1, seed + 7);
  st.ps_bar = random_field(s, -1, 1, seed + 8);
  st.u_bar = random_field(s, -1, 1, seed + 9);
  return st;
}

// Saddle state of the single-pixel problem with cs > ct: u* = 1 and both
// flows sit at min(cs, ct).
State pixel_saddle() {
  State st = State::zero({1, 1});
  st.u = Field::Constant(1, 1, 1.0);
  st.ps = Field::Constant(1, 1, 0.3);
  st.pt = Field::Constant(1, 1, 0.3);
  st.u_bar = st.u;
  return st;
}

double max_state_diff(const State& a, const State& b) {
  double d = 0;
  auto acc = [&d](const Field& x, const Field& y) {
    d = std::max(d, (x - y).abs().maxCoeff());
  };
  acc(a.u, b.u);
  acc(a.ps, b.ps);
  acc(a.pt, b.pt);
  acc(a.q.x, b.q.x);
  acc(a.q.y, b.q.y);
  acc(a.q_bar.x, b.q_bar.x);
  acc(a.q_bar.y, b.q_bar.y);
  acc(a.pt_bar, b.pt_bar);
  acc(a.ps_bar, b.ps_bar);
  acc(a.u_bar, b.u_bar);
  return d;
}

}  // namespace

TEST_CASE("primal energy on single pixels and a hand-evaluated 2x2") {
  Problem p = pixel_problem(0.7, 0.3);
  CHECK(energy_primal(Field(Field::Constant(1, 1, 1.0)), p) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(energy_primal(Field(Field::Zero(1, 1)), p) == doctest::Approx(0.7).epsilon(1e-14));

  Problem p4{Field::Constant(2, 2, 0.7), Field::Constant(2, 2, 0.3), 0.5};
  Field u(2, 2);
  u << 1, 1, 0, 0;
  CHECK(energy_primal(u, p4) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("residual norm on single pixels") {
  State st = State::zero({1, 1});
  CHECK(residual_norm(st) == 0.0);
  st.pt = Field::Constant(1, 1, 0.3);
  st.ps = st.pt;
  CHECK(residual_norm(st) == 0.0);
  st.ps = Field::Constant(1, 1, 0.7);
  CHECK(residual_norm(st) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("padmm-ty worked single-pixel step") {
  Problem p = pixel_problem(0.7, 0.3);
  State st = State::zero({1, 1});
  step_padmm_ty(st, p, Params{});
  CHECK(st.q.x(0, 0) == 0.0);
  CHECK(st.ps(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(st.pt(0, 0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(st.u(0, 0) == doctest::Approx(0.12).epsilon(1e-13));
}

TEST_CASE("rpadmm-i worked single-pixel step") {
  Problem p = pixel_problem(0.7, 0.3);
  State st = State::zero({1, 1});
  step_rpadmm_i(st, p, Params{});
  CHECK(st.pt(0, 0) == 0.0);
  CHECK(st.ps(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(st.u(0, 0) == doctest::Approx(1.618 * 0.3 * 0.7).epsilon(1e-13));
}

TEST_CASE("rpadmm-ii worked single-pixel step") {
  Problem p = pixel_problem(0.7, 0.3);
  State st = State::zero({1, 1});
  step_rpadmm_ii(st, p, Params{});
  CHECK(st.pt(0, 0) == 0.0);
  CHECK(st.ps(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(st.u(0, 0) == doctest::Approx(0.21).epsilon(1e-13));
}

TEST_CASE("rpdrq worked single-pixel step") {
  Problem p = pixel_problem(0.7, 0.3);
  Params prm = with_two_label_defaults(Params{}, Algorithm::RPdrq);
  REQUIRE(prm.sigma == doctest::Approx(0.2));
  REQUIRE(prm.tau == doctest::Approx(1.0));
  State st = State::zero({1, 1});
  step_rpdrq(st, p, prm);
  CHECK(st.u(0, 0) == 0.0);
  CHECK(st.pt(0, 0) == 0.0);
  CHECK(st.ps(0, 0) == 0.0);
  CHECK(st.pt_bar(0, 0) == 0.0);
  CHECK(st.ps_bar(0, 0) == doctest::Approx(1.33).epsilon(1e-13));
}

TEST_CASE("alg1 worked single-pixel step") {
  Problem p = pixel_problem(0.7, 0.3);
  Params prm = with_two_label_defaults(Params{}, Algorithm::Alg1);
  REQUIRE(prm.sigma == doctest::Approx(0.4));
  REQUIRE(prm.tau == doctest::Approx(0.25));
  State st = State::zero({1, 1});
  step_alg1(st, p, prm);
  CHECK(st.pt(0, 0) == 0.0);
  CHECK(st.ps(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(st.u(0, 0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(st.u_bar(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("saddle states are fixed points of every step") {
  Problem p = pixel_problem(0.7, 0.3);

  SUBCASE("padmm-ty") {
    State st = pixel_saddle();
    State before = st;
    step_padmm_ty(st, p, Params{});
    CHECK(max_state_diff(st, before) <= 1e-14);
  }
  SUBCASE("rpadmm-i") {
    State st = pixel_saddle();
    State before = st;
    step_rpadmm_i(st, p, Params{});
    CHECK(max_state_diff(st, before) <= 1e-14);
  }
  SUBCASE("rpadmm-ii") {
    State st = pixel_saddle();
    State before = st;
    step_rpadmm_ii(st, p, Params{});
    CHECK(max_state_diff(st, before) <= 1e-14);
  }
  SUBCASE("alg1") {
    Params prm = with_two_label_defaults(Params{}, Algorithm::Alg1);
    State st = pixel_saddle();
    State before = st;
    step_alg1(st, p, prm);
    CHECK(max_state_diff(st, before) <= 1e-14);
  }
  SUBCASE("rpdrq") {
    Params prm = with_two_label_defaults(Params{}, Algorithm::RPdrq);
    State st = pixel_saddle();
    // consistent shadow point: pt_bar = ct - tau, ps_bar = ps + tau
    st.pt_bar = Field::Constant(1, 1, 0.3 - prm.tau);
    st.ps_bar = Field::Constant(1, 1, 0.3 + prm.tau);
    State before = st;
    step_rpdrq(st, p, prm);
    CHECK(max_state_diff(st, before) <= 1e-14);
  }
}

TEST_CASE("relaxation enters rpadmm-i only through the multiplier step") {
  const GridShape s{5, 4};
  Problem p = random_problem(s, 0.5, 2024);
  State a = random_state(s, 10), b = a;
  Params pa;  // r = 1.618
  Params pb;
  pb.r = 1.0;
  step_rpadmm_i(a, p, pa);
  step_rpadmm_i(b, p, pb);
  CHECK((a.q.x - b.q.x).abs().maxCoeff() == 0.0);
  CHECK((a.q.y - b.q.y).abs().maxCoeff() == 0.0);
  CHECK((a.pt - b.pt).abs().maxCoeff() == 0.0);
  CHECK((a.ps - b.ps).abs().maxCoeff() == 0.0);
  // multiplier increments scale exactly by r
  State base = random_state(s, 10);
  Field da = a.u - base.u, db = b.u - base.u;
  CHECK((da - 1.618 * db).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("rpdrq relaxation scales the shadow increments of the plain reflection") {
  const GridShape s{4, 3};
  Problem p = random_problem(s, 0.5, 55);
  State a = random_state(s, 77), b = a;
  const State before = a;
  Params plain = with_two_label_defaults(Params{}, Algorithm::RPdrq);
  plain.rho = 1.0;  // plain Douglas-Rachford reflection
  Params relaxed = plain;
  relaxed.rho = 1.9;
  step_rpdrq(a, p, plain);
  step_rpdrq(b, p, relaxed);
  // the unrelaxed blocks coincide, the shadow increments scale by rho
  CHECK((a.u - b.u).abs().maxCoeff() == 0.0);
  CHECK((a.pt - b.pt).abs().maxCoeff() == 0.0);
  CHECK((a.q_bar.x - before.q_bar.x - (b.q_bar.x - before.q_bar.x) / 1.9).abs().maxCoeff() <=
        1e-14);
  CHECK((a.pt_bar - before.pt_bar - (b.pt_bar - before.pt_bar) / 1.9).abs().maxCoeff() <= 1e-14);
  CHECK((a.ps_bar - before.ps_bar - (b.ps_bar - before.ps_bar) / 1.9).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("rho = 1 collapses the rpadmm-ii multiplier update") {
  const GridShape s{4, 4};
  Problem p = random_problem(s, 0.5, 99);
  State a = random_state(s, 20);
  Params prm;
  prm.rho = 1.0;
  State before = a;
  step_rpadmm_ii(a, p, prm);
  Field dq = divergence(a.q);
  Field expect = before.u - prm.c * (a.pt - a.ps + dq);
  CHECK((a.u - expect).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("ADMM-family steps keep dual variables feasible") {
  const GridShape s{6, 5};
  Problem p = random_problem(s, 0.5, 7);
  for (int rep = 0; rep < 5; ++rep) {
    for (auto algo : {Algorithm::PAdmmTy, Algorithm::RpAdmmI, Algorithm::RpAdmmII}) {
      State st = random_state(s, 1000 * rep + 17);
      Params prm = with_two_label_defaults(Params{}, algo);
      step(algo, st, p, prm);
      CHECK(magnitude(st.q).maxCoeff() <= p.alpha + 1e-12);
      CHECK((st.ps - p.cs).maxCoeff() <= 1e-12);
      CHECK((st.pt - p.ct).maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("threshold rule and binary invariance") {
  Field u = Field::Constant(1, 1, 0.5);
  CHECK(threshold(u, 0.5)(0, 0) == 1.0);
  u(0, 0) = 0.49;
  CHECK(threshold(u, 0.5)(0, 0) == 0.0);
  Field b(2, 2);
  b << 0, 1, 1, 0;
  for (double beta : {0.25, 0.5, 0.75}) CHECK((threshold(b, beta) == b).all());
  CHECK_THROWS_AS((void)threshold(u, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)threshold(u, 1.0), std::invalid_argument);
}

TEST_CASE("parameter guards") {
  Params prm;
  CHECK_NOTHROW(check_two_label_params(Algorithm::RpAdmmII, prm));
  prm.rho = 2.0;
  CHECK_THROWS_AS(check_two_label_params(Algorithm::RpAdmmII, prm), std::invalid_argument);
  prm = Params{};
  prm.r = 1.62;
  CHECK_THROWS_AS(check_two_label_params(Algorithm::RpAdmmI, prm), std::invalid_argument);
  prm = Params{};
  prm.a = 7.9;
  CHECK_THROWS_AS(check_two_label_params(Algorithm::PAdmmTy, prm), std::invalid_argument);
  prm = Params{};
  prm.a_tilde = 1.5;
  CHECK_THROWS_AS(check_two_label_params(Algorithm::RpAdmmI, prm), std::invalid_argument);

  prm = Params{};
  prm.sigma = 0.4;
  prm.tau = 0.25;
  CHECK_NOTHROW(check_two_label_params(Algorithm::Alg1, prm));  // 10*sigma*tau = 1
  prm.tau = 0.26;
  CHECK_THROWS_AS(check_two_label_params(Algorithm::Alg1, prm), std::invalid_argument);
}

TEST_CASE("every algorithm solves the single-pixel problem") {
  Problem p = pixel_problem(0.7, 0.3);
  for (auto algo : {Algorithm::PAdmmTy, Algorithm::RpAdmmI, Algorithm::RpAdmmII,
                    Algorithm::RPdrq, Algorithm::Alg1}) {
    Params prm;
    prm.eps = 1e-10;
    prm.max_iters = 20000;
    auto res = run(algo, p, prm, StopRule::self_relative());
    CHECK(relative_gap(res.final_energy, 0.3) <= 1e-6);
  }
}

TEST_CASE("a tolerance above the initial relative error stops after one iteration") {
  Problem p = pixel_problem(0.7, 0.3);
  Params prm;
  prm.eps = 2.0;  // initial relative error is |0.7 - 0.3| / 0.3 = 4/3
  auto res = run(Algorithm::RpAdmmII, p, prm, StopRule::with_reference(0.3));
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.trace.size() == 1);
}

TEST_CASE("all five algorithms agree on a 16x16 random instance") {
  Problem p = random_problem({16, 16}, 0.5, 4242);
  const double eref = compute_reference_energy(p, 30000);
  std::vector<double> energies;
  for (auto algo : {Algorithm::PAdmmTy, Algorithm::RpAdmmI, Algorithm::RpAdmmII,
                    Algorithm::RPdrq, Algorithm::Alg1}) {
    Params prm;
    prm.eps = 1e-6;
    prm.max_iters = 200000;
    auto res = run(algo, p, prm, StopRule::with_reference(eref));
    CHECK(res.converged);
    energies.push_back(res.final_energy);
  }
  for (double e : energies)
    for (double f : energies) CHECK(relative_gap(e, f) <= 1e-5);
}

TEST_CASE("residuals decay on a fixed 32x32 instance") {
  Problem p = two_label_disk_instance(32);
  for (auto algo : {Algorithm::RpAdmmI, Algorithm::RpAdmmII, Algorithm::RPdrq,
                    Algorithm::Alg1}) {
    Params prm = with_two_label_defaults(Params{}, algo);
    State st = State::zero(p.shape());
    for (int k = 0; k < 5000; ++k) step(algo, st, p, prm);
    CHECK(residual_norm(st) < 1e-3);
  }
}

TEST_CASE("dual objective sandwiches the primal energy at convergence") {
  Problem p = two_label_disk_instance(24);
  Params prm;
  prm.eps = 1e-8;
  prm.max_iters = 100000;
  auto res = run(Algorithm::RpAdmmII, p, prm, StopRule::self_relative());
  const double dual = res.state.ps.sum();
  const double primal = energy_primal(res.state.u, p);
  const double slack = 1e-6 * (1.0 + std::abs(primal));
  CHECK(dual <= primal + slack);
  for (int rep = 0; rep < 5; ++rep) {
    Field u = random_field(p.shape(), 0.0, 1.0, 800 + rep);
    CHECK(dual <= energy_primal(u, p) + slack);
  }
  CHECK(relative_gap(dual, primal) <= 1e-3);
}

TEST_CASE("thresholding is binarily optimal whenever the relaxed minimizer is integral") {
  int integral_cases = 0;
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7}) {
    Problem p = random_problem({3, 3}, seed % 2 ? 0.2 : 0.5, 31000 + seed);
    auto oracle = brute_force_mincut(p);
    Params prm;
    prm.eps = 1e-8;
    prm.max_iters = 200000;
    auto res = run(Algorithm::RpAdmmII, p, prm, StopRule::self_relative());
    Field bin = threshold(res.state.u, 0.5);
    const double e_bin = energy_primal(bin, p);
    const double e_rel = energy_primal(res.state.u, p);
    // the sandwich holds on every instance (slack covers the 1e-8 relative
    // stopping rule on energies of magnitude a few units)
    CHECK(e_rel <= oracle.energy + 1e-6);
    CHECK(e_bin >= oracle.energy - 1e-12);
    const bool integral = ((res.state.u < 0.02) || (res.state.u > 0.98)).all();
    if (integral) {
      ++integral_cases;
      CHECK(e_bin == doctest::Approx(oracle.energy).epsilon(1e-8));
    }
  }
  CHECK(integral_cases >= 4);
}

TEST_CASE("the isotropic discretization admits a strict relaxation gap") {
  // a fractional relaxed minimizer: corner-smoothing costs sqrt(2) < 2 under
  // the pixelwise Euclidean gradient magnitude, so the relaxed optimum can
  // fall strictly below the binary optimum and no threshold is exact
  const std::uint64_t seed = 50000 + 17 * 13;
  Problem p{random_field({3, 3}, 0, 1, seed), random_field({3, 3}, 0, 1, seed + 1), 0.2};
  auto oracle = brute_force_mincut(p);
  Params prm;
  prm.eps = 1e-10;
  prm.max_iters = 200000;
  auto res = run(Algorithm::RpAdmmII, p, prm, StopRule::self_relative());
  CHECK(residual_norm(res.state) < 1e-6);
  CHECK(energy_primal(res.state.u, p) < oracle.energy - 1e-3);
  CHECK(energy_primal(threshold(res.state.u, 0.5), p) > oracle.energy + 1e-4);
}
