// n-label continuous max-flow solvers for the convex-relaxed Potts model.
// The same five schemes as the two-label case, generalized from their
// four-label component forms to arbitrary n with block preconditioning
// on the (p_1..p_n, p_s) variables.
#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "pottsflow/flow_update.hpp"
#include "pottsflow/grid.hpp"
#include "pottsflow/prox.hpp"
#include "pottsflow/solver.hpp"
#include "pottsflow/srbgs.hpp"

namespace pottsflow {

template <typename Scalar>
struct PottsProblem {
  std::vector<ScalarField<Scalar>> costs;  // one field per label
  Scalar alpha{Scalar(0.5)};

  int n() const { return static_cast<int>(costs.size()); }
  GridShape shape() const { return shape_of(costs.at(0)); }

  void validate() const {
    if (n() < 2) throw std::invalid_argument("PottsProblem: needs at least two labels");
    const GridShape s = shape();
    if (!s.valid()) throw std::invalid_argument("PottsProblem: empty grid");
    for (const auto& c : costs) {
      if (shape_of(c) != s) throw std::invalid_argument("PottsProblem: cost shapes differ");
      if (!c.allFinite()) throw std::invalid_argument("PottsProblem: costs must be finite");
    }
    if (!(alpha >= Scalar(0))) throw std::invalid_argument("PottsProblem: alpha must be >= 0");
  }
};

/// Diagonal block weights for the (p_1..p_n, p_s) proximal term. Feasibility
/// requires a1 >= 2 and a2 >= 2n; the flow blocks need a >= 8.
template <typename Scalar>
struct BlockPreconditioner {
  Scalar a{Scalar(8)};
  Scalar a1{Scalar(2)};
  Scalar a2{Scalar(0)};  // 0: use the default 2n

  static BlockPreconditioner defaults_for(int n) {
    return {Scalar(8), Scalar(2), Scalar(2 * n)};
  }

  void validate(int n) const {
    if (a < Scalar(8)) throw std::invalid_argument("BlockPreconditioner: a must be >= 8");
    if (a1 < Scalar(2)) throw std::invalid_argument("BlockPreconditioner: a1 must be >= 2");
    if (a2 < Scalar(2 * n)) throw std::invalid_argument("BlockPreconditioner: a2 must be >= 2n");
  }
};

template <typename Scalar>
struct PottsState {
  std::vector<ScalarField<Scalar>> u, p;
  ScalarField<Scalar> ps;
  std::vector<VectorField2<Scalar>> q;
  // Douglas-Rachford shadow variables
  std::vector<VectorField2<Scalar>> q_bar;
  std::vector<ScalarField<Scalar>> p_bar;
  ScalarField<Scalar> ps_bar;
  // Chambolle-Pock extrapolated multipliers
  std::vector<ScalarField<Scalar>> u_bar;

  static PottsState zero(GridShape s, int n) {
    PottsState st;
    ScalarField<Scalar> z = ScalarField<Scalar>::Zero(s.height, s.width);
    st.u.assign(n, z);
    st.p.assign(n, z);
    st.ps = z;
    st.q.assign(n, VectorField2<Scalar>::Zero(s));
    st.q_bar.assign(n, VectorField2<Scalar>::Zero(s));
    st.p_bar.assign(n, z);
    st.ps_bar = z;
    st.u_bar.assign(n, z);
    return st;
  }
};

/// Relaxed Potts energy; multipliers are projected onto the pixelwise
/// simplex before evaluation.
template <typename Scalar>
Scalar energy_potts(const std::vector<ScalarField<Scalar>>& u,
                    const PottsProblem<Scalar>& prob) {
  std::vector<ScalarField<Scalar>> us = project_simplex(u);
  Scalar e = Scalar(0);
  for (int i = 0; i < prob.n(); ++i) {
    e += (us[i] * prob.costs[i]).sum();
    e += prob.alpha * magnitude(gradient(us[i])).sum();
  }
  return e;
}

/// max_i ||div q_i + p_i - p_s||_2.
template <typename Scalar>
Scalar residual_norm(const PottsState<Scalar>& st) {
  Scalar worst = Scalar(0);
  for (std::size_t i = 0; i < st.q.size(); ++i) {
    const Scalar r = norm(ScalarField<Scalar>(divergence(st.q[i]) + st.p[i] - st.ps));
    worst = std::max(worst, r);
  }
  return worst;
}

/// Per-pixel label of the largest multiplier; ties go to the lowest index.
template <typename Scalar>
Eigen::ArrayXXi argmax_label(const std::vector<ScalarField<Scalar>>& u) {
  const Eigen::Index h = u.at(0).rows(), w = u.at(0).cols();
  Eigen::ArrayXXi lab = Eigen::ArrayXXi::Zero(h, w);
  for (Eigen::Index j = 0; j < w; ++j)
    for (Eigen::Index i = 0; i < h; ++i) {
      int best = 0;
      Scalar bv = u[0](i, j);
      for (int k = 1; k < static_cast<int>(u.size()); ++k)
        if (u[k](i, j) > bv) {
          bv = u[k](i, j);
          best = k;
        }
      lab(i, j) = best;
    }
  return lab;
}

template <typename Scalar>
void check_potts_params(Algorithm algo, const SolverParams<Scalar>& p,
                        const BlockPreconditioner<Scalar>& pc, int n) {
  detail::check_common(p);
  switch (algo) {
    case Algorithm::PAdmmTy:
      if (pc.a < Scalar(8)) throw std::invalid_argument("params: a must be >= 8");
      break;
    case Algorithm::RpAdmmI:
      pc.validate(n);
      detail::check_r(p.r);
      break;
    case Algorithm::RpAdmmII:
      pc.validate(n);
      detail::check_rho(p.rho);
      break;
    case Algorithm::RPdrq:
      detail::check_sigma_tau(p);
      detail::check_rho(p.rho);
      break;
    case Algorithm::Alg1:
      detail::check_sigma_tau(p);
      if (Scalar(9 + n) * p.sigma * p.tau > Scalar(1) + Scalar(1e-12))
        throw std::invalid_argument("params: alg1 needs (9+n)*sigma*tau <= 1");
      break;
  }
}

template <typename Scalar>
void step_padmm_ty_multi(PottsState<Scalar>& st, const PottsProblem<Scalar>& prob,
                         const SolverParams<Scalar>& p,
                         const BlockPreconditioner<Scalar>& pc) {
  const int n = prob.n();
  const Scalar c = p.c;
  std::vector<ScalarField<Scalar>> dq(n);
  for (int i = 0; i < n; ++i) {
    st.q[i] = detail::admm_flow_update(
        st.q[i], ScalarField<Scalar>(st.p[i] - st.ps - st.u[i] / c), pc.a, prob.alpha);
    dq[i] = divergence(st.q[i]);
  }
  // source block is refreshed before and after the sink updates so that the
  // sink projections see the current source flow
  auto source_average = [&](const std::vector<ScalarField<Scalar>>& sink) {
    ScalarField<Scalar> acc = ScalarField<Scalar>::Zero(st.ps.rows(), st.ps.cols());
    for (int i = 0; i < n; ++i) acc += sink[i] + dq[i] - st.u[i] / c;
    return ScalarField<Scalar>(acc / Scalar(n) + Scalar(1) / (Scalar(n) * c));
  };
  st.ps = source_average(st.p);
  for (int i = 0; i < n; ++i)
    st.p[i] = project_cap(ScalarField<Scalar>(st.ps - dq[i] + st.u[i] / c), prob.costs[i]);
  st.ps = source_average(st.p);
  for (int i = 0; i < n; ++i) st.u[i] -= c * (st.p[i] - st.ps + dq[i]);
}

template <typename Scalar>
void step_rpadmm_i_multi(PottsState<Scalar>& st, const PottsProblem<Scalar>& prob,
                         const SolverParams<Scalar>& p,
                         const BlockPreconditioner<Scalar>& pc) {
  const int n = prob.n();
  const Scalar c = p.c;
  std::vector<ScalarField<Scalar>> dq(n);
  for (int i = 0; i < n; ++i) {
    st.q[i] = detail::admm_flow_update(
        st.q[i], ScalarField<Scalar>(st.p[i] - st.ps - st.u[i] / c), pc.a, prob.alpha);
    dq[i] = divergence(st.q[i]);
  }
  std::vector<ScalarField<Scalar>> p_old = st.p;
  ScalarField<Scalar> ps_old = st.ps;
  for (int i = 0; i < n; ++i)
    st.p[i] = project_cap(
        ScalarField<Scalar>(p_old[i] - (p_old[i] - ps_old - st.u[i] / c + dq[i]) / pc.a1),
        prob.costs[i]);
  ScalarField<Scalar> acc = ScalarField<Scalar>::Zero(st.ps.rows(), st.ps.cols());
  for (int i = 0; i < n; ++i) acc += dq[i];
  for (int i = 0; i < n; ++i) acc += p_old[i] - ps_old - st.u[i] / c;
  st.ps = ps_old + (acc + Scalar(1) / c) / pc.a2;
  for (int i = 0; i < n; ++i) st.u[i] -= p.r * c * (dq[i] + st.p[i] - st.ps);
}

template <typename Scalar>
void step_rpadmm_ii_multi(PottsState<Scalar>& st, const PottsProblem<Scalar>& prob,
                          const SolverParams<Scalar>& p,
                          const BlockPreconditioner<Scalar>& pc) {
  const int n = prob.n();
  const Scalar c = p.c, rho = p.rho;
  std::vector<ScalarField<Scalar>> dq(n);
  for (int i = 0; i < n; ++i) {
    st.q[i] = detail::admm_flow_update(
        st.q[i], ScalarField<Scalar>(st.p[i] - st.ps - st.u[i] / c), pc.a, prob.alpha);
    dq[i] = divergence(st.q[i]);
  }
  std::vector<ScalarField<Scalar>> p_old = st.p;
  ScalarField<Scalar> ps_old = st.ps;
  for (int i = 0; i < n; ++i)
    st.p[i] = project_cap(
        ScalarField<Scalar>(p_old[i] -
                            (rho * (p_old[i] - ps_old) - st.u[i] / c + rho * dq[i]) / pc.a1),
        prob.costs[i]);
  ScalarField<Scalar> acc = ScalarField<Scalar>::Zero(st.ps.rows(), st.ps.cols());
  for (int i = 0; i < n; ++i) acc += rho * dq[i];
  for (int i = 0; i < n; ++i) acc += rho * (p_old[i] - ps_old) - st.u[i] / c;
  st.ps = ps_old + (acc + Scalar(1) / c) / pc.a2;
  // multiplier line of the relaxed scheme: unit weight on the fresh
  // (p_i - p_s), relaxation on the flow term and the lagged correction
  for (int i = 0; i < n; ++i)
    st.u[i] -= c * ((st.p[i] - st.ps) - (Scalar(1) - rho) * (p_old[i] - ps_old) +
                    rho * dq[i]);
}

template <typename Scalar>
void step_rpdrq_multi(PottsState<Scalar>& st, const PottsProblem<Scalar>& prob,
                      const SolverParams<Scalar>& p) {
  const int n = prob.n();
  const Scalar sigma = p.sigma, tau = p.tau, rho = p.rho;
  const HelmholtzOp<Scalar> t0{Scalar(n + 1) * sigma * tau, sigma * tau, prob.shape()};

  // b_i folds the off-diagonal coupling of the labels into the right-hand
  // side, leaving a decoupled Helmholtz solve per label
  std::vector<ScalarField<Scalar>> u_new(n);
  for (int i = 0; i < n; ++i) {
    ScalarField<Scalar> other = ScalarField<Scalar>::Zero(st.ps.rows(), st.ps.cols());
    for (int j = 0; j < n; ++j)
      if (j != i) other += st.u[j];
    ScalarField<Scalar> b =
        -sigma * (divergence(st.q_bar[i]) + st.p_bar[i] - st.ps_bar) +
        sigma * tau * (Scalar(n - 1) * st.u[i] - other);
    u_new[i] = srbgs_apply(t0, b, st.u[i]);
  }
  st.u = u_new;

  ScalarField<Scalar> usum = ScalarField<Scalar>::Zero(st.ps.rows(), st.ps.cols());
  for (int i = 0; i < n; ++i) {
    VectorField2<Scalar> gu = gradient(st.u[i]);
    st.q[i] = {st.q_bar[i].x - tau * gu.x, st.q_bar[i].y - tau * gu.y};
    st.p[i] = st.p_bar[i] + tau * st.u[i];
    usum += st.u[i];
  }
  st.ps = st.ps_bar - tau * usum;

  for (int i = 0; i < n; ++i) {
    VectorField2<Scalar> refl{Scalar(2) * st.q[i].x - st.q_bar[i].x,
                              Scalar(2) * st.q[i].y - st.q_bar[i].y};
    VectorField2<Scalar> pq = project_ball(refl, prob.alpha);
    st.q_bar[i].x += rho * (pq.x - st.q[i].x);
    st.q_bar[i].y += rho * (pq.y - st.q[i].y);
    st.p_bar[i] += rho * (project_cap(ScalarField<Scalar>(Scalar(2) * st.p[i] - st.p_bar[i]),
                                      prob.costs[i]) -
                          st.p[i]);
  }
  st.ps_bar += rho * ((Scalar(2) * st.ps - st.ps_bar + tau) - st.ps);
}

template <typename Scalar>
void step_alg1_multi(PottsState<Scalar>& st, const PottsProblem<Scalar>& prob,
                     const SolverParams<Scalar>& p) {
  const int n = prob.n();
  const Scalar sigma = p.sigma, tau = p.tau;
  ScalarField<Scalar> ubar_sum = ScalarField<Scalar>::Zero(st.ps.rows(), st.ps.cols());
  for (int i = 0; i < n; ++i) {
    VectorField2<Scalar> gu = gradient(st.u_bar[i]);
    st.q[i] = project_ball(
        VectorField2<Scalar>{st.q[i].x - sigma * gu.x, st.q[i].y - sigma * gu.y}, prob.alpha);
    st.p[i] = project_cap(ScalarField<Scalar>(st.p[i] + sigma * st.u_bar[i]), prob.costs[i]);
    ubar_sum += st.u_bar[i];
  }
  st.ps = st.ps - sigma * ubar_sum + sigma;
  for (int i = 0; i < n; ++i) {
    ScalarField<Scalar> u_old = st.u[i];
    st.u[i] -= tau * (divergence(st.q[i]) + st.p[i] - st.ps);
    st.u_bar[i] = Scalar(2) * st.u[i] - u_old;
  }
}

template <typename Scalar>
void step_potts(Algorithm algo, PottsState<Scalar>& st, const PottsProblem<Scalar>& prob,
                const SolverParams<Scalar>& p, const BlockPreconditioner<Scalar>& pc) {
  switch (algo) {
    case Algorithm::PAdmmTy: step_padmm_ty_multi(st, prob, p, pc); break;
    case Algorithm::RpAdmmI: step_rpadmm_i_multi(st, prob, p, pc); break;
    case Algorithm::RpAdmmII: step_rpadmm_ii_multi(st, prob, p, pc); break;
    case Algorithm::RPdrq: step_rpdrq_multi(st, prob, p); break;
    case Algorithm::Alg1: step_alg1_multi(st, prob, p); break;
  }
}

template <typename Scalar>
Scalar compute_reference_energy_potts(const PottsProblem<Scalar>& prob, int iters) {
  SolverParams<Scalar> p =
      with_potts_defaults(SolverParams<Scalar>{}, Algorithm::RPdrq, prob.n());
  PottsState<Scalar> st = PottsState<Scalar>::zero(prob.shape(), prob.n());
  for (int k = 0; k < iters; ++k) step_rpdrq_multi(st, prob, p);
  return energy_potts(st.u, prob);
}

template <typename Scalar>
struct PottsRunResult {
  PottsState<Scalar> state;
  Trace trace;
  bool converged{false};
  int iterations{0};
  Scalar final_energy{0};
  Scalar reference_energy{std::numeric_limits<Scalar>::quiet_NaN()};
};

template <typename Scalar>
PottsRunResult<Scalar> run_potts(Algorithm algo, const PottsProblem<Scalar>& prob,
                                 SolverParams<Scalar> params,
                                 BlockPreconditioner<Scalar> pc,
                                 StopRule rule = StopRule{}) {
  prob.validate();
  const int n = prob.n();
  if (pc.a2 == Scalar(0)) pc.a2 = Scalar(2 * n);
  params = with_potts_defaults(params, algo, n);
  check_potts_params(algo, params, pc, n);

  PottsRunResult<Scalar> out;
  if (rule.policy == StopPolicy::Reference) {
    out.reference_energy =
        rule.reference
            ? Scalar(*rule.reference)
            : compute_reference_energy_potts(prob, std::max(30000, 10 * params.max_iters));
  }

  out.state = PottsState<Scalar>::zero(prob.shape(), n);
  double e_prev = static_cast<double>(energy_potts(out.state.u, prob));
  int consecutive_hits = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= params.max_iters; ++k) {
    step_potts(algo, out.state, prob, params, pc);
    const double e = static_cast<double>(energy_potts(out.state.u, prob));
    const double rel = rule.policy == StopPolicy::Reference
                           ? relative_gap(e, static_cast<double>(out.reference_energy))
                           : relative_gap(e_prev, e);
    const double res = static_cast<double>(residual_norm(out.state));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    out.trace.push_back({k, e, rel, res, ms});
    out.iterations = k;
    out.final_energy = Scalar(e);
    consecutive_hits = rel <= static_cast<double>(params.eps) ? consecutive_hits + 1 : 0;
    if (rule.policy == StopPolicy::Reference ? consecutive_hits >= 1
                                             : consecutive_hits >= 2) {
      out.converged = true;
      break;
    }
    e_prev = e;
  }
  return out;
}

}  // namespace pottsflow
