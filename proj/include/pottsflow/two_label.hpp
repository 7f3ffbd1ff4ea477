// Foreground/background continuous max-flow solvers. Five first-order
// schemes over the shared dual variables (p_s, p_t, q) and multiplier u:
//
//   padmm-ty   multi-block proximal ADMM (no convergence guarantee)
//   rpadmm-i   relaxed preconditioned ADMM, Fortin-Glowinski relaxation
//   rpadmm-ii  relaxed preconditioned ADMM, Eckstein-Bertsekas relaxation
//   rpdrq      relaxed preconditioned Douglas-Rachford splitting
//   alg1       Chambolle-Pock primal-dual with extrapolation
//
// The flow-conservation residual is div q + p_t - p_s.
#pragma once

#include <chrono>
#include <cmath>

#include "pottsflow/flow_update.hpp"
#include "pottsflow/grid.hpp"
#include "pottsflow/prox.hpp"
#include "pottsflow/solver.hpp"
#include "pottsflow/srbgs.hpp"

namespace pottsflow {

template <typename Scalar>
struct TwoLabelProblem {
  ScalarField<Scalar> cs;  // capacities for labelling a pixel background
  ScalarField<Scalar> ct;  // capacities for labelling a pixel foreground
  Scalar alpha{Scalar(0.5)};

  GridShape shape() const { return shape_of(cs); }

  void validate() const {
    if (cs.rows() != ct.rows() || cs.cols() != ct.cols())
      throw std::invalid_argument("TwoLabelProblem: capacity shapes differ");
    if (!shape().valid()) throw std::invalid_argument("TwoLabelProblem: empty grid");
    if (!cs.allFinite() || !ct.allFinite())
      throw std::invalid_argument("TwoLabelProblem: capacities must be finite");
    if (!(alpha >= Scalar(0))) throw std::invalid_argument("TwoLabelProblem: alpha must be >= 0");
  }
};

template <typename Scalar>
struct TwoLabelState {
  ScalarField<Scalar> u, ps, pt;
  VectorField2<Scalar> q;
  // Douglas-Rachford shadow variables
  VectorField2<Scalar> q_bar;
  ScalarField<Scalar> pt_bar, ps_bar;
  // Chambolle-Pock extrapolated multiplier
  ScalarField<Scalar> u_bar;

  static TwoLabelState zero(GridShape s) {
    TwoLabelState st;
    st.u = ScalarField<Scalar>::Zero(s.height, s.width);
    st.ps = st.u;
    st.pt = st.u;
    st.q = VectorField2<Scalar>::Zero(s);
    st.q_bar = VectorField2<Scalar>::Zero(s);
    st.pt_bar = st.u;
    st.ps_bar = st.u;
    st.u_bar = st.u;
    return st;
  }
};

/// Primal segmentation energy; the labelling is clipped into [0,1] before
/// evaluation since multiplier iterates are unconstrained mid-run.
template <typename Scalar>
Scalar energy_primal(const ScalarField<Scalar>& u, const TwoLabelProblem<Scalar>& prob) {
  ScalarField<Scalar> uc = u.max(Scalar(0)).min(Scalar(1));
  const Scalar data = ((Scalar(1) - uc) * prob.cs + uc * prob.ct).sum();
  const Scalar tv = magnitude(gradient(uc)).sum();
  return data + prob.alpha * tv;
}

/// Flow-conservation violation ||div q + p_t - p_s||_2.
template <typename Scalar>
Scalar residual_norm(const TwoLabelState<Scalar>& st) {
  return norm(ScalarField<Scalar>(divergence(st.q) + st.pt - st.ps));
}

template <typename Scalar>
void step_padmm_ty(TwoLabelState<Scalar>& st, const TwoLabelProblem<Scalar>& prob,
                   const SolverParams<Scalar>& p) {
  const Scalar c = p.c;
  st.q = detail::admm_flow_update(st.q, ScalarField<Scalar>(st.pt - st.ps - st.u / c),
                                  p.a, prob.alpha);
  ScalarField<Scalar> dq = divergence(st.q);
  st.ps = project_cap(ScalarField<Scalar>(st.pt + dq - st.u / c + Scalar(1) / c), prob.cs);
  st.pt = project_cap(ScalarField<Scalar>(st.ps - dq + st.u / c), prob.ct);
  st.u -= c * (st.pt - st.ps + dq);
}

template <typename Scalar>
void step_rpadmm_i(TwoLabelState<Scalar>& st, const TwoLabelProblem<Scalar>& prob,
                   const SolverParams<Scalar>& p) {
  const Scalar c = p.c, at = p.a_tilde;
  st.q = detail::admm_flow_update(st.q, ScalarField<Scalar>(st.pt - st.ps - st.u / c),
                                  p.a, prob.alpha);
  ScalarField<Scalar> dq = divergence(st.q);
  // the p-block has a diagonal proximal weight, so both halves use iterate k
  ScalarField<Scalar> pt_old = st.pt, ps_old = st.ps;
  st.pt = project_cap(
      ScalarField<Scalar>(pt_old - (pt_old - ps_old) / at + (-dq + st.u / c) / at),
      prob.ct);
  st.ps = project_cap(
      ScalarField<Scalar>(ps_old - (ps_old - pt_old) / at + (dq - st.u / c + Scalar(1) / c) / at),
      prob.cs);
  st.u -= p.r * c * (st.pt - st.ps + dq);
}

template <typename Scalar>
void step_rpadmm_ii(TwoLabelState<Scalar>& st, const TwoLabelProblem<Scalar>& prob,
                    const SolverParams<Scalar>& p) {
  const Scalar c = p.c, at = p.a_tilde, rho = p.rho;
  st.q = detail::admm_flow_update(st.q, ScalarField<Scalar>(st.pt - st.ps - st.u / c),
                                  p.a, prob.alpha);
  ScalarField<Scalar> dq = divergence(st.q);
  ScalarField<Scalar> pt_old = st.pt, ps_old = st.ps;
  st.pt = project_cap(
      ScalarField<Scalar>(pt_old - rho * (pt_old - ps_old) / at + (-rho * dq + st.u / c) / at),
      prob.ct);
  st.ps = project_cap(
      ScalarField<Scalar>(ps_old - rho * (ps_old - pt_old) / at +
                          (rho * dq - st.u / c + Scalar(1) / c) / at),
      prob.cs);
  st.u -= c * ((st.pt - st.ps) - (Scalar(1) - rho) * (pt_old - ps_old) + rho * dq);
}

template <typename Scalar>
void step_rpdrq(TwoLabelState<Scalar>& st, const TwoLabelProblem<Scalar>& prob,
                const SolverParams<Scalar>& p) {
  const Scalar sigma = p.sigma, tau = p.tau, rho = p.rho;
  const HelmholtzOp<Scalar> tq{Scalar(2) * sigma * tau, sigma * tau, prob.shape()};
  ScalarField<Scalar> b = -sigma * (divergence(st.q_bar) + st.pt_bar - st.ps_bar);
  st.u = srbgs_apply(tq, b, st.u);

  VectorField2<Scalar> gu = gradient(st.u);
  st.q = {st.q_bar.x - tau * gu.x, st.q_bar.y - tau * gu.y};
  st.pt = st.pt_bar + tau * st.u;
  st.ps = st.ps_bar - tau * st.u;

  VectorField2<Scalar> refl{Scalar(2) * st.q.x - st.q_bar.x, Scalar(2) * st.q.y - st.q_bar.y};
  VectorField2<Scalar> pq = project_ball(refl, prob.alpha);
  st.q_bar.x += rho * (pq.x - st.q.x);
  st.q_bar.y += rho * (pq.y - st.q.y);
  st.pt_bar += rho * (project_cap(ScalarField<Scalar>(Scalar(2) * st.pt - st.pt_bar), prob.ct) - st.pt);
  // the +tau term is the resolvent of the linear source term on p_s
  st.ps_bar += rho * (project_cap(ScalarField<Scalar>(Scalar(2) * st.ps - st.ps_bar + tau), prob.cs) - st.ps);
}

template <typename Scalar>
void step_alg1(TwoLabelState<Scalar>& st, const TwoLabelProblem<Scalar>& prob,
               const SolverParams<Scalar>& p) {
  const Scalar sigma = p.sigma, tau = p.tau;
  VectorField2<Scalar> gu = gradient(st.u_bar);
  st.q = project_ball(VectorField2<Scalar>{st.q.x - sigma * gu.x, st.q.y - sigma * gu.y},
                      prob.alpha);
  st.pt = project_cap(ScalarField<Scalar>(st.pt + sigma * st.u_bar), prob.ct);
  // +sigma is the resolvent of the linear source term on p_s
  st.ps = project_cap(ScalarField<Scalar>(st.ps - sigma * st.u_bar + sigma), prob.cs);
  ScalarField<Scalar> u_old = st.u;
  st.u -= tau * (divergence(st.q) + st.pt - st.ps);
  st.u_bar = Scalar(2) * st.u - u_old;
}

template <typename Scalar>
void step(Algorithm algo, TwoLabelState<Scalar>& st, const TwoLabelProblem<Scalar>& prob,
          const SolverParams<Scalar>& p) {
  switch (algo) {
    case Algorithm::PAdmmTy: step_padmm_ty(st, prob, p); break;
    case Algorithm::RpAdmmI: step_rpadmm_i(st, prob, p); break;
    case Algorithm::RpAdmmII: step_rpadmm_ii(st, prob, p); break;
    case Algorithm::RPdrq: step_rpdrq(st, prob, p); break;
    case Algorithm::Alg1: step_alg1(st, prob, p); break;
  }
}

/// Binary labelling by thresholding; ties at beta go to foreground.
template <typename Scalar>
ScalarField<Scalar> threshold(const ScalarField<Scalar>& u, Scalar beta) {
  if (!(beta > Scalar(0)) || !(beta < Scalar(1)))
    throw std::invalid_argument("threshold: beta must lie in (0,1)");
  return (u >= beta).template cast<Scalar>();
}

/// Reference primal energy from a long Douglas-Rachford run.
template <typename Scalar>
Scalar compute_reference_energy(const TwoLabelProblem<Scalar>& prob, int iters) {
  SolverParams<Scalar> p = with_two_label_defaults(SolverParams<Scalar>{}, Algorithm::RPdrq);
  TwoLabelState<Scalar> st = TwoLabelState<Scalar>::zero(prob.shape());
  for (int k = 0; k < iters; ++k) step_rpdrq(st, prob, p);
  return energy_primal(st.u, prob);
}

template <typename Scalar>
struct RunResult {
  TwoLabelState<Scalar> state;
  Trace trace;
  bool converged{false};
  int iterations{0};
  Scalar final_energy{0};
  Scalar reference_energy{std::numeric_limits<Scalar>::quiet_NaN()};
};

/// Iterates the chosen scheme from zero initialization until the stopping
/// rule fires or max_iters is hit (returned with converged=false, not an
/// error).
template <typename Scalar>
RunResult<Scalar> run(Algorithm algo, const TwoLabelProblem<Scalar>& prob,
                      SolverParams<Scalar> params,
                      StopRule rule = StopRule{}) {
  prob.validate();
  params = with_two_label_defaults(params, algo);
  check_two_label_params(algo, params);

  RunResult<Scalar> out;
  if (rule.policy == StopPolicy::Reference) {
    out.reference_energy =
        rule.reference ? Scalar(*rule.reference)
                       : compute_reference_energy(prob, std::max(30000, 10 * params.max_iters));
  }

  out.state = TwoLabelState<Scalar>::zero(prob.shape());
  double e_prev = static_cast<double>(energy_primal(out.state.u, prob));
  int consecutive_hits = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= params.max_iters; ++k) {
    step(algo, out.state, prob, params);
    const double e = static_cast<double>(energy_primal(out.state.u, prob));
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
