// Shared solver vocabulary: algorithm selection, step-size parameters,
// stopping rules, and per-iteration traces.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pottsflow {

enum class Algorithm { PAdmmTy, RpAdmmI, RpAdmmII, RPdrq, Alg1 };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::PAdmmTy: return "padmm-ty";
    case Algorithm::RpAdmmI: return "rpadmm-i";
    case Algorithm::RpAdmmII: return "rpadmm-ii";
    case Algorithm::RPdrq: return "rpdrq";
    case Algorithm::Alg1: return "alg1";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  if (s == "padmm-ty") return Algorithm::PAdmmTy;
  if (s == "rpadmm-i") return Algorithm::RpAdmmI;
  if (s == "rpadmm-ii") return Algorithm::RpAdmmII;
  if (s == "rpdrq") return Algorithm::RPdrq;
  if (s == "alg1") return Algorithm::Alg1;
  return std::nullopt;
}

template <typename Scalar>
struct SolverParams {
  Scalar c{Scalar(0.3)};        // multiplier step size
  Scalar a{Scalar(8)};          // flow-block proximal weight, >= 8
  Scalar a_tilde{Scalar(2)};    // p-block proximal weight, >= 2
  Scalar rho{Scalar(1.9)};      // Eckstein-Bertsekas / DR relaxation, in (0,2)
  Scalar r{Scalar(1.618)};      // Fortin-Glowinski relaxation, in (0,(sqrt5+1)/2)
  Scalar sigma{Scalar(0)};      // primal-dual / DR step sizes; 0 = use defaults
  Scalar tau{Scalar(0)};
  Scalar eps{Scalar(1e-6)};     // stopping tolerance on relative energy error
  int max_iters{10000};
};

inline constexpr double kGoldenRatio = 1.6180339887498948482;

/// Fills sigma/tau with the per-algorithm defaults for the two-label model
/// when they were left unset.
template <typename Scalar>
SolverParams<Scalar> with_two_label_defaults(SolverParams<Scalar> p, Algorithm algo) {
  if (p.sigma == Scalar(0) && p.tau == Scalar(0)) {
    if (algo == Algorithm::Alg1) {
      p.sigma = Scalar(0.4);
      p.tau = Scalar(1) / (Scalar(10) * p.sigma);
    } else if (algo == Algorithm::RPdrq) {
      p.sigma = Scalar(0.2);
      p.tau = Scalar(1);
    }
  }
  return p;
}

/// Same for the n-label model: alg1 keeps sigma*tau at its admissible
/// bound 1/(9+n); the Douglas-Rachford variant keeps sigma*tau = 2.
template <typename Scalar>
SolverParams<Scalar> with_potts_defaults(SolverParams<Scalar> p, Algorithm algo, int n) {
  if (p.sigma == Scalar(0) && p.tau == Scalar(0)) {
    if (algo == Algorithm::Alg1) {
      p.sigma = Scalar(0.4);
      p.tau = Scalar(1) / (Scalar(9 + n) * p.sigma);
    } else if (algo == Algorithm::RPdrq) {
      p.tau = Scalar(0.4);
      p.sigma = Scalar(2) / p.tau;
    }
  }
  return p;
}

namespace detail {

template <typename Scalar>
void check_common(const SolverParams<Scalar>& p) {
  if (!(p.c > Scalar(0))) throw std::invalid_argument("params: c must be positive");
  if (!(p.eps > Scalar(0))) throw std::invalid_argument("params: eps must be positive");
  if (p.max_iters < 1) throw std::invalid_argument("params: max_iters must be >= 1");
}

template <typename Scalar>
void check_admm_weights(const SolverParams<Scalar>& p) {
  if (p.a < Scalar(8)) throw std::invalid_argument("params: a must be >= 8");
  if (p.a_tilde < Scalar(2)) throw std::invalid_argument("params: a_tilde must be >= 2");
}

template <typename Scalar>
void check_rho(Scalar rho) {
  if (!(rho > Scalar(0)) || !(rho < Scalar(2)))
    throw std::invalid_argument("params: rho must lie in (0,2)");
}

template <typename Scalar>
void check_r(Scalar r) {
  if (!(r > Scalar(0)) || !(r < Scalar(kGoldenRatio)))
    throw std::invalid_argument("params: r must lie in (0,(sqrt(5)+1)/2)");
}

template <typename Scalar>
void check_sigma_tau(const SolverParams<Scalar>& p) {
  if (!(p.sigma > Scalar(0)) || !(p.tau > Scalar(0)))
    throw std::invalid_argument("params: sigma and tau must be positive");
}

}  // namespace detail

/// Validates parameters for one two-label algorithm; throws on violation.
template <typename Scalar>
void check_two_label_params(Algorithm algo, const SolverParams<Scalar>& p) {
  detail::check_common(p);
  switch (algo) {
    case Algorithm::PAdmmTy:
      if (p.a < Scalar(8)) throw std::invalid_argument("params: a must be >= 8");
      break;
    case Algorithm::RpAdmmI:
      detail::check_admm_weights(p);
      detail::check_r(p.r);
      break;
    case Algorithm::RpAdmmII:
      detail::check_admm_weights(p);
      detail::check_rho(p.rho);
      break;
    case Algorithm::RPdrq:
      detail::check_sigma_tau(p);
      detail::check_rho(p.rho);
      break;
    case Algorithm::Alg1:
      detail::check_sigma_tau(p);
      if (Scalar(10) * p.sigma * p.tau > Scalar(1) + Scalar(1e-12))
        throw std::invalid_argument("params: alg1 needs 10*sigma*tau <= 1");
      break;
  }
}

enum class StopPolicy {
  Reference,     // |E_k - E*| / |E*| <= eps against a reference energy
  SelfRelative,  // |E_k - E_{k-1}| / |E_k| <= eps on two consecutive
                 // iterations (zero-initialized runs can hold the energy
                 // exactly flat across the very first step)
};

struct StopRule {
  StopPolicy policy{StopPolicy::Reference};
  std::optional<double> reference{};  // empty: compute by a long reference run

  static StopRule with_reference(double e) { return {StopPolicy::Reference, e}; }
  static StopRule self_relative() { return {StopPolicy::SelfRelative, std::nullopt}; }
};

struct TraceRow {
  int iter{0};
  double energy{0};
  double rel_err{0};
  double residual{0};
  double elapsed_ms{0};
};

using Trace = std::vector<TraceRow>;

inline double relative_gap(double e, double reference) {
  const double denom = std::abs(reference);
  if (denom == 0.0) return e == reference ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(e - reference) / denom;
}

}  // namespace pottsflow
