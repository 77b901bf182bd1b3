#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trimdr/sieve.hpp"

namespace trimdr {

inline constexpr int kMaxCorrectionOrder = 12;

/// Trimming threshold h, sieve degree K and bias-correction order k.
/// h = 0 switches trimming (and therefore the correction) off.
struct TrimConfig {
  double h = 0.01;
  int K = 3;
  int k = 3;

  void validate() const;
};

/// Denominator and numerator of one moment of a ratio, evaluated per
/// observation at a given first-stage parameter.
struct MomentValues {
  Vector A;
  Vector B;
};

struct MomentComponent {
  std::string label;
  std::function<MomentValues(const Vector& gamma)> evaluate;
  bool trivial_denominator = false;
};

/// Result of the trimmed, bias-corrected mean of B/A.
struct AlphaResult {
  double value = 0.0;
  double untrimmed_part = 0.0;   // E_n[(B/A) 1{|A| >= h}]
  double correction_part = 0.0;  // sum_kappa E_n[A^{kappa-1} 1{|A| < h}] / kappa! * m^(kappa)(0)
  int trimmed_count = 0;
  bool trivial = false;
  double h = 0.0;
  int k = 0;
  MomentValues values;
  Vector trimmed_moments;  // E_n[A^{kappa-1} 1{|A| < h}], kappa = 1..k
  Vector m_derivs;         // m-hat^(kappa)(0), kappa = 1..k
  std::optional<SieveFit> sieve;  // present only when something was trimmed
};

double factorial(int n);

/// Trimmed mean plus sieve-based trimming-bias correction. The sieve uses
/// every observation, trimmed or not. A trivial component returns E_n[B].
AlphaResult alpha_hat(const MomentValues& values, bool trivial_denominator, const TrimConfig& cfg);
AlphaResult alpha_hat(const MomentComponent& comp, const Vector& gamma, const TrimConfig& cfg);

/// Per-observation uncentered influence values of alpha-hat:
///   (B/A) 1{|A|>=h}
/// + sum_kappa A^{kappa-1} 1{|A|<h} / kappa! * m^(kappa)(0)
/// + sum_kappa E_n[A^{kappa-1} 1{|A|<h}] / kappa! * psi_kappa
/// + phi * dalpha/dgamma.
/// psi holds psi_kappa in column kappa-1 (n x k); it may be empty when no
/// observation was trimmed.
Vector omega_contributions(const AlphaResult& res, const Matrix& psi, const Vector& dalpha_dgamma,
                           const Matrix& phi);
/// Same, computing psi from the sieve attached to res.
Vector omega_contributions(const AlphaResult& res, const Vector& dalpha_dgamma, const Matrix& phi);

/// n x k matrix of sieve influence columns for kappa = 1..k.
Matrix psi_matrix(const AlphaResult& res);

/// Lambda together with its analytic gradient.
struct Combination {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct EstimandSpec {
  std::vector<MomentComponent> components;
  Combination combination;
};

/// Lambda applied to the alpha vector; DomainError when Lambda is undefined
/// there or returns a non-finite value.
double assemble_theta(const Combination& combination, const Vector& alphas);
double assemble_theta(const EstimandSpec& spec, const Vector& alphas);

/// (a1 - a2) / a3
Combination did_combination();
/// a1 + a2 - a3
Combination ate_combination();
/// (a1 + a2 - a3) / (a4 + a5 - a6)
Combination late_combination();

}  // namespace trimdr
