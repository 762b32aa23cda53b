#pragma once

#include <array>
#include <string>

#include "addfit/errors.hpp"

namespace addfit {

// Symmetric density kernels with compact support [-1, 1].
enum class KernelFamily { Epanechnikov, Quartic, Triangular };

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  double bandwidth = 1.0;  // h > 0, in covariate units

  void validate() const {
    if (!(bandwidth > 0.0))
      throw ConfigError("kernel bandwidth must be positive");
  }
};

// mu[j] = int t^j K(t) dt for j=0..4; nu[0] = int K^2, nu[1] = int t^2 K^2.
struct KernelMoments {
  std::array<double, 5> mu;
  std::array<double, 2> nu;
};

/// K(t); zero outside [-1, 1].
double evaluate(const KernelSpec& spec, double t);

/// Scaled kernel K_h(u) = K(u/h) / h.
double evaluate_scaled(const KernelSpec& spec, double u);

/// Closed-form moments of the kernel family.
KernelMoments moments(const KernelSpec& spec);

KernelFamily kernel_family_from_name(const std::string& name);
std::string kernel_family_name(KernelFamily family);

}  // namespace addfit
