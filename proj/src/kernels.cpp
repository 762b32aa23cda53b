#include "addfit/kernels.hpp"

#include <cmath>

namespace addfit {

double evaluate(const KernelSpec& spec, double t) {
  spec.validate();
  double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return 0.75 * (1.0 - t * t);
    case KernelFamily::Quartic: {
      double s = 1.0 - t * t;
      return 0.9375 * s * s;
    }
    case KernelFamily::Triangular:
      return 1.0 - a;
  }
  return 0.0;
}

double evaluate_scaled(const KernelSpec& spec, double u) {
  return evaluate(spec, u / spec.bandwidth) / spec.bandwidth;
}

KernelMoments moments(const KernelSpec& spec) {
  spec.validate();
  KernelMoments m{};
  m.mu = {1.0, 0.0, 0.0, 0.0, 0.0};
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      m.mu[2] = 1.0 / 5.0;
      m.mu[4] = 3.0 / 35.0;
      m.nu = {3.0 / 5.0, 3.0 / 35.0};
      break;
    case KernelFamily::Quartic:
      m.mu[2] = 1.0 / 7.0;
      m.mu[4] = 1.0 / 21.0;
      m.nu = {5.0 / 7.0, 5.0 / 77.0};
      break;
    case KernelFamily::Triangular:
      m.mu[2] = 1.0 / 6.0;
      m.mu[4] = 1.0 / 15.0;
      m.nu = {2.0 / 3.0, 1.0 / 15.0};
      break;
  }
  return m;
}

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "epanechnikov") return KernelFamily::Epanechnikov;
  if (name == "quartic" || name == "biweight") return KernelFamily::Quartic;
  if (name == "triangular") return KernelFamily::Triangular;
  throw ConfigError("unknown kernel family: " + name);
}

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::Quartic: return "quartic";
    case KernelFamily::Triangular: return "triangular";
  }
  return "?";
}

}  // namespace addfit
