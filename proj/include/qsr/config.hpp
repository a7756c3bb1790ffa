#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qsr {

#ifdef QSR_VERSION
inline constexpr const char* version = QSR_VERSION;
#else
inline constexpr const char* version = "0.1.0";
#endif

// Validation tolerances are part of the interface, not tuning knobs.
// Inputs violating them are rejected; violations inside them are repaired
// (hermitize, clamp, renormalize) so downstream code sees clean objects.
namespace tol {
inline constexpr double hermitian = 1e-10;   // max |M - M*| entry
inline constexpr double psd = 1e-10;         // eigenvalues >= -psd
inline constexpr double trace_one = 1e-10;   // |tr(rho) - 1|
inline constexpr double unit_norm = 1e-10;   // | ||v|| - 1 |
inline constexpr double trace_preserving = 1e-9;   // || sum K*K - 1 ||
inline constexpr double povm_sum = 1e-9;
inline constexpr double orthonormal = 1e-10;
inline constexpr double eig_clamp = 1e-14;   // spectrum floor before log2
inline constexpr double lp_feasible = 1e-8;
inline constexpr double ineq_slack = 1e-9;   // inequality oracles
}  // namespace tol

struct CapViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hard resource guards. l, |S|^l and d_J^n growth is exponential; every
// enumerating routine checks one of these before allocating.
struct Caps {
  std::size_t tensor_dim = 256;        // dim(H)^l for any built operator
  std::size_t sequences = 1000000;     // |S|^l / |X|^l enumerations
  std::size_t jammer_dim = 4096;       // d_J^n for the effect operator

  // QSR_CAP_OVERRIDE="tensor_dim=512,sequences=2000000,jammer_dim=8192"
  // Unsafe by design; documented for reproducing larger runs only.
  static Caps from_env() {
    Caps c;
    const char* raw = std::getenv("QSR_CAP_OVERRIDE");
    if (!raw) return c;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("QSR_CAP_OVERRIDE: expected name=value, got '" + item + "'");
      const std::string name = item.substr(0, eq);
      const std::size_t value = std::stoull(item.substr(eq + 1));
      if (name == "tensor_dim") c.tensor_dim = value;
      else if (name == "sequences") c.sequences = value;
      else if (name == "jammer_dim") c.jammer_dim = value;
      else throw std::invalid_argument("QSR_CAP_OVERRIDE: unknown cap '" + name + "'");
    }
    return c;
  }

  void check_tensor_dim(std::size_t d, const char* what) const {
    if (d > tensor_dim)
      throw CapViolation(std::string(what) + ": tensor dimension " + std::to_string(d) +
                         " exceeds cap " + std::to_string(tensor_dim));
  }
  void check_sequences(double count, const char* what) const {
    if (count > static_cast<double>(sequences))
      throw CapViolation(std::string(what) + ": sequence count exceeds cap " +
                         std::to_string(sequences));
  }
  void check_jammer_dim(double d, const char* what) const {
    if (d > static_cast<double>(jammer_dim))
      throw CapViolation(std::string(what) + ": jammer dimension exceeds cap " +
                         std::to_string(jammer_dim));
  }
};

// Frequency-typicality convention.  Literal keeps the two-sided condition
// p(x)=0 <=> N(x|word)=0, which empties small-l typical sets when the
// distribution has full support; relaxed keeps only p(x)=0 => N(x|word)=0.
enum class TypicalityConvention { literal, relaxed };

struct Conventions {
  TypicalityConvention typicality = TypicalityConvention::literal;
};

}  // namespace qsr
