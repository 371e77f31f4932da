#pragma once

// Shared domain types for the CPT squeezing simulator.
//
// Units: the excited-state decay rate Gamma is the rate unit, so every
// frequency, detuning and Rabi frequency is stored in units of Gamma.
// Positions along the medium are stored as xi = z / L in [0, 1].

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace cptsq {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors. Every numerical failure is a SimulationError; the CLI maps the
// concrete type onto its exit code.

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Bloch matrix is numerically singular (e.g. both fields absorbed to zero
/// with gamma12 = 0, which leaves the dark manifold undetermined).
class SingularSystem : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class NonConvergence : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class FeatureUndefined : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// ---------------------------------------------------------------------------

enum class DetuningSetting { symmetric, probe_only, coupling_only };

std::string_view to_string(DetuningSetting s);
DetuningSetting parse_detuning_setting(std::string_view name);
inline constexpr std::array<DetuningSetting, 3> kAllSettings{
    DetuningSetting::symmetric, DetuningSetting::probe_only,
    DetuningSetting::coupling_only};

/// One-photon detunings (delta_p, delta_c) realising two-photon detuning
/// `delta` under a named setting. delta_p - delta_c == delta exactly.
std::pair<double, double> split_detuning(DetuningSetting s, double delta);

struct SystemParams {
  double alpha = 0.0;    // optical density
  double gamma = 1.0;    // excited-state decay, the rate unit
  double gamma12 = 0.0;  // ground-coherence decay
  double delta = 0.0;    // two-photon detuning, == delta_p - delta_c
  double delta_p = 0.0;
  double delta_c = 0.0;
  cplx omega_p0{0.0, 0.0};
  cplx omega_c0{0.0, 0.0};
  double lc = 0.0;  // vacuum transit time L/c in 1/Gamma
  int xi_steps = 2000;
  std::optional<double> g_norm;  // informational; never enters the numerics
  // Branching rates of |3> -> |1> and |3> -> |2>; both Gamma/2 by default.
  double gamma1 = 0.5;
  double gamma2 = 0.5;

  bool operator==(const SystemParams&) const = default;
};

/// Unvalidated parameter record as it arrives from a config file or flags.
struct RawParams {
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> gamma12;
  std::optional<double> delta;
  std::optional<double> delta_p;
  std::optional<double> delta_c;
  std::optional<std::string> setting;
  std::optional<cplx> omega;  // sets both fields unless overridden
  std::optional<cplx> omega_p0;
  std::optional<cplx> omega_c0;
  std::optional<double> lc;
  std::optional<int> xi_steps;
  std::optional<double> g_norm;
  std::optional<double> gamma1;
  std::optional<double> gamma2;

  /// Fields set in `over` replace those in *this.
  void merge(const RawParams& over);
};

SystemParams validate_params(const RawParams& raw);

/// Rejects structurally invalid SystemParams (used after programmatic edits).
void check_params(const SystemParams& p);

/// Throws InvalidParams unless at least one input field is nonzero.
void require_input_field(const SystemParams& p);

// ---------------------------------------------------------------------------

/// Index of each density-matrix element inside the 9-vector x.
namespace idx {
inline constexpr int s31 = 0, s32 = 1, s21 = 2, s11 = 3, s22 = 4, s33 = 5,
                     s12 = 6, s23 = 7, s13 = 8;
/// Index of the Hermitian-adjoint element (s31 <-> s13 ...).
inline constexpr std::array<int, 9> adjoint{8, 7, 6, 3, 4, 5, 2, 1, 0};
}  // namespace idx

using Vec9 = Eigen::Matrix<cplx, 9, 1>;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using Mat94 = Eigen::Matrix<cplx, 9, 4>;
using Mat49 = Eigen::Matrix<cplx, 4, 9>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Mat3 = Eigen::Matrix<cplx, 3, 3>;

/// Steady-state density matrix, ordered (s31, s32, s21, s11, s22, s33, s12,
/// s23, s13).
struct AtomicState {
  Vec9 x = Vec9::Zero();

  cplx operator[](int i) const { return x(i); }
  /// Element <i|rho|j>, 1-based level labels.
  cplx sigma(int i, int j) const;
  Mat3 density_matrix() const;
};

struct FieldProfile {
  std::vector<double> xi;
  std::vector<cplx> omega_p;
  std::vector<cplx> omega_c;
};

/// Second moments of the probe (p) and coupling (c) fluctuations.
struct CorrelationState {
  cplx c_pp{};    // <a_p a_p>
  double n_p = 0;  // <a_p^dag a_p>
  cplx c_cc{};    // <a_c a_c>
  double n_c = 0;  // <a_c^dag a_c>
  cplx c_pc{};    // <a_p a_c>
  cplx x_pc{};    // <a_p^dag a_c>
};

struct SqueezingResult {
  double variance = 1.0;
  double variance_db = 0.0;
  double theta_opt = 0.0;
  double transmission_p = 1.0;
  double transmission_c = 1.0;
  SystemParams params_echo;
};

struct SpectrumResult {
  std::vector<double> omega;
  std::vector<double> s;      // fixed-angle spectrum
  std::vector<double> s_opt;  // per-frequency optimal-angle spectrum
  std::vector<std::string> failures;  // empty string where the point succeeded
  double theta_used = 0.0;
  double bandwidth = 0.0;
  double period = 0.0;
};

inline double to_db(double v) { return 10.0 * std::log10(v); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace cptsq
