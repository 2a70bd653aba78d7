#pragma once

// Synthetic benchmark scenarios: the fixed fourth-order system (S1), random
// stable 5x5 systems with white input (S2) and random 5x10 systems with
// band-limited input (S3).

#include "hankelid/model.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace hankelid {

struct StateSpace {
  Matrix a;
  Matrix b;
  Matrix c;

  Index order() const { return a.rows(); }
  Index inputs() const { return b.cols(); }
  Index outputs() const { return c.rows(); }
  double spectral_radius() const;
  /// h(k) = C A^{k-1} B, k = 1..lags.
  ImpulseResponse impulse_response(Index lags) const;
  /// Noise-free output from rest (x(1) = 0), N x p.
  Matrix simulate(const Matrix& u) const;
  void validate() const;
};

enum class ScenarioTag { s1, s2, s3 };
enum class InputKind { lowpass, white };

struct ScenarioSpec {
  ScenarioTag tag = ScenarioTag::s1;
  Index samples = 500;
  Index validation_samples = 500;
  Index outputs = 3;
  Index inputs = 1;
  InputKind input = InputKind::lowpass;
  double snr_lo = 1.0;
  double snr_hi = 4.0;
  double band_lo = 0.8;
  double band_hi = 1.0;
  Index lags = 80;
  Index max_order = 10;   // S2/S3 random order bound
  double pole_radius = 0.85;
  std::uint64_t seed = 1;

  /// Standard settings for a scenario tag (dimensions, input, T).
  static ScenarioSpec preset(ScenarioTag tag, Index samples, std::uint64_t seed);
  void validate() const;
};

struct Scenario {
  Dataset estimation;
  Matrix estimation_clean;   // noise-free outputs of the estimation data
  Matrix validation_input;
  Matrix validation_clean;   // noise-free validation outputs
  StateSpace system;
  Vector snr;                // drawn per-channel targets
  Vector noise_variance;     // per-channel noise variance used
  double band = 1.0;
};

/// The fixed S1 system: A = blockdiag([.8 .5; -.5 .8], [.2 .9; -.9 .2]),
/// B = [1 0 2 0]^T, C = [1 1 1 1; 0 .1 0 .1; 20 0 2.5 0].
StateSpace s1_system();

/// Random stable system of random order in 1..max_order with all poles inside
/// the disc of the given radius.
StateSpace gen_random_system(Index outputs, Index inputs, Index max_order, double radius, std::uint64_t seed);

/// White Gaussian noise through a 64th-order Hamming-windowed sinc low-pass
/// with cutoff band * Nyquist, normalized to unit variance; N x channels.
Matrix lowpass_input(double band, Index samples, Index channels, std::uint64_t seed);

/// Low-pass FIR taps (65 taps, unit DC gain).
Vector lowpass_taps(double band);

Matrix white_input(Index samples, Index channels, std::uint64_t seed);

Scenario generate_scenario(const ScenarioSpec& spec);
Scenario gen_scenario_s1(std::uint64_t seed, Index samples);

/// Stream-independent child seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

std::string to_string(ScenarioTag tag);
ScenarioTag parse_scenario_tag(const std::string& text);

}  // namespace hankelid
