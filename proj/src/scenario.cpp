#include "hankelid/scenario.hpp"

#include "hankelid/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hankelid {

namespace {

enum Stream : std::uint64_t { system_stream = 0, input_stream, noise_stream, validation_stream, draw_stream };

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = n01(rng);
  return out;
}

double centered_variance(const Eigen::Ref<const Vector>& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size());
}

}  // namespace

double StateSpace::spectral_radius() const {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

ImpulseResponse StateSpace::impulse_response(Index lags) const {
  std::vector<Matrix> markov;
  markov.reserve(static_cast<std::size_t>(lags));
  Matrix akb = b;
  for (Index k = 0; k < lags; ++k) {
    markov.push_back(c * akb);
    akb = (a * akb).eval();
  }
  return ImpulseResponse::from_markov(markov);
}

Matrix StateSpace::simulate(const Matrix& u) const {
  if (u.cols() != inputs()) throw InvalidArgument("input channel count does not match B");
  Matrix y(u.rows(), outputs());
  Vector x = Vector::Zero(order());
  for (Index t = 0; t < u.rows(); ++t) {
    y.row(t) = (c * x).transpose();
    x = (a * x + b * u.row(t).transpose()).eval();
  }
  return y;
}

void StateSpace::validate() const {
  if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows())
    throw InvalidArgument("inconsistent state-space dimensions");
  if (!(spectral_radius() < 1.0)) throw InvalidArgument("state-space system is not stable");
}

StateSpace s1_system() {
  StateSpace s;
  s.a = Matrix::Zero(4, 4);
  s.a.block(0, 0, 2, 2) << 0.8, 0.5, -0.5, 0.8;
  s.a.block(2, 2, 2, 2) << 0.2, 0.9, -0.9, 0.2;
  s.b.resize(4, 1);
  s.b << 1.0, 0.0, 2.0, 0.0;
  s.c.resize(3, 4);
  s.c << 1.0, 1.0, 1.0, 1.0,
         0.0, 0.1, 0.0, 0.1,
         20.0, 0.0, 2.5, 0.0;
  return s;
}

StateSpace gen_random_system(Index outputs, Index inputs, Index max_order, double radius, std::uint64_t seed) {
  if (outputs < 1 || inputs < 1 || max_order < 1) throw InvalidArgument("gen_random_system: bad dimensions");
  if (!(radius > 0.0 && radius < 1.0)) throw InvalidArgument("gen_random_system: radius must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> order_dist(1, max_order);
  std::uniform_real_distribution<double> modulus(0.0, radius);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::bernoulli_distribution coin(0.5);

  for (;;) {
    const Index n = order_dist(rng);
    Matrix a0 = Matrix::Zero(n, n);
    for (Index i = 0; i < n;) {
      if (n - i >= 2 && coin(rng)) {
        const double r = modulus(rng);
        const double th = angle(rng);
        a0.block(i, i, 2, 2) << r * std::cos(th), r * std::sin(th), -r * std::sin(th), r * std::cos(th);
        i += 2;
      } else {
        a0(i, i) = coin(rng) ? modulus(rng) : -modulus(rng);
        i += 1;
      }
    }
    Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
    Matrix q = qr.householderQ();
    const Matrix rdiag = qr.matrixQR().diagonal();
    for (Index j = 0; j < n; ++j)
      if (rdiag(j, 0) < 0.0) q.col(j) = -q.col(j);

    StateSpace s;
    s.a = q * a0 * q.transpose();
    s.b = gaussian(n, inputs, rng);
    s.c = gaussian(outputs, n, rng);
    if (s.spectral_radius() <= radius + 1e-12) return s;
  }
}

Vector lowpass_taps(double band) {
  if (!(band > 0.0 && band <= 1.0)) throw InvalidArgument("low-pass band must lie in (0, 1]");
  constexpr Index order = 64;
  Vector h(order + 1);
  for (Index n = 0; n <= order; ++n) {
    const double x = static_cast<double>(n) - order / 2.0;
    const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * band * x) / (std::numbers::pi * band * x);
    const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / order);
    h[n] = band * sinc * window;
  }
  return h / h.sum();
}

Matrix lowpass_input(double band, Index samples, Index channels, std::uint64_t seed) {
  if (samples < 1 || channels < 1) throw InvalidArgument("lowpass_input: bad dimensions");
  const Vector taps = lowpass_taps(band);
  const Index len = taps.size();
  std::mt19937_64 rng(seed);
  const Matrix white = gaussian(samples + len - 1, channels, rng);
  Matrix out(samples, channels);
  for (Index j = 0; j < channels; ++j) {
    for (Index t = 0; t < samples; ++t) {
      double acc = 0.0;
      for (Index k = 0; k < len; ++k) acc += taps[k] * white(t + len - 1 - k, j);
      out(t, j) = acc;
    }
    const double var = centered_variance(out.col(j));
    if (var > 0.0) out.col(j) /= std::sqrt(var);
  }
  return out;
}

Matrix white_input(Index samples, Index channels, std::uint64_t seed) {
  if (samples < 1 || channels < 1) throw InvalidArgument("white_input: bad dimensions");
  std::mt19937_64 rng(seed);
  return gaussian(samples, channels, rng);
}

ScenarioSpec ScenarioSpec::preset(ScenarioTag tag, Index samples, std::uint64_t seed) {
  ScenarioSpec s;
  s.tag = tag;
  s.samples = samples;
  s.seed = seed;
  switch (tag) {
    case ScenarioTag::s1:
      s.outputs = 3;
      s.inputs = 1;
      s.input = InputKind::lowpass;
      s.lags = 80;
      break;
    case ScenarioTag::s2:
      s.outputs = 5;
      s.inputs = 5;
      s.input = InputKind::white;
      s.lags = 50;
      break;
    case ScenarioTag::s3:
      s.outputs = 5;
      s.inputs = 10;
      s.input = InputKind::lowpass;
      s.lags = 50;
      break;
  }
  return s;
}

void ScenarioSpec::validate() const {
  if (samples < 1 || validation_samples < 0) throw InvalidArgument("scenario length must be >= 1");
  if (outputs < 1 || inputs < 1 || lags < 1) throw InvalidArgument("scenario dimensions must be >= 1");
  if (!(snr_lo > 0.0 && snr_hi >= snr_lo && std::isfinite(snr_hi))) throw InvalidArgument("SNR range must lie in (0, inf)");
  if (!(band_lo > 0.0 && band_hi >= band_lo && band_hi <= 1.0)) throw InvalidArgument("band range must lie in (0, 1]");
  if (tag == ScenarioTag::s1 && (outputs != 3 || inputs != 1)) throw InvalidArgument("S1 is a 3x1 system");
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Scenario sc;
  std::mt19937_64 draws(derive_seed(spec.seed, draw_stream));
  std::uniform_real_distribution<double> band(spec.band_lo, spec.band_hi);
  std::uniform_real_distribution<double> snr(spec.snr_lo, spec.snr_hi);

  sc.system = spec.tag == ScenarioTag::s1
                  ? s1_system()
                  : gen_random_system(spec.outputs, spec.inputs, spec.max_order, spec.pole_radius,
                                      derive_seed(spec.seed, system_stream));
  sc.band = spec.input == InputKind::lowpass ? band(draws) : 1.0;
  sc.snr.resize(spec.outputs);
  for (Index i = 0; i < spec.outputs; ++i) sc.snr[i] = snr(draws);

  auto make_input = [&](Index n, std::uint64_t stream) {
    const std::uint64_t s = derive_seed(spec.seed, stream);
    return spec.input == InputKind::lowpass ? lowpass_input(sc.band, n, spec.inputs, s)
                                            : white_input(n, spec.inputs, s);
  };

  const Matrix u = make_input(spec.samples, input_stream);
  sc.estimation_clean = sc.system.simulate(u);

  // Noise draws are rescaled so the realized SNR equals the drawn target.
  std::mt19937_64 noise_rng(derive_seed(spec.seed, noise_stream));
  Matrix e = gaussian(spec.samples, spec.outputs, noise_rng);
  sc.noise_variance.resize(spec.outputs);
  for (Index i = 0; i < spec.outputs; ++i) {
    const double signal = centered_variance(sc.estimation_clean.col(i));
    sc.noise_variance[i] = signal / sc.snr[i];
    const double ev = centered_variance(e.col(i));
    if (ev > 0.0) e.col(i) *= std::sqrt(sc.noise_variance[i] / ev);
  }
  sc.estimation = Dataset(u, sc.estimation_clean + e);

  if (spec.validation_samples > 0) {
    sc.validation_input = make_input(spec.validation_samples, validation_stream);
    sc.validation_clean = sc.system.simulate(sc.validation_input);
  }
  return sc;
}

Scenario gen_scenario_s1(std::uint64_t seed, Index samples) {
  return generate_scenario(ScenarioSpec::preset(ScenarioTag::s1, samples, seed));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over (master, stream)
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::s1: return "S1";
    case ScenarioTag::s2: return "S2";
    case ScenarioTag::s3: return "S3";
  }
  return "?";
}

ScenarioTag parse_scenario_tag(const std::string& text) {
  if (text == "S1" || text == "s1") return ScenarioTag::s1;
  if (text == "S2" || text == "s2") return ScenarioTag::s2;
  if (text == "S3" || text == "s3") return ScenarioTag::s3;
  throw InvalidArgument("unknown scenario '" + text + "' (valid: S1, S2, S3)");
}

}  // namespace hankelid
