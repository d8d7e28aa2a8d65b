#include "simoml/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "simoml/errors.hpp"

namespace simoml {

namespace {

constexpr double kUnitTol = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : coords) {
    h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  }
  return h;
}

Constellation::Constellation(std::string name, std::vector<Complex> points)
    : name_(std::move(name)), points_(std::move(points)) {
  if (points_.empty()) {
    throw InvalidInput("constellation must have at least one point");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].real()) || !std::isfinite(points_[i].imag()) ||
        std::abs(std::abs(points_[i]) - 1.0) > kUnitTol) {
      throw InvalidInput("constellation '" + name_ + "' has a point off the unit circle");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(points_[i] - points_[j]) <= kUnitTol) {
        throw InvalidInput("constellation '" + name_ + "' has duplicate points");
      }
    }
  }
}

Constellation Constellation::bpsk() { return Constellation("BPSK", {Complex(1, 0), Complex(-1, 0)}); }

Constellation Constellation::qam4() {
  const double a = 1.0 / std::sqrt(2.0);
  return Constellation("4-QAM", {Complex(a, a), Complex(-a, a), Complex(-a, -a), Complex(a, -a)});
}

Constellation Constellation::by_name(std::string_view name) {
  const std::string key = upper(name);
  if (key == "BPSK") return bpsk();
  if (key == "4-QAM" || key == "QPSK" || key == "4QAM") return qam4();
  throw InvalidInput("unknown constellation '" + std::string(name) + "'");
}

std::optional<std::size_t> Constellation::index_of(Complex p) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (std::abs(points_[i] - p) <= kUnitTol) return i;
  }
  return std::nullopt;
}

double snr_to_noise_var(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

Complex complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
  const double re = dist(rng);
  const double im = dist(rng);
  return {re, im};
}

ObservationBlock generate_block(Index T, Index N, const Constellation& constellation,
                                double noise_var, Complex pilot_symbol, Rng& rng) {
  if (T < 2) throw InvalidInput("generate_block: T must be at least 2");
  if (N < 1) throw InvalidInput("generate_block: N must be at least 1");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw InvalidInput("generate_block: noise variance must be finite and non-negative");
  }
  const auto pilot_idx = constellation.index_of(pilot_symbol);
  if (!pilot_idx) throw InvalidInput("generate_block: pilot symbol is not a constellation point");

  ObservationBlock block;
  block.noise_var = noise_var;
  block.pilot_index = T - 1;
  block.pilot_symbol = constellation[*pilot_idx];

  std::normal_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](double scale) {
    const double re = unit(rng);
    const double im = unit(rng);
    return Complex(scale * re, scale * im);
  };

  const double h_scale = std::sqrt(0.5);
  block.h_true.resize(N);
  for (Index k = 0; k < N; ++k) block.h_true[k] = draw(h_scale);

  std::uniform_int_distribution<std::size_t> pick(0, constellation.size() - 1);
  block.s_true.resize(T);
  block.s_index.resize(static_cast<std::size_t>(T));
  for (Index t = 0; t + 1 < T; ++t) {
    const std::size_t idx = pick(rng);
    block.s_index[static_cast<std::size_t>(t)] = idx;
    block.s_true[t] = constellation[idx];
  }
  block.s_index.back() = *pilot_idx;
  block.s_true[T - 1] = block.pilot_symbol;

  block.x = block.h_true * block.s_true.adjoint();
  if (noise_var > 0.0) {
    const double w_scale = std::sqrt(noise_var / 2.0);
    for (Index t = 0; t < T; ++t) {
      for (Index k = 0; k < N; ++k) block.x(k, t) += draw(w_scale);
    }
  }
  return block;
}

std::size_t quantize_index(Complex y, const Constellation& constellation) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < constellation.size(); ++i) {
    const double d = std::norm(y - constellation[i]);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

Complex quantize(Complex y, const Constellation& constellation) {
  return constellation[quantize_index(y, constellation)];
}

}  // namespace simoml
