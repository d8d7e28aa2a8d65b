#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "simoml/numerics.hpp"

namespace simoml {

/// Random stream used for every draw in the library.
using Rng = std::mt19937_64;

/// Mixes a base seed with a list of coordinates (splitmix64 chained over the
/// coordinates). Distinct coordinates give statistically independent streams,
/// so Monte Carlo trials can run in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

/// Finite, ordered set of unit-modulus points.
///
/// The order is part of the contract: it is the enumeration order of the tree
/// search and the tie-break order of `quantize`.
class Constellation {
 public:
  Constellation(std::string name, std::vector<Complex> points);

  /// {+1, -1}
  static Constellation bpsk();
  /// (1+i)/sqrt2, (-1+i)/sqrt2, (-1-i)/sqrt2, (1-i)/sqrt2
  static Constellation qam4();
  /// Accepts "BPSK", "4-QAM" and "QPSK" (case-insensitive).
  static Constellation by_name(std::string_view name);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Complex>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Complex& operator[](std::size_t i) const { return points_[i]; }

  /// Index of the point within 1e-12 of `p`, if any.
  std::optional<std::size_t> index_of(Complex p) const;

 private:
  std::string name_;
  std::vector<Complex> points_;
};

/// One T-symbol coherence block received on N antennas: X = h s^H + W.
///
/// Column k of X equals conj(s_k) h + w_k. The last position carries the
/// pilot.
struct ObservationBlock {
  ComplexMatrix x;        // N x T
  ComplexVector h_true;   // N
  ComplexVector s_true;   // T
  std::vector<std::size_t> s_index;  // constellation index of each s_true entry
  double noise_var = 0.0;
  Index pilot_index = 0;
  Complex pilot_symbol;

  Index antennas() const noexcept { return x.rows(); }
  Index length() const noexcept { return x.cols(); }
};

/// sigma_w^2 = 10^(-snr_db/10) under unit symbol energy and unit channel
/// variance; +inf dB maps to 0.
double snr_to_noise_var(double snr_db);

/// Circular complex Gaussian with total variance `variance` (variance/2 per
/// real component).
Complex complex_gaussian(Rng& rng, double variance);

/// Draws one block. Draw order: h (N entries), the T-1 data symbols, then W in
/// column-major order.
ObservationBlock generate_block(Index T, Index N, const Constellation& constellation,
                                double noise_var, Complex pilot_symbol, Rng& rng);

/// Nearest constellation point; ties go to the lowest index.
std::size_t quantize_index(Complex y, const Constellation& constellation);
Complex quantize(Complex y, const Constellation& constellation);

}  // namespace simoml
