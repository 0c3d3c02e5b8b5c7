#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qtraj/unraveling.hpp"

namespace qtraj {

inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr double kNegativeTolerance = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-8;

// Entropies in bits. Spectra must be probabilities: entries >= -1e-12, sum 1 +- 1e-8.
double von_neumann(std::span<const double> p);
double renyi(std::span<const double> p, double order);

struct SpectrumStats {
  double mu = 1.0;       // sum_alpha alpha p_alpha, alpha from 1
  double sigma = 0.0;
  double chi_eff = 1.0;  // mu + sigma / sqrt(epsilon)
  double epsilon = kDefaultEpsilon;
  double entropy = 0.0;  // von Neumann, bits
};

// Spectrum must be sorted descending.
SpectrumStats effective_rank(std::span<const double> p, double epsilon = kDefaultEpsilon);

// sum_{alpha > ceil(chi_eff)} p_alpha; never exceeds epsilon by Chebyshev's inequality.
double chebyshev_tail(std::span<const double> p, double chi_eff);

class Histogram {
 public:
  enum class Scale { linear, log };
  Histogram() = default;
  Histogram(double lo, double hi, int bins, Scale scale);

  // Values outside [lo, hi) land in the first or last bin.
  void add(double v);
  void merge(const Histogram& other);

  int bins() const { return static_cast<int>(counts_.size()); }
  double bin_lo(int k) const;
  double bin_hi(int k) const;
  std::uint64_t count(int k) const { return counts_[k]; }
  std::uint64_t total() const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  void write_csv(std::ostream& out) const;  // value_bin_lo,value_bin_hi,count

 private:
  double lo_ = 0.0, hi_ = 1.0;
  Scale scale_ = Scale::linear;
  std::vector<std::uint64_t> counts_;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(N)
  std::uint64_t samples = 0;
};

struct AggregateOptions {
  double epsilon = kDefaultEpsilon;
  int bins = 64;
  double chi_eff_hist_max = 1e5;
};

struct EnsembleStats {
  MeanSe entropy;
  MeanSe chi_eff;
  double trunc_max = 0.0;
  std::uint64_t chebyshev_violations = 0;
  Histogram chi_eff_hist;  // log-spaced on [1, chi_eff_hist_max)
  Histogram theta_hist;    // [0, pi)
  Histogram phi_hist;      // [-pi/2, pi/2)
};

// Running sums for one layer; merging is associative, finalize() is read-only.
class LayerAccumulator {
 public:
  explicit LayerAccumulator(const AggregateOptions& opts = {});

  void add_spectrum(std::span<const double> p);
  void add_entropy_and_rank(double entropy, double chi_eff);
  void add_update(const UpdateRecord& rec);
  void add_truncation(double weight);
  void merge(const LayerAccumulator& other);

  std::uint64_t samples() const { return n_; }
  // Throws DomainError when no spectrum was added.
  EnsembleStats finalize() const;

 private:
  AggregateOptions opts_;
  std::uint64_t n_ = 0;
  double s_sum_ = 0.0, s_sq_ = 0.0;
  double c_sum_ = 0.0, c_sq_ = 0.0;
  double trunc_max_ = 0.0;
  std::uint64_t violations_ = 0;
  Histogram chi_hist_, theta_hist_, phi_hist_;
};

EnsembleStats aggregate(std::span<const std::vector<double>> spectra,
                        std::span<const UpdateRecord> updates, const AggregateOptions& opts = {});

MeanSe mean_se(std::span<const double> values);

}  // namespace qtraj
