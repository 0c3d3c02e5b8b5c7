#include "qtraj/diagnostics.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "qtraj/errors.hpp"
#include "qtraj/io.hpp"

namespace qtraj {
namespace {

void validate_spectrum(std::span<const double> p) {
  if (p.empty()) throw ValidationError("empty spectrum");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= -kNegativeTolerance)) {
      throw DomainError("spectrum entry " + std::to_string(x) + " is negative");
    }
    sum += x;
  }
  if (!(std::abs(sum - 1.0) <= kNormalizationTolerance)) {
    throw DomainError("spectrum sums to " + std::to_string(sum));
  }
}

MeanSe finish(double sum, double sq, std::uint64_t n) {
  MeanSe m;
  m.samples = n;
  if (n == 0) return m;
  m.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var = std::max(0.0, (sq - sum * m.mean) / static_cast<double>(n - 1));
    m.se = std::sqrt(var / static_cast<double>(n));
  }
  return m;
}

}  // namespace

double von_neumann(std::span<const double> p) {
  validate_spectrum(p);
  double s = 0.0;
  for (double x : p) {
    if (x > 0.0) s -= x * std::log2(x);
  }
  return s;
}

double renyi(std::span<const double> p, double order) {
  validate_spectrum(p);
  if (!(order >= 0.0)) throw DomainError("Renyi order must be >= 0");
  if (order == 1.0) return von_neumann(p);
  double sum = 0.0;
  for (double x : p) {
    if (x > 0.0) sum += order == 0.0 ? 1.0 : std::pow(x, order);
  }
  return std::log2(sum) / (1.0 - order);
}

SpectrumStats effective_rank(std::span<const double> p, double epsilon) {
  validate_spectrum(p);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  for (std::size_t a = 1; a < p.size(); ++a) {
    if (p[a] > p[a - 1]) throw ValidationError("spectrum is not sorted descending");
  }
  double m1 = 0.0, m2 = 0.0, s = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double alpha = static_cast<double>(a + 1);
    const double x = std::max(p[a], 0.0);
    m1 += alpha * x;
    m2 += alpha * alpha * x;
    if (x > 0.0) s -= x * std::log2(x);
  }
  SpectrumStats st;
  st.mu = m1;
  st.sigma = std::sqrt(std::max(0.0, m2 - m1 * m1));
  st.chi_eff = st.mu + st.sigma / std::sqrt(epsilon);
  st.epsilon = epsilon;
  st.entropy = s;
  return st;
}

double chebyshev_tail(std::span<const double> p, double chi_eff) {
  const std::size_t cut = static_cast<std::size_t>(std::ceil(chi_eff));
  double tail = 0.0;
  for (std::size_t a = cut; a < p.size(); ++a) tail += p[a];
  return tail;
}

Histogram::Histogram(double lo, double hi, int bins, Scale scale)
    : lo_(lo), hi_(hi), scale_(scale), counts_(bins, 0) {
  if (bins < 1 || !(hi > lo)) throw DomainError("invalid histogram range");
  if (scale == Scale::log && !(lo > 0.0)) throw DomainError("log histogram needs lo > 0");
}

double Histogram::bin_lo(int k) const {
  const double f = static_cast<double>(k) / bins();
  return scale_ == Scale::linear ? lo_ + f * (hi_ - lo_) : lo_ * std::pow(hi_ / lo_, f);
}

double Histogram::bin_hi(int k) const { return bin_lo(k + 1); }

void Histogram::add(double v) {
  if (counts_.empty()) return;
  double f = scale_ == Scale::linear ? (v - lo_) / (hi_ - lo_)
                                     : std::log(std::max(v, lo_) / lo_) / std::log(hi_ / lo_);
  int k = static_cast<int>(std::floor(f * bins()));
  k = std::clamp(k, 0, bins() - 1);
  ++counts_[k];
}

void Histogram::merge(const Histogram& other) {
  if (counts_.empty()) {
    *this = other;
    return;
  }
  if (other.counts_.size() != counts_.size()) throw ValidationError("histogram shape mismatch");
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

void Histogram::write_csv(std::ostream& out) const {
  out << "value_bin_lo,value_bin_hi,count\n";
  for (int k = 0; k < bins(); ++k) out << format_double(bin_lo(k)) << ',' << format_double(bin_hi(k)) << ',' << counts_[k] << '\n';
}

LayerAccumulator::LayerAccumulator(const AggregateOptions& opts)
    : opts_(opts),
      chi_hist_(1.0, opts.chi_eff_hist_max, opts.bins, Histogram::Scale::log),
      theta_hist_(0.0, kPi, opts.bins, Histogram::Scale::linear),
      phi_hist_(-0.5 * kPi, 0.5 * kPi, opts.bins, Histogram::Scale::linear) {}

void LayerAccumulator::add_spectrum(std::span<const double> p) {
  const SpectrumStats st = effective_rank(p, opts_.epsilon);
  if (chebyshev_tail(p, st.chi_eff) > opts_.epsilon) ++violations_;
  add_entropy_and_rank(st.entropy, st.chi_eff);
}

void LayerAccumulator::add_entropy_and_rank(double entropy, double chi_eff) {
  ++n_;
  s_sum_ += entropy;
  s_sq_ += entropy * entropy;
  c_sum_ += chi_eff;
  c_sq_ += chi_eff * chi_eff;
  chi_hist_.add(chi_eff);
}

void LayerAccumulator::add_update(const UpdateRecord& rec) {
  if (!rec.angles) return;
  const RotationAngles a = rec.angles->canonical();
  theta_hist_.add(a.theta);
  phi_hist_.add(a.phi);
}

void LayerAccumulator::add_truncation(double weight) { trunc_max_ = std::max(trunc_max_, weight); }

void LayerAccumulator::merge(const LayerAccumulator& o) {
  n_ += o.n_;
  s_sum_ += o.s_sum_;
  s_sq_ += o.s_sq_;
  c_sum_ += o.c_sum_;
  c_sq_ += o.c_sq_;
  trunc_max_ = std::max(trunc_max_, o.trunc_max_);
  violations_ += o.violations_;
  chi_hist_.merge(o.chi_hist_);
  theta_hist_.merge(o.theta_hist_);
  phi_hist_.merge(o.phi_hist_);
}

EnsembleStats LayerAccumulator::finalize() const {
  if (n_ == 0) throw DomainError("no samples to aggregate");
  EnsembleStats st;
  st.entropy = finish(s_sum_, s_sq_, n_);
  st.chi_eff = finish(c_sum_, c_sq_, n_);
  st.trunc_max = trunc_max_;
  st.chebyshev_violations = violations_;
  st.chi_eff_hist = chi_hist_;
  st.theta_hist = theta_hist_;
  st.phi_hist = phi_hist_;
  return st;
}

EnsembleStats aggregate(std::span<const std::vector<double>> spectra,
                        std::span<const UpdateRecord> updates, const AggregateOptions& opts) {
  LayerAccumulator acc(opts);
  for (const auto& p : spectra) acc.add_spectrum(p);
  for (const auto& u : updates) acc.add_update(u);
  return acc.finalize();
}

MeanSe mean_se(std::span<const double> values) {
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
  }
  return finish(sum, sq, values.size());
}

}  // namespace qtraj
