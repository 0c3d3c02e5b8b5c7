#include "qtraj/channels.hpp"

#include <cmath>
#include <string>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

void check_rate(double rate, double upper) {
  if (!(rate >= 0.0 && rate <= upper)) {
    throw DomainError("channel rate " + std::to_string(rate) + " outside [0, " +
                      std::to_string(upper) + "]");
  }
}

Mat2 diag2(cplx a, cplx b) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Projectors onto the +/- eigenvectors of a Pauli operator.
std::pair<Mat2, Mat2> eigenprojectors(const Mat2& pauli) {
  const Mat2 id = Mat2::Identity();
  return {0.5 * (id + pauli), 0.5 * (id - pauli)};
}

}  // namespace

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::amplitude_damping: return "amplitude_damping";
    case ChannelKind::phase_flip: return "phase_flip";
    case ChannelKind::bit_flip: return "bit_flip";
    case ChannelKind::bit_phase_flip: return "bit_phase_flip";
    case ChannelKind::custom: return "custom";
  }
  return "custom";
}

ChannelKind parse_channel_kind(std::string_view name) {
  if (name == "amplitude_damping" || name == "ad") return ChannelKind::amplitude_damping;
  if (name == "phase_flip" || name == "pf") return ChannelKind::phase_flip;
  if (name == "bit_flip" || name == "bf") return ChannelKind::bit_flip;
  if (name == "bit_phase_flip" || name == "bpf") return ChannelKind::bit_phase_flip;
  throw DomainError("unknown channel '" + std::string(name) + "'");
}

KrausSet::KrausSet(std::vector<Mat2> ops, double rate, ChannelKind label)
    : ops_(std::move(ops)), rate_(rate), label_(label) {
  if (ops_.empty()) throw ValidationError("Kraus set is empty");
  Mat2 sum = Mat2::Zero();
  for (const Mat2& e : ops_) sum += e.adjoint() * e;
  const double residual = max_abs_diff(sum, Mat2::Identity());
  if (!(residual <= kCompletenessTol)) {
    throw ValidationError("Kraus set violates completeness by " + std::to_string(residual));
  }
}

Mat2 KrausSet::apply(const Mat2& rho) const {
  Mat2 out = Mat2::Zero();
  for (const Mat2& e : ops_) out += e * rho * e.adjoint();
  return out;
}

RotationAngles RotationAngles::canonical() const {
  const double half_pi = 0.5 * kPi;
  double t = std::fmod(theta, half_pi);
  if (t < 0.0) t += half_pi;
  if (t >= half_pi) t = 0.0;
  double p = std::fmod(phi + half_pi, kPi);
  if (p < 0.0) p += kPi;
  if (p >= kPi) p = 0.0;
  return {t, p - half_pi};
}

Mat2 rotation_unitary(RotationAngles a) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const cplx e = std::polar(1.0, a.phi);
  const cplx ec = std::conj(e);
  Mat2 u;
  u << c * e, s * ec, -s * e, c * ec;
  return u;
}

Mat2 pauli_x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Mat2 pauli_y() {
  Mat2 m;
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

Mat2 pauli_z() { return diag2(1.0, -1.0); }

KrausSet make_channel(ChannelKind kind, double rate) {
  check_rate(rate, 1.0);
  const double keep = std::sqrt(1.0 - rate);
  const double flip = std::sqrt(rate);
  switch (kind) {
    case ChannelKind::amplitude_damping: {
      Mat2 decay = Mat2::Zero();
      decay(0, 1) = flip;
      return KrausSet({diag2(1.0, keep), decay}, rate, kind);
    }
    case ChannelKind::phase_flip:
      return KrausSet({keep * Mat2::Identity(), flip * pauli_z()}, rate, kind);
    case ChannelKind::bit_flip:
      return KrausSet({keep * Mat2::Identity(), flip * pauli_x()}, rate, kind);
    case ChannelKind::bit_phase_flip:
      return KrausSet({keep * Mat2::Identity(), flip * pauli_y()}, rate, kind);
    case ChannelKind::custom:
      break;
  }
  throw DomainError("make_channel needs a named channel");
}

KrausSet make_channel(std::string_view name, double rate) {
  return make_channel(parse_channel_kind(name), rate);
}

KrausSet rotate(const KrausSet& ks, RotationAngles angles) {
  if (ks.size() != 2) {
    throw ArityError("rotation needs exactly 2 Kraus operators, got " + std::to_string(ks.size()));
  }
  const Mat2 u = rotation_unitary(angles);
  std::vector<Mat2> f(2);
  for (int j = 0; j < 2; ++j) f[j] = u(j, 0) * ks[0] + u(j, 1) * ks[1];
  return KrausSet(std::move(f), ks.rate(), ks.label());
}

KrausSet naive_phase_flip(double rate) {
  check_rate(rate, 0.5);
  const double w = std::sqrt(2.0 * rate);
  return KrausSet({std::sqrt(1.0 - 2.0 * rate) * Mat2::Identity(), diag2(w, 0.0), diag2(0.0, w)},
                  rate, ChannelKind::phase_flip);
}

KrausSet naive_unraveling(ChannelKind kind, double rate) {
  switch (kind) {
    case ChannelKind::amplitude_damping:
      return make_channel(kind, rate);
    case ChannelKind::phase_flip:
      return naive_phase_flip(rate);
    case ChannelKind::bit_flip:
    case ChannelKind::bit_phase_flip: {
      check_rate(rate, 0.5);
      const auto [plus, minus] =
          eigenprojectors(kind == ChannelKind::bit_flip ? pauli_x() : pauli_y());
      const double w = std::sqrt(2.0 * rate);
      return KrausSet({std::sqrt(1.0 - 2.0 * rate) * Mat2::Identity(), w * plus, w * minus}, rate,
                      kind);
    }
    case ChannelKind::custom:
      break;
  }
  throw DomainError("no naive unraveling for a custom channel");
}

TraceTensor trace_tensor(const KrausSet& ks) {
  if (ks.size() != 2) throw ArityError("trace tensor needs exactly 2 Kraus operators");
  TraceTensor t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const Mat2 ab = ks[a].adjoint() * ks[b];
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) t.at(a, b, c, d) = (ab * ks[c].adjoint() * ks[d]).trace();
    }
  return t;
}

Mat4 ancilla_gate(const KrausSet& ks) {
  if (ks.size() != 2) throw ArityError("ancilla gate needs exactly 2 Kraus operators");
  Mat4 g = Mat4::Zero();
  const Mat2 x = pauli_x();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          g(2 * i + a, 2 * j + b) = ks[0](i, j) * (a == b ? 1.0 : 0.0) + ks[1](i, j) * x(a, b);
  return g;
}

}  // namespace qtraj
