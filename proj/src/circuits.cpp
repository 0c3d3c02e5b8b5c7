#include "qtraj/circuits.hpp"

#include <cmath>

#include "qtraj/errors.hpp"
#include "qtraj/mps.hpp"

namespace qtraj {
namespace {
constexpr std::uint64_t kCircuitStream = 0xC12C;
}

CMatrix sample_haar_unitary(int dim, CounterRng& rng) {
  if (dim < 1) throw DomainError("unitary dimension must be >= 1");
  CMatrix z(dim, dim);
  const double scale = std::sqrt(0.5);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(r, c) = cplx(re, im) * scale;
    }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  const CMatrix& rr = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    const cplx d = rr(k, k);
    const double a = std::abs(d);
    q.col(k) *= a > 0.0 ? d / a : cplx(1.0);
  }
  return q;
}

CircuitPlan brickwork(int n, int layers, std::uint64_t seed) {
  if (n < 2) throw DomainError("brickwork needs n >= 2");
  if (layers < 0) throw DomainError("layer count must be >= 0");
  CircuitPlan plan;
  plan.n = n;
  plan.layers = layers;
  plan.seed = seed;
  plan.gates.resize(layers);
  CounterRng rng = CounterRng::stream(seed, kCircuitStream);
  for (int l = 0; l < layers; ++l) {
    const int first = (l % 2 == 0) ? 0 : 1;
    for (int s = first; s + 1 < n; s += 2) plan.gates[l].push_back({s, sample_haar_unitary(4, rng)});
  }
  return plan;
}

nlohmann::json CircuitPlan::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["layers"] = layers;
  j["seed"] = seed;
  auto& arr = j["gates"] = nlohmann::json::array();
  for (const auto& layer : gates) {
    auto jl = nlohmann::json::array();
    for (const auto& g : layer) {
      auto u = nlohmann::json::array();
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) u.push_back({g.unitary(r, c).real(), g.unitary(r, c).imag()});
      jl.push_back({{"site", g.site}, {"unitary", u}});
    }
    arr.push_back(jl);
  }
  return j;
}

CircuitPlan CircuitPlan::from_json(const nlohmann::json& j) {
  CircuitPlan plan;
  plan.n = j.at("n").get<int>();
  plan.layers = j.at("layers").get<int>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jl : j.at("gates")) {
    std::vector<GateOp> layer;
    for (const auto& jg : jl) {
      GateOp g;
      g.site = jg.at("site").get<int>();
      const auto& u = jg.at("unitary");
      if (u.size() != 16) throw ValidationError("gate unitary needs 16 entries");
      for (int k = 0; k < 16; ++k) g.unitary(k / 4, k % 4) = cplx(u[k][0].get<double>(), u[k][1].get<double>());
      if (!is_unitary(g.unitary)) throw ValidationError("plan contains a non-unitary gate");
      layer.push_back(g);
    }
    plan.gates.push_back(std::move(layer));
  }
  if (static_cast<int>(plan.gates.size()) != plan.layers) {
    throw ValidationError("plan layer count mismatch");
  }
  return plan;
}

}  // namespace qtraj
