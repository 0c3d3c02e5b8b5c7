#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "qtraj/linalg.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

// Haar-distributed dim x dim unitary: QR of a complex Ginibre matrix with the phases
// of R's diagonal moved into Q.
CMatrix sample_haar_unitary(int dim, CounterRng& rng);

struct GateOp {
  int site = 0;  // acts on (site, site + 1)
  Mat4 unitary;
};

struct CircuitPlan {
  int n = 0;
  int layers = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<GateOp>> gates;  // gates[l] for layer l + 1

  nlohmann::json to_json() const;
  static CircuitPlan from_json(const nlohmann::json& j);
};

// Layer l (1-based) pairs (0,1), (2,3), ... when odd and (1,2), (3,4), ... when even.
// The unitaries come from a stream keyed only by `seed`.
CircuitPlan brickwork(int n, int layers, std::uint64_t seed);

}  // namespace qtraj
