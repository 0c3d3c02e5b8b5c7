#include "qtraj/optimizer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxStep = 0.5;  // radians per line-search trial
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;
constexpr double kMergeRadius = 0.05;  // radians
constexpr double kMinStep = 1e-9;  // radians; shorter trials cannot move the cost

struct Vec2 {
  double x = 0.0, y = 0.0;
};

Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Start {
  Vec2 x;
  double f = kInf;
  double f_seed = kInf;
  bool converged = false;
};

class Objective {
 public:
  Objective(const std::function<double(RotationAngles)>& f, double h) : f_(f), h_(h) {}

  double operator()(Vec2 x) {
    ++evals_;
    const double v = f_({x.x, x.y});
    return std::isnan(v) ? kInf : v;
  }

  Vec2 gradient(Vec2 x, double fx) {
    return {partial(x, {h_, 0.0}, fx), partial(x, {0.0, h_}, fx)};
  }

  int evaluations() const { return evals_; }

 private:
  double partial(Vec2 x, Vec2 e, double fx) {
    const double fp = (*this)(x + e);
    const double fm = (*this)(x - e);
    const bool okp = std::isfinite(fp);
    const bool okm = std::isfinite(fm);
    if (okp && okm) return (fp - fm) / (2.0 * h_);
    if (okp && std::isfinite(fx)) return (fp - fx) / h_;
    if (okm && std::isfinite(fx)) return (fx - fm) / h_;
    return 0.0;
  }

  const std::function<double(RotationAngles)>& f_;
  double h_;
  int evals_ = 0;
};

// Distance between two angle pairs modulo the rotation's symmetries (theta has
// period pi / 2 up to a branch swap, phi has period pi).
double angle_distance(Vec2 a, Vec2 b) {
  const RotationAngles ca = RotationAngles{a.x, a.y}.canonical();
  const RotationAngles cb = RotationAngles{b.x, b.y}.canonical();
  double dt = std::abs(ca.theta - cb.theta);
  double dp = std::abs(ca.phi - cb.phi);
  dt = std::min(dt, 0.5 * kPi - dt);
  dp = std::min(dp, kPi - dp);
  return std::max(dt, dp);
}

// A start that walks into the neighbourhood of an earlier start's endpoint, with no
// better cost, adopts that endpoint instead of re-converging to it.
const Start* basin_match(const std::vector<Start>& done, Vec2 x, double f, double tol) {
  for (const Start& d : done) {
    if (d.converged && f >= d.f - tol && angle_distance(x, d.x) < kMergeRadius) return &d;
  }
  return nullptr;
}

Start run_start(Objective& obj, Vec2 x0, const OptimizerConfig& cfg,
                const std::vector<Start>& done) {
  Start s;
  s.x = x0;
  s.f = s.f_seed = obj(x0);
  if (!std::isfinite(s.f)) return s;
  Vec2 g = obj.gradient(s.x, s.f);
  // Inverse Hessian approximation, symmetric 2x2.
  double h00 = 1.0, h01 = 0.0, h11 = 1.0;
  bool first_update = true;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (norm(g) <= 1e-12) {
      s.converged = true;
      return s;
    }
    Vec2 d{-(h00 * g.x + h01 * g.y), -(h01 * g.x + h11 * g.y)};
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      h00 = h11 = 1.0;
      h01 = 0.0;
      d = -1.0 * g;
      slope = dot(g, d);
    }
    const double len = norm(d);
    if (len > kMaxStep) {
      d = (kMaxStep / len) * d;
      slope *= kMaxStep / len;
    }
    double t = 1.0;
    Vec2 xn;
    double fn = kInf;
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks && t * norm(d) > kMinStep; ++k, t *= 0.5) {
      xn = s.x + t * d;
      fn = obj(xn);
      if (std::isfinite(fn) && fn <= s.f + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent along a finite-difference direction: treat as stationary when the
      // gradient is at the finite-difference noise level.
      s.converged = norm(g) <= std::sqrt(cfg.tol);
      return s;
    }
    const double df = s.f - fn;
    const Vec2 step = xn - s.x;
    s.x = xn;
    s.f = fn;
    if (df <= cfg.tol) {
      s.converged = true;
      return s;
    }
    if (const Start* d = basin_match(done, s.x, s.f, cfg.tol)) {
      s.x = d->x;
      s.f = d->f;
      s.converged = true;
      return s;
    }
    const Vec2 gn = obj.gradient(s.x, s.f);
    const Vec2 y = gn - g;
    const double sy = dot(step, y);
    if (sy > 1e-14) {
      if (first_update) {
        // Rescale the identity guess to the observed curvature before the first update.
        const double scale = sy / dot(y, y);
        h00 = h11 = scale;
        h01 = 0.0;
        first_update = false;
      }
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / sy;
      const Vec2 hy{h00 * y.x + h01 * y.y, h01 * y.x + h11 * y.y};
      const double yhy = dot(y, hy);
      const double c = (1.0 + rho * yhy) * rho;
      h00 += c * step.x * step.x - rho * 2.0 * hy.x * step.x;
      h11 += c * step.y * step.y - rho * 2.0 * hy.y * step.y;
      h01 += c * step.x * step.y - rho * (hy.x * step.y + hy.y * step.x);
    }
    g = gn;
  }
  return s;
}

bool lex_less(RotationAngles a, RotationAngles b) {
  if (a.theta != b.theta) return a.theta < b.theta;
  return a.phi < b.phi;
}

}  // namespace

std::vector<RotationAngles> default_grid_seeds() {
  return {{0.0, 0.0}, {kPi / 8, 0.0}, {kPi / 4, 0.0}, {3 * kPi / 8, 0.0}, {kPi / 4, kPi / 8}};
}

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
  if (grid_seeds.empty()) throw ValidationError("grid_seeds must not be empty");
  if (!(grad_step > 0.0)) throw ValidationError("grad_step must be > 0");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
}

SelectionResult minimize_angles(const std::function<double(RotationAngles)>& cost,
                                const OptimizerConfig& cfg) {
  cfg.validate();
  Objective obj(cost, cfg.grad_step);
  const std::size_t starts = std::min<std::size_t>(cfg.restarts, cfg.grid_seeds.size());
  std::vector<Start> results;
  double best_seed = kInf;
  for (std::size_t i = 0; i < starts; ++i) {
    const Vec2 x0{cfg.grid_seeds[i].theta, cfg.grid_seeds[i].phi};
    results.push_back(run_start(obj, x0, cfg, results));
    best_seed = std::min(best_seed, results.back().f_seed);
  }
  double best = kInf;
  for (const Start& s : results) best = std::min(best, s.f);

  SelectionResult out;
  out.evaluations = obj.evaluations();
  if (!std::isfinite(best)) {
    out.angles = cfg.grid_seeds.front().canonical();
    out.cost = kInf;
    out.converged = false;
    return out;
  }
  bool have = false;
  for (const Start& s : results) {
    if (!(s.f <= best + cfg.tol) || s.f > best_seed) continue;
    const RotationAngles a = RotationAngles{s.x.x, s.x.y}.canonical();
    if (!have || lex_less(a, out.angles)) {
      out.angles = a;
      out.cost = s.f;
      out.converged = s.converged;
      have = true;
    }
  }
  if (!have) {
    for (const Start& s : results) {
      if (s.f == best) {
        out.angles = RotationAngles{s.x.x, s.x.y}.canonical();
        out.cost = s.f;
        out.converged = s.converged;
        break;
      }
    }
  }
  return out;
}

}  // namespace qtraj
