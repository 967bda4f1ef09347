#ifndef GTPS_SWEEP_HPP
#define GTPS_SWEEP_HPP

#include <cmath>
#include <string>
#include <vector>

#include "gtps/models.hpp"
#include "gtps/optim.hpp"

namespace gtps {

enum class InitPolicy { warm_start, identity };
enum class SweepKind { integrability, disorder };

struct GridPoint {
  double strength;             // signed label: the field h, or ±Delta_j on a disorder line
  std::vector<double> params;  // {h} or the coupling vector {J_i}
};

struct SweepPlan {
  SweepKind kind = SweepKind::integrability;
  int n_sites = 6;
  double j_center = 1.05;
  double h_field = 0.0;  // fixed h for the disorder protocol
  double delta = 0.005;
  int n_steps = 10;
  InitPolicy init_policy = InitPolicy::warm_start;
  std::uint64_t seed = 0;
  std::string label = "sweep";
  OptConfig opt;
  std::vector<GridPoint> grid;  // ordered by ascending strength; center at index n_steps

  void validate() const {
    if (n_sites < 2 || n_sites % 2 != 0)
      throw std::invalid_argument("SweepPlan: N must be even and >= 2");
    if (n_steps < 2) throw std::invalid_argument("SweepPlan: n_steps must be >= 2");
    if (static_cast<int>(grid.size()) != 2 * n_steps + 1)
      throw std::invalid_argument("SweepPlan: grid must hold 2*n_steps+1 points");
    if (init_policy == InitPolicy::warm_start && kind != SweepKind::integrability)
      throw std::invalid_argument("SweepPlan: warm start is defined for the ordered 1-D sweep");
  }
};

struct SweepRecord {
  int index = 0;
  double strength = 0.0;
  std::vector<double> params;
  double f_min = 0.0;
  int iters = 0;
  bool converged = false;
  double dist_prev = 0.0;  // D(A_alpha, A_{alpha-1}); 0 at the lower endpoint
  double dist_next = 0.0;
  double g = 0.0;
  bool endpoint = false;
  std::int64_t resonances = 0;
  std::uint64_t seed = 0;
  cmat v_min;  // optimized Hamiltonian rotation (sidecar only in outputs)
};

// discrete susceptibility from the two adjacent squared distances
inline double susceptibility(double dist_prev, double dist_next, double dh) {
  if (dh == 0.0) throw std::invalid_argument("susceptibility: zero grid step");
  return (dist_prev * dist_prev + dist_next * dist_next) / (2.0 * dh * dh);
}

// one-sided endpoint variant
inline double susceptibility_endpoint(double dist, double dh) {
  if (dh == 0.0) throw std::invalid_argument("susceptibility: zero grid step");
  return dist * dist / (dh * dh);
}

inline SweepPlan integrability_plan(int n_sites, double j, double delta, int n_steps,
                                    std::uint64_t seed, const OptConfig& opt) {
  SweepPlan plan;
  plan.kind = SweepKind::integrability;
  plan.n_sites = n_sites;
  plan.j_center = j;
  plan.delta = delta;
  plan.n_steps = n_steps;
  plan.init_policy = InitPolicy::warm_start;
  plan.seed = seed;
  plan.label = "integrability";
  plan.opt = opt;
  const double dh = delta / n_steps;
  for (int a = -n_steps; a <= n_steps; ++a)
    plan.grid.push_back({a * dh, {a * dh}});
  plan.validate();
  return plan;
}

// Disorder sampling line: draw J_i uniformly in [j_center-delta, j_center+delta],
// sample the segment to the clean point equidistantly, and extend through the
// symmetrically opposite points of increasing disorder strength.
inline SweepPlan disorder_line_plan(int n_sites, double h, double j_center, double delta,
                                    int n_steps, RngStream& rng, const OptConfig& opt) {
  if (delta < 0.0) throw std::invalid_argument("disorder_line_plan: delta must be >= 0");
  SweepPlan plan;
  plan.kind = SweepKind::disorder;
  plan.n_sites = n_sites;
  plan.j_center = j_center;
  plan.h_field = h;
  plan.delta = delta;
  plan.n_steps = n_steps;
  plan.init_policy = InitPolicy::identity;
  plan.seed = rng.seed();
  plan.label = rng.label();
  plan.opt = opt;
  std::vector<double> draw(static_cast<std::size_t>(n_sites));
  for (auto& v : draw) v = rng.uniform(j_center - delta, j_center + delta);
  for (int a = -n_steps; a <= n_steps; ++a) {
    std::vector<double> p(static_cast<std::size_t>(n_sites));
    const double frac = static_cast<double>(a) / n_steps;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = j_center + frac * (draw[i] - j_center);
    plan.grid.push_back({frac * delta, std::move(p)});
  }
  plan.validate();
  return plan;
}

namespace detail {

inline HamiltonianModel point_hamiltonian(const SweepPlan& plan, const GridPoint& pt) {
  TfimParams p;
  p.n = plan.n_sites;
  p.j = plan.j_center;
  if (plan.kind == SweepKind::integrability) {
    p.h = pt.params.at(0);
  } else {
    p.h = plan.h_field;
    p.j_site = pt.params;
  }
  return build_tfim(p);
}

inline double grid_step(const SweepPlan& plan) {
  if (plan.kind == SweepKind::integrability) return plan.delta / plan.n_steps;
  // Euclidean distance between adjacent coupling vectors (constant on the line)
  double sq = 0.0;
  const auto& a = plan.grid[static_cast<std::size_t>(plan.n_steps)].params;     // center
  const auto& b = plan.grid[static_cast<std::size_t>(plan.n_steps + 1)].params; // first step
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

}  // namespace detail

// Run the optimizer over the plan's grid. Warm-started sweeps proceed outward
// from the center in both directions; identity-policy
// points are independent.
inline std::vector<SweepRecord> run_sweep(const SweepPlan& plan) {
  plan.validate();
  const int n = plan.n_sites;
  const Eigen::Index d = Eigen::Index{1} << n;
  std::vector<int> left(static_cast<std::size_t>(n / 2));
  for (int i = 0; i < n / 2; ++i) left[static_cast<std::size_t>(i)] = i;
  const AlgebraSpec bip = factor_bipartition(n, left, cmat::Identity(d, d));

  const int total = 2 * plan.n_steps + 1;
  const int center = plan.n_steps;
  std::vector<SweepRecord> records(static_cast<std::size_t>(total));

  auto solve_point = [&](int idx, const cmat& v0) {
    const auto& pt = plan.grid[static_cast<std::size_t>(idx)];
    const HamiltonianModel ham = detail::point_hamiltonian(plan, pt);
    const OptState opt = minimize(bip, ham, v0, plan.opt);
    SweepRecord rec;
    rec.index = idx;
    rec.strength = pt.strength;
    rec.params = pt.params;
    rec.f_min = opt.f;
    rec.iters = opt.iter;
    rec.converged = opt.converged;
    rec.resonances = resonance_check(ham, 1e-8).count;
    rec.seed = plan.seed;
    rec.v_min = opt.v;
    records[static_cast<std::size_t>(idx)] = std::move(rec);
  };

  const cmat id = cmat::Identity(d, d);
  if (plan.init_policy == InitPolicy::warm_start) {
    solve_point(center, id);
    for (int idx = center + 1; idx < total; ++idx)
      solve_point(idx, records[static_cast<std::size_t>(idx - 1)].v_min);
    for (int idx = center - 1; idx >= 0; --idx)
      solve_point(idx, records[static_cast<std::size_t>(idx + 1)].v_min);
  } else {
    for (int idx = 0; idx < total; ++idx) solve_point(idx, id);
  }

  // adjacent algebra distances and the discrete susceptibility
  const double dh = detail::grid_step(plan);
  std::vector<double> dist(static_cast<std::size_t>(total - 1), 0.0);
  for (int idx = 0; idx + 1 < total; ++idx) {
    const AlgebraSpec a = conjugate(bip, records[static_cast<std::size_t>(idx)].v_min.adjoint());
    const AlgebraSpec b =
        conjugate(bip, records[static_cast<std::size_t>(idx + 1)].v_min.adjoint());
    dist[static_cast<std::size_t>(idx)] = distance(a, b);
  }
  for (int idx = 0; idx < total; ++idx) {
    auto& rec = records[static_cast<std::size_t>(idx)];
    rec.dist_prev = idx > 0 ? dist[static_cast<std::size_t>(idx - 1)] : 0.0;
    rec.dist_next = idx + 1 < total ? dist[static_cast<std::size_t>(idx)] : 0.0;
    rec.endpoint = idx == 0 || idx == total - 1;
    if (dh == 0.0) {
      rec.g = 0.0;  // coincident grid (delta = 0): no susceptibility signal
    } else if (rec.endpoint) {
      rec.g = susceptibility_endpoint(idx == 0 ? rec.dist_next : rec.dist_prev, dh);
    } else {
      rec.g = susceptibility(rec.dist_prev, rec.dist_next, dh);
    }
  }
  return records;
}

struct DisorderAggregate {
  double strength = 0.0;
  double mean_g = 0.0;
  double stderr_g = 0.0;
  double mean_f = 0.0;
  int n_avg = 0;
  int n_converged = 0;
};

// per-strength mean and standard error of g across disorder realizations
inline std::vector<DisorderAggregate> disorder_average(
    const std::vector<std::vector<SweepRecord>>& realizations) {
  if (realizations.empty()) throw std::invalid_argument("disorder_average: need n_avg >= 1");
  const std::size_t total = realizations.front().size();
  std::vector<DisorderAggregate> out(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    double sum = 0.0, sumsq = 0.0, fsum = 0.0;
    int nconv = 0;
    for (const auto& rec : realizations) {
      const double g = rec.at(idx).g;
      sum += g;
      sumsq += g * g;
      fsum += rec.at(idx).f_min;
      nconv += rec.at(idx).converged ? 1 : 0;
    }
    const int n = static_cast<int>(realizations.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    out[idx].strength = realizations.front().at(idx).strength;
    out[idx].mean_g = mean;
    out[idx].stderr_g = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    out[idx].mean_f = fsum / n;
    out[idx].n_avg = n;
    out[idx].n_converged = nconv;
  }
  return out;
}

struct DisorderSweepResult {
  std::vector<std::vector<SweepRecord>> realizations;
  std::vector<DisorderAggregate> aggregates;
};

// full disorder protocol: n_avg independent realizations, averaged
inline DisorderSweepResult disorder_sweep(int n_sites, double h, double j_center, double delta,
                                          int n_steps, int n_avg, std::uint64_t seed,
                                          const OptConfig& opt) {
  if (n_avg < 1) throw std::invalid_argument("disorder_sweep: need n_avg >= 1");
  RngStream root(seed, "disorder");
  DisorderSweepResult out;
  for (int r = 0; r < n_avg; ++r) {
    RngStream stream = root.substream("realization/" + std::to_string(r));
    const SweepPlan plan =
        disorder_line_plan(n_sites, h, j_center, delta, n_steps, stream, opt);
    out.realizations.push_back(run_sweep(plan));
  }
  out.aggregates = disorder_average(out.realizations);
  return out;
}

}  // namespace gtps

#endif
