#include "truthplant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coatline {

void TruthPlantConfig::validate() const {
  geometry.validate();
  if (lateral_diffusivity < 0.0) throw ValidationError("truth plant: D_y must be >= 0");
  if (!(sim_dt > 0.0)) throw ValidationError("truth plant: sim_dt must be positive");
  if (grid_ny < 2) throw ValidationError("truth plant: grid_ny must be >= 2");
  if (!(domain_margin > 0.0)) throw ValidationError("truth plant: domain margin must be positive");
  if (noise_std < 0.0) throw ValidationError("truth plant: noise_std must be >= 0");
  if (!(supply_c0 > 0.0) || !(supply_c1 > 0.0))
    throw ValidationError("truth plant: supply filter coefficients must be positive");
  if (warmup_time < 0.0) throw ValidationError("truth plant: warmup_time must be >= 0");

  const double nu = lateral_diffusivity * sim_dt / (dy() * dy());
  if (nu > 0.5) {
    std::ostringstream msg;
    msg << "truth plant: explicit diffusion unstable, D_y*dt/dy^2 = " << nu << " > 0.5";
    throw ValidationError(msg.str());
  }

  // Sensor discs must fit in the grid.
  const double xs = geometry.sensor_station;
  const double rc = geometry.sensor_radius;
  if (xs + rc > grid_nx() * dx())
    throw ValidationError("truth plant: sensor disc extends past the outflow boundary");
  if (xs - rc < dx())
    throw ValidationError("truth plant: sensor disc overlaps the inlet boundary");
  for (double yj : geometry.stripe_centers)
    if (yj - rc < 0.0 || yj + rc > geometry.coating_width)
      throw ValidationError("truth plant: sensor disc extends past the lateral boundary");
}

std::size_t TruthPlantConfig::grid_nx() const {
  return static_cast<std::size_t>(
      std::ceil((1.0 + domain_margin) * geometry.sensor_station / dx() - 1e-9));
}

std::vector<double> inlet_flux_profile(const std::vector<double> &q, const Geometry &g,
                                       std::size_t grid_ny) {
  if (q.size() != g.n_inlets) throw ValidationError("inlet flux: flow vector length differs");
  const double dy = g.coating_width / static_cast<double>(grid_ny);
  std::vector<double> gamma(grid_ny, 0.0);
  for (std::size_t i = 0; i < g.n_inlets; ++i) {
    const double lo = g.stripe_centers[i] - 0.5 * g.stripe_width;
    const double hi = g.stripe_centers[i] + 0.5 * g.stripe_width;
    const double level = q[i] / g.stripe_width;
    const std::size_t j0 = static_cast<std::size_t>(std::max(0.0, std::floor(lo / dy)));
    for (std::size_t j = j0; j < grid_ny; ++j) {
      const double cell_lo = j * dy;
      if (cell_lo >= hi) break;
      const double overlap = std::min(hi, cell_lo + dy) - std::max(lo, cell_lo);
      if (overlap > 0.0) gamma[j] += level * overlap / dy;
    }
  }
  return gamma;
}

namespace {

struct SupplyFilter {
  // Same ZOH machinery as the surrogate, at the simulation step.
  DiscreteFilter filter;

  explicit SupplyFilter(const TruthPlantConfig &cfg)
      : filter(ScalarSurrogate::normalized(0.0, cfg.supply_c0, cfg.supply_c1), cfg.sim_dt) {}
};

// Steady filter state for constant input u: x = (I - Ad)^{-1} Bd u.
std::array<double, 2> steady_filter_state(const DiscreteFilter &f, double u) {
  const auto ad = f.ad();
  const auto bd = f.bd();
  const double a = 1.0 - ad[0], b = -ad[1], c = -ad[2], d = 1.0 - ad[3];
  const double det = a * d - b * c;
  return {u * (d * bd[0] - b * bd[1]) / det, u * (-c * bd[0] + a * bd[1]) / det};
}

std::vector<double> advance_supply(TruthPlantState &state, const std::vector<double> &q,
                                   const TruthPlantConfig &cfg) {
  // One ZOH step of the unit-DC supply filter per channel, in place.
  const DiscreteFilter proto(ScalarSurrogate::normalized(0.0, cfg.supply_c0, cfg.supply_c1),
                             cfg.sim_dt);
  const auto ad = proto.ad();
  const auto bd = proto.bd();
  const std::size_t n = cfg.geometry.n_inlets;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = state.supply_states(i, 0);
    const double x1 = state.supply_states(i, 1);
    out[i] = cfg.supply_c0 * x0;  // y = b0 x0, b1 = 0
    state.supply_states(i, 0) = ad[0] * x0 + ad[1] * x1 + bd[0] * q[i];
    state.supply_states(i, 1) = ad[2] * x0 + ad[3] * x1 + bd[1] * q[i];
  }
  return out;
}

} // namespace

TruthPlantState initial_state(const TruthPlantConfig &cfg, const std::vector<double> &q) {
  cfg.validate();
  if (q.size() != cfg.geometry.n_inlets)
    throw ValidationError("truth plant: flow vector length differs from n_inlets");
  TruthPlantState state;
  state.h_field = Matrix(cfg.grid_nx() + 1, cfg.grid_ny, 0.0);
  state.supply_states = Matrix(cfg.geometry.n_inlets, 2, 0.0);
  const SupplyFilter proto(cfg);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto x = steady_filter_state(proto.filter, q[i]);
    state.supply_states(i, 0) = x[0];
    state.supply_states(i, 1) = x[1];
  }
  return state;
}

void step_truth(TruthPlantState &state, const std::vector<double> &q, const TruthPlantConfig &cfg) {
  const std::size_t nx = cfg.grid_nx();
  const std::size_t ny = cfg.grid_ny;
  if (state.h_field.rows() != nx + 1 || state.h_field.cols() != ny)
    throw ValidationError("truth plant: state grid differs from config");

  // (1) supply dynamics, (2) inlet boundary from the filtered flux.
  const std::vector<double> q_f = advance_supply(state, q, cfg);
  const std::vector<double> gamma = inlet_flux_profile(q_f, cfg.geometry, ny);
  Matrix &h = state.h_field;
  const double u0 = cfg.geometry.web_speed;
  for (std::size_t j = 0; j < ny; ++j) h(0, j) = gamma[j] / u0;

  // (3) advection at CFL = 1: exact one-cell shift; the last material column
  // leaves, the ghost column enters.
  const double cell_area = cfg.dx() * cfg.dy();
  double out_flux = 0.0, in_flux = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    out_flux += h(nx, j);
    in_flux += h(0, j);
  }
  state.volume_out += out_flux * cell_area;
  state.volume_in += in_flux * cell_area;
  for (std::size_t i = nx; i >= 1; --i)
    for (std::size_t j = 0; j < ny; ++j) h(i, j) = h(i - 1, j);

  // (4) explicit lateral diffusion, zero-flux at the y boundaries.
  const double nu = cfg.lateral_diffusivity * cfg.sim_dt / (cfg.dy() * cfg.dy());
  if (nu > 0.0) {
    std::vector<double> row(ny);
    for (std::size_t i = 1; i <= nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) row[j] = h(i, j);
      for (std::size_t j = 0; j < ny; ++j) {
        const double left = j > 0 ? row[j - 1] : row[j];
        const double right = j + 1 < ny ? row[j + 1] : row[j];
        h(i, j) = row[j] + nu * (left - 2.0 * row[j] + right);
      }
    }
  }

  state.sim_time += cfg.sim_dt;
}

double total_volume(const TruthPlantState &state, const TruthPlantConfig &cfg) {
  const double cell_area = cfg.dx() * cfg.dy();
  double acc = 0.0;
  for (std::size_t i = 1; i < state.h_field.rows(); ++i)
    for (std::size_t j = 0; j < state.h_field.cols(); ++j) acc += state.h_field(i, j);
  return acc * cell_area;
}

namespace {

struct Footprint {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
};

std::vector<Footprint> sensor_footprints(const TruthPlantConfig &cfg) {
  const double dx = cfg.dx();
  const double dy = cfg.dy();
  const double xs = cfg.geometry.sensor_station;
  const double rc = cfg.geometry.sensor_radius;
  std::vector<Footprint> fps(cfg.geometry.n_inlets);
  for (std::size_t s = 0; s < fps.size(); ++s) {
    const double yj = cfg.geometry.stripe_centers[s];
    const std::size_t i_lo = static_cast<std::size_t>(std::max(1.0, std::floor((xs - rc) / dx)));
    const std::size_t i_hi = std::min(cfg.grid_nx(),
                                      static_cast<std::size_t>(std::ceil((xs + rc) / dx)) + 1);
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
      const double xc = (static_cast<double>(i) - 0.5) * dx;  // material cell i holds [(i-1)dx, i dx)
      for (std::size_t j = 0; j < cfg.grid_ny; ++j) {
        const double yc = (static_cast<double>(j) + 0.5) * dy;
        const double ddx = xc - xs;
        const double ddy = yc - yj;
        if (ddx * ddx + ddy * ddy <= rc * rc) fps[s].cells.emplace_back(i, j);
      }
    }
    if (fps[s].cells.empty())
      throw ValidationError("truth plant: sensor footprint contains no grid cells");
  }
  return fps;
}

} // namespace

std::vector<double> measure(const TruthPlantState &state, const TruthPlantConfig &cfg,
                            NormalSampler *noise) {
  const std::vector<Footprint> fps = sensor_footprints(cfg);
  std::vector<double> h(fps.size(), 0.0);
  for (std::size_t s = 0; s < fps.size(); ++s) {
    double acc = 0.0;
    for (const auto &[i, j] : fps[s].cells) acc += state.h_field(i, j);
    h[s] = acc / static_cast<double>(fps[s].cells.size());
    if (noise != nullptr && cfg.noise_std > 0.0) h[s] += cfg.noise_std * noise->next();
  }
  return h;
}

std::vector<double> steady_thickness(const TruthPlantConfig &cfg, const std::vector<double> &q) {
  cfg.validate();
  TruthPlantState state = initial_state(cfg, q);
  const std::size_t warm_steps =
      static_cast<std::size_t>(std::lround(cfg.warmup_time / cfg.sim_dt));
  for (std::size_t k = 0; k < warm_steps; ++k) step_truth(state, q, cfg);

  // Settling is finite (one transit plus the supply transient); insist that
  // the sensors are flat over a further transit, with a hard time budget.
  std::vector<double> prev = measure(state, cfg);
  const std::size_t transit_steps = warm_steps > 0 ? warm_steps : 1;
  const double budget = 10.0 * std::max(cfg.warmup_time, 1.0);
  while (true) {
    for (std::size_t k = 0; k < transit_steps; ++k) step_truth(state, q, cfg);
    const std::vector<double> cur = measure(state, cfg);
    double delta = 0.0, scale = 0.0;
    for (std::size_t s = 0; s < cur.size(); ++s) {
      delta = std::max(delta, std::abs(cur[s] - prev[s]));
      scale = std::max(scale, std::abs(cur[s]));
    }
    if (delta <= 1e-12 * std::max(scale, 1e-30)) return cur;
    if (state.sim_time > budget)
      throw NumericError("truth plant: no steady state within the time budget");
    prev = cur;
  }
}

ExperimentResult run_experiment(const TruthPlantConfig &cfg, const std::vector<double> &q0,
                                const SignalLog &q_log, double sample_time) {
  cfg.validate();
  q_log.validate();
  if (q_log.frame != Frame::absolute)
    throw ValidationError("run_experiment: input log must be absolute");
  if (q_log.channels() != cfg.geometry.n_inlets)
    throw ValidationError("run_experiment: channel count differs from n_inlets");
  const double ratio = sample_time / cfg.sim_dt;
  const long substeps = std::lround(ratio);
  if (substeps < 1 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9)
    throw ValidationError("run_experiment: Ts must be an integer multiple of sim_dt");

  TruthPlantState state = initial_state(cfg, q0);
  const std::size_t warm_steps =
      static_cast<std::size_t>(std::lround(cfg.warmup_time / cfg.sim_dt));
  for (std::size_t k = 0; k < warm_steps; ++k) step_truth(state, q0, cfg);

  ExperimentResult result;
  result.h0 = measure(state, cfg);  // noise-free steady reading

  NormalSampler noise(cfg.rng_seed);
  const std::size_t big_n = q_log.samples();
  const std::size_t n = q_log.channels();
  SignalLog log;
  log.sample_time = sample_time;
  log.frame = Frame::absolute;
  log.inputs = q_log.inputs;
  log.outputs = Matrix(n, big_n);
  std::vector<double> q(n);
  for (std::size_t k = 0; k < big_n; ++k) {
    const std::vector<double> h = measure(state, cfg, &noise);
    for (std::size_t j = 0; j < n; ++j) log.outputs(j, k) = h[j];
    for (std::size_t i = 0; i < n; ++i) q[i] = q_log.inputs(i, k);
    for (long m = 0; m < substeps; ++m) step_truth(state, q, cfg);
  }
  result.log = std::move(log);
  return result;
}

CrossGain dc_sensitivity(const TruthPlantConfig &cfg, const std::vector<double> &q0, double eps) {
  cfg.validate();
  if (q0.size() != cfg.geometry.n_inlets)
    throw ValidationError("dc_sensitivity: flow vector length differs from n_inlets");
  if (!(eps > 0.0)) throw ValidationError("dc_sensitivity: eps must be positive");

  const std::vector<double> base = steady_thickness(cfg, q0);
  const std::size_t n = q0.size();
  CrossGain gain;
  gain.provenance = GainProvenance::finite_difference;
  gain.h = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> q = q0;
    q[i] += eps;
    const std::vector<double> perturbed = steady_thickness(cfg, q);
    for (std::size_t j = 0; j < n; ++j) gain.h(j, i) = (perturbed[j] - base[j]) / eps;
  }
  return gain;
}

} // namespace coatline
