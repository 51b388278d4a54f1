#include "tvcap/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvcap/constants.hpp"
#include "tvcap/error.hpp"
#include "tvcap/simd.hpp"

namespace tvcap {

using constants::speed_of_light;
using constants::vacuum_impedance;
using constants::vacuum_permittivity;

Fdtd1D::Fdtd1D(const Layout& layout, std::function<double(double)> incident)
    : layout_(layout), dt_(layout.courant * layout.dz / speed_of_light), incident_(std::move(incident)) {
  require(std::isfinite(layout.dz) && layout.dz > 0.0, Errc::invalid_argument, "dz must be positive");
  require(layout.courant > 0.0 && layout.courant <= 1.0, Errc::courant_violation,
          "Courant number c dt / dz must lie in (0, 1]");
  require(layout.nodes >= 4, Errc::invalid_argument, "grid needs at least four nodes");
  require(layout.tfsf_node >= 1 && layout.tfsf_node + 2 < layout.nodes, Errc::invalid_argument,
          "TF/SF plane must leave scattered-field cells above it");
  require(static_cast<bool>(incident_), Errc::invalid_argument, "incident field is required");
  e_.assign(layout.nodes, 0.0);
  h_.assign(layout.nodes - 1, 0.0);
}

double Fdtd1D::z(std::size_t node) const {
  return (static_cast<double>(node) - static_cast<double>(layout_.origin)) * layout_.dz;
}

double Fdtd1D::incident(double t, double z) const { return incident_(t + z / speed_of_light); }

void Fdtd1D::add_material(std::size_t node, double chi_static, double dynamic_weight) {
  require(node >= 1 && node + 1 < layout_.nodes && node != layout_.tfsf_node, Errc::invalid_argument,
          "material node must be interior and off the TF/SF plane");
  require(1.0 + chi_static > 0.0, Errc::invalid_argument, "static permittivity must be positive");
  for (const Material& m : materials_) {
    require(m.node != node, Errc::invalid_argument, "material node added twice");
  }
  materials_.push_back({node, chi_static, dynamic_weight, 0.0});
  std::sort(materials_.begin(), materials_.end(), [](const Material& a, const Material& b) { return a.node < b.node; });
  e_old_.resize(materials_.size());
}

void Fdtd1D::set_dynamic_chi(std::function<double(double)> chi) { chi_ = std::move(chi); }

void Fdtd1D::set_sheet(std::size_t node, double R) {
  require(std::isfinite(R) && R > 0.0, Errc::nonpositive_resistance, "sheet resistance must be positive");
  require(node >= 1 && node + 1 < layout_.nodes && node != layout_.tfsf_node, Errc::invalid_argument,
          "sheet node must be interior and off the TF/SF plane");
  sheet_node_ = node;
  sheet_R_ = R;
  // the semi-implicit sheet update needs the node on the material list
  if (std::none_of(materials_.begin(), materials_.end(), [&](const Material& m) { return m.node == node; })) {
    add_material(node, 0.0, 0.0);
  }
}

void Fdtd1D::initialize() {
  t_ = 0.0;
  const std::size_t b = layout_.tfsf_node;
  std::fill(e_.begin(), e_.end(), 0.0);
  std::fill(h_.begin(), h_.end(), 0.0);
  for (std::size_t i = 0; i <= b; ++i) e_[i] = incident(0.0, z(i));
  for (std::size_t i = 0; i < b; ++i) h_[i] = -incident(-0.5 * dt_, z(i) + 0.5 * layout_.dz);
  const double chi0 = chi_at(0.0);
  for (Material& m : materials_) m.d = (1.0 + m.chi_static + m.weight * chi0) * e_[m.node];
}

Fdtd1D::StepPower Fdtd1D::step() {
  const auto& k = simd::kernels();
  const double s = layout_.courant;
  const std::size_t n = layout_.nodes;
  const std::size_t b = layout_.tfsf_node;
  const double t0 = t_;
  const double t1 = t_ + dt_;
  const double e_first = e_[0];
  const double e_second = e_[1];
  const double e_last = e_[n - 1];
  const double e_penult = e_[n - 2];
  for (std::size_t m = 0; m < materials_.size(); ++m) e_old_[m] = e_[materials_[m].node];

  k.curl_e(h_.data(), e_.data(), s, n - 1);
  h_[b] -= s * incident(t0, z(b));

  k.curl_h(e_.data() + 1, h_.data() + 1, s, n - 2);
  e_[b] += s * incident(t0 + 0.5 * dt_, z(b) + 0.5 * layout_.dz);

  const double chi0 = chi_at(t0);
  const double chi1 = chi_at(t1);
  const double kappa = sheet_node_ ? s * vacuum_impedance / (2.0 * sheet_R_) : 0.0;
  const double scale = vacuum_permittivity * layout_.dz / dt_;
  StepPower out;
  for (std::size_t m = 0; m < materials_.size(); ++m) {
    Material& mat = materials_[m];
    const std::size_t i = mat.node;
    const double curl = s * (h_[i] - h_[i - 1]);
    const double eps1 = 1.0 + mat.chi_static + mat.weight * chi1;
    const double e0 = e_old_[m];
    double e1;
    if (sheet_node_ && *sheet_node_ == i) {
      mat.d = (mat.d - curl - kappa * e0) / (1.0 + kappa / eps1);
      e1 = mat.d / eps1;
      const double j = 0.5 * (e0 + e1) / sheet_R_;
      out.J_static += j;
      out.p_static += 0.5 * (e0 + e1) * j;
    } else {
      mat.d -= curl;
      e1 = mat.d / eps1;
    }
    e_[i] = e1;
    const double e_mid = 0.5 * (e0 + e1);
    const double j_st = scale * mat.chi_static * (e1 - e0);
    const double j_dy = scale * mat.weight * (chi1 * e1 - chi0 * e0);
    out.J_static += j_st;
    out.J_dynamic += j_dy;
    out.p_static += e_mid * j_st;
    out.p_dynamic += e_mid * j_dy;
  }

  const double mur = (s - 1.0) / (s + 1.0);
  e_[0] = e_second + mur * (e_[1] - e_first);
  e_[n - 1] = e_penult + mur * (e_[n - 2] - e_last);
  t_ = t1;
  return out;
}

namespace {

struct FdtdGeometry {
  std::size_t cells_per_slab;
  double dz;
  std::size_t probe_offset;
  Fdtd1D::Layout layout;
};

FdtdGeometry make_geometry(const SheetSpec& spec, const FdtdOptions& opts) {
  require(opts.cells_per_slab >= 20, Errc::grid_too_coarse, "the slab needs at least 20 cells across d");
  require(opts.courant > 0.0 && opts.courant <= 1.0, Errc::courant_violation,
          "Courant number c dt / dz must lie in (0, 1]");
  require(opts.margin_cells >= 4, Errc::invalid_argument, "margin_cells must be >= 4");
  const double d = spec.thickness();
  const double dz = d / static_cast<double>(opts.cells_per_slab);
  const auto probe = static_cast<std::size_t>(std::llround(spec.source.wavelength() / dz));
  FdtdGeometry g{opts.cells_per_slab, dz, probe, {}};
  g.layout.dz = dz;
  g.layout.courant = opts.courant;
  g.layout.origin = opts.margin_cells + probe;
  g.layout.tfsf_node = g.layout.origin + probe + opts.margin_cells / 2;
  g.layout.nodes = g.layout.tfsf_node + opts.margin_cells / 2 + 1;
  return g;
}

}  // namespace

double fdtd_stop_time(const SheetSpec& spec, const FdtdOptions& opts) {
  const double stop = sheet_stop_time(spec);
  return stop - std::max(0.0, opts.modulation_plane * spec.thickness()) / speed_of_light;
}

FieldProbeRecord simulate_fdtd(const SheetSpec& spec, double t_end, bool modulation_on, const FdtdOptions& opts) {
  spec.validate();
  require(spec.variant == SheetVariant::two_dielectric_slabs, Errc::invalid_argument,
          "FDTD models the two-dielectric-slab variant only");
  require(std::isfinite(t_end) && t_end > 0.0, Errc::invalid_argument, "t_end must be positive");
  require(std::isfinite(opts.modulation_plane), Errc::invalid_argument, "modulation_plane must be finite");
  const FdtdGeometry g = make_geometry(spec, opts);
  const PlaneWaveSource& src = spec.source;
  const double d = spec.thickness();

  Fdtd1D sim(g.layout, [src](double u) { return src(u); });
  const double dt = sim.dt();
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  require(steps >= 2, Errc::invalid_argument, "t_end is shorter than two steps");

  const std::size_t n_slab = g.cells_per_slab;
  const std::size_t s0 = g.layout.origin;
  const double chi_st = spec.static_eps_r() - 1.0;
  for (std::size_t j = 0; j <= n_slab; ++j) {
    // static slab on [-d, 0], time-varying slab on [0, d]; end nodes carry half weight
    const double w = (j == 0 || j == n_slab) ? 0.5 : 1.0;
    if (j == 0) {
      sim.add_material(s0, 0.5 * chi_st, 0.5);
    } else {
      const std::size_t i_st = opts.time_varying_on_top ? s0 - j : s0 + j;
      const std::size_t i_tv = opts.time_varying_on_top ? s0 + j : s0 - j;
      sim.add_material(i_st, w * chi_st, 0.0);
      sim.add_material(i_tv, 0.0, w);
    }
  }
  if (spec.R0) sim.set_sheet(s0, *spec.R0);

  if (modulation_on) {
    const double stop = fdtd_stop_time(spec, opts);
    require(t_end <= stop * (1.0 + 1e-12), Errc::positivity_violated,
            "t_end exceeds 90% of the time at which C_R(t) reaches zero (" + std::to_string(stop) + " s allowed)");
    const double shift = opts.modulation_plane * d / speed_of_light;
    const auto n_prof = steps + 3 + static_cast<std::size_t>(std::ceil(std::max(0.0, shift) / dt));
    const SensorModulation m = synth_sensor_modulation(src, spec.C0, spec.R0, spec.modulation_c1(),
                                                       spec.modulation_c2(), 0.0, dt, n_prof);
    Waveform tot = m.total();
    require(tot.min() >= 0.0, Errc::positivity_violated, "C_C + C_R goes negative: slab permittivity below 1");
    const double to_chi = vacuum_impedance * speed_of_light / d;
    sim.set_dynamic_chi([tot = std::move(tot), shift, to_chi](double t) { return to_chi * tot.at(t + shift); });
  }

  sim.initialize();
  const std::size_t i_above = s0 + g.probe_offset;
  const std::size_t i_below = s0 - g.probe_offset;
  const double z_above = sim.z(i_above);
  const double z_below = sim.z(i_below);

  std::vector<double> above(steps + 1), below(steps + 1), inc_above(steps + 1), inc_below(steps + 1);
  std::vector<double> j_st(steps), j_tv(steps), p_st(steps), p_tv(steps);
  auto probe = [&](std::size_t n) {
    const double t = sim.time();
    above[n] = sim.e(i_above);
    below[n] = sim.e(i_below);
    inc_above[n] = sim.incident(t, z_above);
    inc_below[n] = sim.incident(t, z_below);
  };
  probe(0);
  for (std::size_t n = 0; n < steps; ++n) {
    const Fdtd1D::StepPower p = sim.step();
    j_st[n] = p.J_static;
    j_tv[n] = p.J_dynamic;
    p_st[n] = p.p_static;
    p_tv[n] = p.p_dynamic;
    probe(n + 1);
    require(std::isfinite(above[n + 1]) && std::isfinite(below[n + 1]), Errc::invalid_argument,
            "FDTD produced a non-finite field");
  }

  auto wf = [&](std::vector<double> v, const char* unit) { return Waveform(0.0, dt, std::move(v), unit); };
  auto half = [&](std::vector<double> v, const char* unit) { return Waveform(0.5 * dt, dt, std::move(v), unit); };
  FieldProbeRecord rec{"fdtd",
                       wf(std::move(above), "V/m"),
                       wf(std::move(below), "V/m"),
                       wf(std::move(inc_above), "V/m"),
                       wf(std::move(inc_below), "V/m"),
                       {},
                       src.period(),
                       modulation_on};
  rec.layers.push_back({"static", half(std::move(j_st), "A/m"), half(std::move(p_st), "W/m^2")});
  rec.layers.push_back({"time-varying", half(std::move(j_tv), "A/m"), half(std::move(p_tv), "W/m^2")});
  return rec;
}

}  // namespace tvcap
