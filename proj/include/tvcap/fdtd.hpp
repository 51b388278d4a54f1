#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tvcap/sheetsim.hpp"

namespace tvcap {

// 1D Yee grid for a plane wave along z with fields normalized as
// E (V/m), H~ = eta0 H (V/m), D~ = eps_r E (V/m). Node i sits at
// z = (i - origin) dz. A downward plane wave E_inc(z, t) = f(t + z / c)
// is injected through a total-field/scattered-field plane above node
// `tfsf_node`; both ends use first-order Mur boundaries.
class Fdtd1D {
 public:
  struct Layout {
    double dz = 0.0;
    double courant = 1.0;
    std::size_t nodes = 0;
    std::size_t origin = 0;
    std::size_t tfsf_node = 0;  // last total-field node
  };

  Fdtd1D(const Layout& layout, std::function<double(double)> incident);

  // Polarizable node: eps_r(t) = 1 + chi_static + dynamic_weight * chi(t).
  void add_material(std::size_t node, double chi_static, double dynamic_weight);
  void set_dynamic_chi(std::function<double(double)> chi);
  // Lumped sheet conductance 1/R (per square) at one node.
  void set_sheet(std::size_t node, double R);

  // Fills the total-field region with the incident wave at t = 0.
  void initialize();

  struct StepPower {
    double J_static = 0.0;  // A/m, static polarization plus sheet conduction
    double J_dynamic = 0.0;
    double p_static = 0.0;  // W/m^2
    double p_dynamic = 0.0;
  };

  // Advances one step; the returned currents and powers sit at the half step.
  StepPower step();

  double time() const noexcept { return t_; }
  double dt() const noexcept { return dt_; }
  double dz() const noexcept { return layout_.dz; }
  double z(std::size_t node) const;
  double e(std::size_t node) const { return e_[node]; }
  std::size_t nodes() const noexcept { return layout_.nodes; }
  double incident(double t, double z) const;

 private:
  struct Material {
    std::size_t node;
    double chi_static;
    double weight;
    double d;
  };

  double chi_at(double t) const { return chi_ ? chi_(t) : 0.0; }

  Layout layout_;
  double dt_;
  double t_ = 0.0;
  std::function<double(double)> incident_;
  std::function<double(double)> chi_;
  std::vector<double> e_;
  std::vector<double> h_;
  std::vector<Material> materials_;
  std::vector<double> e_old_;
  std::optional<std::size_t> sheet_node_;
  double sheet_R_ = 0.0;
};

struct FdtdOptions {
  std::size_t cells_per_slab = 20;
  double courant = 1.0;
  std::size_t margin_cells = 64;
  // Plane (in units of d above the resistive sheet) whose incident field drives
  // the modulation of the time-varying slab. 0.5 is the slab centre.
  double modulation_plane = 0.5;
  // false puts the static slab on [0, d] and the time-varying slab on [-d, 0]
  bool time_varying_on_top = true;
};

// Variant (c): time-varying slab on [0, d] facing the source, resistive sheet at
// z = 0, static slab on [-d, 0]. Probes at +-wavelength; the record uses the
// step dt and carries the layer currents on the half-step grid.
FieldProbeRecord simulate_fdtd(const SheetSpec& spec, double t_end, bool modulation_on,
                               const FdtdOptions& opts = {});

// Longest run allowed with modulation on for this reference plane.
double fdtd_stop_time(const SheetSpec& spec, const FdtdOptions& opts = {});

}  // namespace tvcap
