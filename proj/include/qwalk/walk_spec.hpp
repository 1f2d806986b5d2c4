#pragma once

#include <string>
#include <string_view>

namespace qwalk {

enum class Boundary { kPeriodic, kOpen };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view text);

// Lattice and disorder parameters of a chiral walk.
//
// Angles are in radians. Every coin angle is drawn uniformly from
// [mean - halfwidth, mean + halfwidth]. With chiral_constraint set, the
// pre-shift angle (vartheta) is a copy of theta, which makes the Floquet
// operator satisfy sigma_2 U sigma_2 = U^dagger.
struct WalkSpec {
  int n_sites = 2;
  Boundary boundary = Boundary::kPeriodic;
  double theta_mean = 0.0;
  double phi_mean = 0.0;
  double theta_halfwidth = 0.0;
  double phi_halfwidth = 0.0;
  bool chiral_constraint = true;

  // Throws PreconditionError when a field is out of range.
  void validate() const;

  bool operator==(const WalkSpec&) const = default;
};

// Site index used as the origin of relative coordinates. Always even, so that
// site parity and relative-coordinate parity agree.
int lattice_center(int n_sites);

}  // namespace qwalk
