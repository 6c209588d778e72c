"""Pre-stressed viscoelastic fibre-reinforced tubes.

Two reference configurations per particle (load-free and stress-free, linked
by the unimodular map F0) make residual stresses a constitutive input:
stresses are evaluated on the stress-free configuration and pulled back.  The
package bundles the constitutive laws (Mooney-Rivlin matrix, exponential fibre
families, isotropic and fibre Maxwell branches), semi-analytical equilibrium
solvers for layered thick-walled tubes, the opened-sector energy scan that
exhibits mutual locking of incompatible layers, and a material-point driver.

Units: mm, kPa, kPa s; forces in kPa mm^2; energies in microjoule (kPa mm^3).
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, NoConvergence, NonPositiveDeterminant,
                     NonPositiveStretch, QuadratureFailure, SingularTensor)
from .materials import (EquilibriumMaterial, HolzapfelFibreParams, MooneyRivlinParams,
                        PreStressField, cauchy_from_pk2, csf_from_clf, clf_from_csf,
                        equilibrium_energy_sf, equilibrium_pk2_sf, extra_cauchy_equilibrium,
                        fibre_directions, fibre_energy, fibre_f, fibre_sq_stretch,
                        holzapfel_pk2_sf, mooney_rivlin_energy, mooney_rivlin_pk2_sf,
                        pull_back_pk2, sq_stretch_gradient)
from .maxwell import (FibreMaxwellParams, IsoMaxwellParams, ViscousState,
                      fibre_evolve_step, fibre_flow_rhs, fibre_overstress,
                      fibre_overstress_scalar, initial_state, iso_energy,
                      iso_evolve_step, iso_flow_rhs, iso_overstress,
                      overstress_pk2_sf, visc_fibre_energy, visc_fibre_f)
from .tube import (InverseSolution, LoadFreeSolution, MaterialLayer, OpeningMap,
                   SectorGeometry, TubeGeometry, WallSegment, F0_at,
                   equilibrium_residuals, f_lf, f_sf, gauss_segment, net_pressure,
                   newton2, reduced_axial_force, sector_to_tube_F,
                   solve_inverse_sf, solve_load_free, wall_stress_profile)
from .opening import (EnergyCurve, OpenedStateCandidate, equilibrate_opened,
                      find_opening_angle, opened_energy, opened_segments)
from .driver import LoadProgram, PointTrace, run_point
from . import config, tensor

__all__ = [name for name in dir() if not name.startswith('_')]
