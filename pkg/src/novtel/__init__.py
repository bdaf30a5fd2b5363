"""Exact telescopes of chain complexes over the Novikov ring.

Subpackages: :mod:`novikov` (scalars), :mod:`linalg` (Smith forms and
lattices), :mod:`complex`, :mod:`ray`, :mod:`completion`, :mod:`unital`,
:mod:`neck` and the command line front end :mod:`cli`.
"""

from .errors import (InvariantViolation, NovtelError, ResourceCapExceeded, ShapeError,
                     UnsupportedInput, ValidationError)
from .novikov import INF, ONE, ZERO, NovikovScalar, as_fraction, parse_scalar
from .linalg import Mat, snf
from .complex import (Barcode, GradedComplex, GradedMap, Grading, Z, Z2, cone, homology_barcode,
                      is_quasi_iso, shift, tensor, two_term)
from .ray import (Ray, RayHomotopy, RayMorphism, colimit_mod, constant_ray, rank_one_ray, strictify,
                  telescope, unit_ray)
from .completion import (brute_force_telescope_homology, exactness_check, induced_map,
                         truncated_homology, visibility)
from .unital import (UnitData, check_realization, dga_realization, product_on_classes, raise_,
                     strictify_unit, validate_unit, visibility_via_unit)
from .neck import (NeckParams, OrbitDatum, apply_phi, build_neck, check_bounds, delta,
                   ellipsoid_orbits, index_bounded_check, phi_extends)

__version__ = "0.1.0"
