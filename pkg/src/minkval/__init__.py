"""Minkowski valuations on convex bodies as convolution operators on the
sphere, the Grassmannian and the rotation group, with a numerical
verification harness."""
from .geometry import (Ball, Polytope, cube, kappa, minkowski_combine, project_volume, random_polytope,
                       simplex, sphere_area, support_eval, zonotope)
from .grassmann import (GrassmannFunction, GrassmannSample, RotationMeasure, Subspace, cosine, cosine_transform,
                        radon_to_sphere, sample_grassmann)
from .measures import (AtomicMeasure, DegenerateBodyError, NumericalConditioningError, QuermassVector,
                       area_measure, mixed_quermass_pair, quermass_kubota, quermass_steiner_fit,
                       surface_area_measure)
from .sphere import (SphereGrid, SphericalFunction, SupportBody, UnsupportedDimensionError, ZonalProfile,
                     approximate_identity, build_sphere_grid, convolve_zonal, is_support_function)
from .valuations import (CroftonMeasure, MinkowskiValuation, RealValuation, apply_crofton_minkowski,
                         crofton_valuation, difference_body, intrinsic_volume, klain_function, lambda_i,
                         mean_section_even, pi_i_crofton_measure, projection_body, projection_body_i)

__version__ = "0.1.0"
