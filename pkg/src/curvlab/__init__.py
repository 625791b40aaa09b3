"""curvlab: a numerical laboratory for curvature-operator algebra.

Builds the orthonormal basis of so(n) with its bracket structure constants,
implements the sharp product, the irreducible decomposition and the quadratic
flow field on curvature operators, the equivariant parameter transforms with
their closed-form flow difference, explicit invariant-cone families with
Monte-Carlo positivity certificates, and an adaptive integrator with
cone-event tracking.
"""

from .basis import Algebra, SoBasis, StructureConstants, algebra_for, bracket_constants, build_basis, wedge
from .operators import (CurvOp, Decomposition, Tensor4, bianchi_project,
                        decompose, from_tensor, identity_operator,
                        make_operator, ode_field, operator_from_csv,
                        operator_from_json, operator_to_csv, operator_to_json,
                        potential, random_operator, random_ricci_type,
                        random_weyl, ricci, ricci_type_from_spectrum, scal,
                        sharp, to_tensor, trilinear)
from .transform import (TransformParams, d_spectrum, difference_by_definition,
                        difference_closed_form, inverse_transform, r_spectrum,
                        transform, transform_params)
from .cones import (ConeDescriptor, InnerCone, Intersection, LinearImage,
                    Membership, NonnegOp, RicciPinched, ThreeNonneg,
                    TruncatedShifted, TwoNonneg, membership,
                    positivity_certificate, prop_stage_b_max, schedule,
                    stage_cone, transversality_margin)
from .flow import (SearchResult, Trajectory, counterexample_search, integrate,
                   pinching_report, trajectory_csv, trajectory_manifest)

__version__ = "0.1.0"
