"""ruledsim: invariants and similarity analysis of ruled surfaces in E^3.

A ruled surface r(u, v) = f(u) + v q(u) is analyzed through its striction
curve, distribution parameter, moving frame {q, h, a} with curvatures k1, k2,
and the structure function f(phi) = k2/k1 on the total-curvature parameter.
Two surfaces are similar under a variable transformation of striction arc
lengths exactly when their structure functions agree under matched phi; the
package decides that, recovers the transformation, and synthesizes new family
members.
"""

from .curves import ArcLengthMap, CurveSpec, SampledCurve, curve_from_text
from .errors import (ConsistencyError, CylindricalSurfaceError, DomainEvalError,
                     FrameGapError, InapplicableError, MixedKindError,
                     OdeInapplicableError, OverlapError, ParseError,
                     RegularityError, RuledSimError, SingularPointError,
                     SynthesisError)
from .expr import differentiate, evaluate, parse_expression, to_string
from .frame import (FrameField, FrameSample, FrameTrajectory, StructureFunction,
                    frenet_frame, integrate_frame_ode, reconstruct_a,
                    ruling_ode_residual, structure_function, tangent_angle,
                    total_curvature)
from .presets import get_preset, preset_names
from .similarity import (SimilarityReport, Theorem34Result,
                         VariableTransformation, check_similar_curves,
                         check_similar_surfaces, conoid_family_check,
                         cylindrical_family_check, lambda_from_curvatures,
                         surface_from_invariants, synthesize_similar,
                         verify_theorem_3_4)
from .surface import (RuledSurface, StrictionCurve, StrictionData,
                      StrictionSample, SurfaceClass)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
