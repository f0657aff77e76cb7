"""Principal configurations of surfaces in Minkowski space R^{2,1}.

The package computes curvature lines, umbilic points with their Darbouxian
type, the tropic (where the induced metric degenerates) and the lightlike
principal locus for parametrised surfaces, with special support for confocal
quadrics, triple orthogonal systems, inversions and focal sheets.
"""
from .errors import (DegenerateError, DegenerateLinearizationError, DomainError, IoError,
                     LightconeError, LorentzPrincipalError, NotDarbouxianError,
                     NotPositiveDefiniteError, NoTimelikeEigenvectorError, ParamError,
                     SceneError, SeedAtUmbilicError, SeedOutsideDomainError,
                     SingularChartError)
from .minkowski import (CausalCharacter, Isometry21, classify_vector, minkowski_cross,
                        minkowski_dot, minkowski_norm, rotations)
from .jets import ChartSpec, Domain, Jet, SurfaceJet2, eval_jet, eval_jet_grid
from .surface import (FundamentalData, SurfaceClass, bde_coefficients, fundamental_data,
                      principal_curvatures)
from .atlas import Atlas, single_chart_atlas
from .bde import (GridSpec, IntegrationOptions, PrincipalCurve, Termination, integrate_on_atlas,
                  integrate_principal_line, ld_residual, principal_directions, trace_locus,
                  verify_dupin)
from .umbilic import (Darboux, UmbilicRecord, classify_umbilic, find_umbilics,
                      find_umbilics_atlas, trace_separatrices)
from .quadrics import (ConfocalParams, GeneralQuadric, StoParams, canonicalize, ellipsoid_atlas,
                       ellipsoid_umbilics, global_principal_chart, lie_cartan_eigenvalue)
from .transforms import invert_chart, invert_point, verify_inversion_invariance
from .focal import focal_closed_form, focal_numeric, focal_singular_locus

__version__ = "0.1.0"
