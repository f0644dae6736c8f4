"""Higher-order mean curvature, Newton transformations and r-stability of model hypersurfaces."""

from .errors import CurvataError, InsufficientInput, InvalidInput, NumericalFailure
from .spaceform import (ModelHypersurface, SpaceForm, cylinder_profile, robin_coefficient,
                        sphere_profile, umbilic_cap)
from .spectral import (RadialFunction, Spectrum, SturmLiouvilleProblem, ball_robin_spectrum,
                       radial_eigen, resolvent_minus_one, sphere_mode_eigenvalue,
                       tube_mode_eigenvalue)
from .stability import (CapIndex, CapSpec, Label, Resolvent, StabilityVerdict, Subspace,
                        TubeSpec, cap_morse_index, cap_verdict, index_form_value,
                        koiso_classify, stability_potential, tube_verdict, tube_verdicts)
from .symfunc import (CurvatureVector, Definiteness, SymmetricProfile, elementary_symmetric,
                      maclaurin_report, newton_recurrence, newton_spectra, positivity_check,
                      profile, symmetric_functions, umbilicity_coefficient)

__version__ = "0.1.0"
