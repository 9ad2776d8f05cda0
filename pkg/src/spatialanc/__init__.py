"""2D free-field spatial active-noise-control simulator.

Circular-harmonic field analysis, sparse plane-wave decomposition of
reference sound fields, and a mode-domain FxNLMS control loop, evaluated
per narrowband frequency bin.
"""

__version__ = "0.1.0"

from .anc import (  # noqa: F401
    AncGeometry,
    AncState,
    AncTrace,
    SecondaryPath,
    anc_step,
    reference_modes,
    run_anc,
    secondary_path,
)
from .config import METHODS, RunConfig, validate_config  # noqa: F401
from .errors import ConfigError, DomainError, SingularityError, SolverError  # noqa: F401
from .experiments import EXPERIMENTS, run_experiment  # noqa: F401
from .field import (  # noqa: F401
    ArrayGeometry,
    LineSource,
    PlaneWave,
    Scene,
    pressure_at,
    sample_array,
    true_mode_coefficients,
)
from .metrics import EvalGrid, mode_error_map, noise_level, sdr  # noqa: F401
from .modal import (  # noqa: F401
    ModeCoefficients,
    extract_modes,
    modes_from_plane_waves,
    synthesize_field,
    truncation_order,
)
from .sparse import (  # noqa: F401
    Dictionary,
    SolveResult,
    SolverConfig,
    build_dictionary,
    solve,
    solve_irls,
    solve_l1,
)
