"""Mode dynamics of a condensate in two tunnel-coupled stacked rings."""
__version__ = "0.1.0"

from .bogoliubov import (bdg_spectrum, excitation_branch, instability_interval,  # noqa: E402
                         stability_map)
from .dynamics import IntegratorConfig, Trajectory, growth_rate_fit, integrate  # noqa: E402
from .errors import (ConfigError, ConservationError, ConstructionError,  # noqa: E402
                     DegenerateWindowError, IntegrationError, ParameterError, SingularityError)
from .josephson import (JosephsonState, RegimeSweep, bisect_boundary, classify_regime,  # noqa: E402
                        integrate_josephson, lambda_critical, regime_map)
from .kernels import BACKEND  # noqa: E402
from .model import (RingModeState, SystemParams, build_initial_state, make_params,  # noqa: E402
                    observables)
from .two_state import (TwoStatePoint, critical_points, integrate_two_state,  # noqa: E402
                        max_transfer, phase_portrait)

__all__ = [
    "BACKEND", "ConfigError", "ConservationError", "ConstructionError", "DegenerateWindowError",
    "IntegrationError", "IntegratorConfig", "JosephsonState", "ParameterError", "RegimeSweep",
    "RingModeState", "SingularityError", "SystemParams", "Trajectory", "TwoStatePoint",
    "bdg_spectrum", "bisect_boundary", "build_initial_state", "classify_regime", "critical_points",
    "excitation_branch", "growth_rate_fit", "instability_interval", "integrate",
    "integrate_josephson", "integrate_two_state", "lambda_critical", "make_params", "max_transfer",
    "observables", "phase_portrait", "regime_map", "stability_map",
]
