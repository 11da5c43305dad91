__version__ = "0.1.0"

from .errors import AccuracyError, ConfigurationError, ConvergenceError, CoxJumpsError, DomainError  # noqa: F401
from .hazard_models import CIR, CMY, IGOU, GammaOU, LevyKernel, cgf, cgf_derivatives_at_i  # noqa: F401
from .malliavin_rec import malliavin_moments, survival_thm2  # noqa: F401
from .mc_oracle import McConfig, mc_jump_times, mc_survival  # noqa: F401
from .survival_bell import SurvivalResult, survival_thm1  # noqa: F401
