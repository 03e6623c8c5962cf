# cvmaps/cli/commands/__init__.py

from .covariance import register as register_covariance
from .qutrit_demo import register as register_qutrit_demo
from .sweep import register as register_sweep
from .validate import register as register_validate

__all__ = ["register_sweep", "register_covariance", "register_qutrit_demo", "register_validate"]
