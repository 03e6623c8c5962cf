from .commands import register_covariance, register_qutrit_demo, register_sweep, register_validate

COMMANDS = (register_sweep, register_covariance, register_qutrit_demo, register_validate)

__all__ = ["COMMANDS"]
