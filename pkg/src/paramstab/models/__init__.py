"""Concrete systems: pendulum, liquid layer, constrained saddle-point systems."""
from .faraday import FaradayParams, faraday_charfun
from .kkt import KktSystem, kkt_lift, kkt_reduce, null_space_basis
from .pendulum import PendulumParams, pendulum_charfun, pendulum_system

__all__ = ["FaradayParams", "faraday_charfun", "KktSystem", "kkt_lift", "kkt_reduce",
           "null_space_basis", "PendulumParams", "pendulum_charfun", "pendulum_system"]
