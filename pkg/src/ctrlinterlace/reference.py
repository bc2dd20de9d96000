"""The reference case used throughout the demos and acceptance tests.

Plant ``G(s) = (s + 1) / (s^2 + 2 s + 1.5)`` discretized with a zero-order
hold at ``T = 0.1 s`` and a sixth-order discrete controller given in
zero-pole-gain form.  With ``N = 3`` and the default magnitude threshold the
controller splits into one fast real pole and three slow groups: the double
integrator, a lightly damped complex pair and a real pole at 0.9072.
"""

from __future__ import annotations

import numpy as np

from .tfcore import RationalTF, StateSpace, c2d_zoh, tf_to_ss

__all__ = [
    "PERIOD",
    "RATIO",
    "THRESHOLD",
    "SLOW_ORDER",
    "PLANT_NUM",
    "PLANT_DEN",
    "CONTROLLER_GAIN",
    "CONTROLLER_ZEROS",
    "CONTROLLER_ZERO_QUADRATIC",
    "CONTROLLER_POLES",
    "CONTROLLER_POLE_QUADRATIC",
    "continuous_plant",
    "plant",
    "controller",
]

PERIOD = 0.1
RATIO = 3
THRESHOLD = 0.85

#: execution order by phase: the 0.9072 pole first, then the double
#: integrator, then the complex pair (slow indices follow descending |p|)
SLOW_ORDER = (2, 0, 1)

# descending powers of s
PLANT_NUM = (1.0, 1.0)
PLANT_DEN = (1.0, 2.0, 1.5)

CONTROLLER_GAIN = 0.46177
CONTROLLER_ZEROS = (0.9976, 0.9937, 0.9368)
#: remaining zeros are the roots of this quadratic (descending powers of z)
CONTROLLER_ZERO_QUADRATIC = (1.0, -1.806, 0.8191)
CONTROLLER_POLES = (1.0, 1.0, 0.9072, 0.7056)
CONTROLLER_POLE_QUADRATIC = (1.0, -1.973, 0.9732)


def continuous_plant() -> RationalTF:
    return RationalTF.from_descending(PLANT_NUM, PLANT_DEN, period=0.0)


def plant(T: float = PERIOD) -> StateSpace:
    """ZOH discretization of the plant at period ``T``."""
    return c2d_zoh(tf_to_ss(continuous_plant()), T)


def controller() -> RationalTF:
    """The sixth-order controller at ``PERIOD``."""
    zeros = list(CONTROLLER_ZEROS) + list(np.roots(CONTROLLER_ZERO_QUADRATIC))
    poles = list(CONTROLLER_POLES) + list(np.roots(CONTROLLER_POLE_QUADRATIC))
    return RationalTF.from_zpk(zeros, poles, CONTROLLER_GAIN, PERIOD)
