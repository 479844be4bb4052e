"""Physical constants (CODATA 2018 via scipy) and unit helpers."""
import math

from scipy import constants as _c

CONSTANTS_VERSION = "CODATA2018/eta0=376.730313"

SPEED_OF_LIGHT = _c.c
ELEMENTARY_CHARGE = _c.e
HBAR = _c.hbar
BOLTZMANN = _c.k
ETA0 = 376.730313  # free-space impedance, ohm

GRAD_PER_S = 1e9
EV = _c.e


def ghz_to_angular(f_ghz):
    """Convert a frequency in GHz to angular frequency in rad/s."""
    return 2.0 * math.pi * f_ghz * 1e9


def twopi_grad(x):
    """Angular frequency written as ``x * 2pi Grad/s``."""
    return 2.0 * math.pi * x * GRAD_PER_S
