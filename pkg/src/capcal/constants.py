"""Physical constants and unit factors.

Everything inside the package is SI. The factors below are only used at
I/O boundaries (CLI, CSV, reports).
"""

import math

#: Vacuum permittivity in F/m (CODATA 2018).
EPSILON0 = 8.8541878128e-12

FOUR_PI_EPS0 = 4.0 * math.pi * EPSILON0
TWO_PI_EPS0 = 2.0 * math.pi * EPSILON0

PF = 1e-12  # F per pF
NM = 1e-9  # m per nm
UM = 1e-6  # m per um
MM = 1e-3  # m per mm

#: pF/um expressed in F/m.
PF_PER_UM = PF / UM
