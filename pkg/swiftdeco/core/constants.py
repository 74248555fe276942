"""Physical and numerical constants (CODATA via scipy.constants)"""

from scipy import constants as _c

HBAR = _c.hbar
K_BOLTZMANN = _c.k
SPEED_OF_LIGHT = _c.c
FINE_STRUCTURE = _c.fine_structure
ELECTRON_MASS = _c.m_e
PROTON_MASS = _c.m_p
ATOMIC_MASS_UNIT = _c.atomic_mass
ELECTRON_VOLT = _c.electron_volt
MEV = 1e6 * _c.electron_volt

# Alpha particle rest energy
ALPHA_MASS_MEV = 3727.379
ALPHA_MASS = ALPHA_MASS_MEV * MEV / SPEED_OF_LIGHT**2

# Below this kinetic-to-rest energy ratio the classical velocity is used
RELATIVISTIC_THRESHOLD = 1e-3

# Moment kinds
MOMENT_TOTAL = "total"
MOMENT_TR = "tr"
MOMENT_QPAR = "qpar"
MOMENT_QPERP = "qperp"
MOMENT_KINDS = (MOMENT_TOTAL, MOMENT_TR, MOMENT_QPAR, MOMENT_QPERP)

# Cross-section model kinds
MODEL_ISOTROPIC = "isotropic"
MODEL_GAUSSIAN_FORWARD = "gaussian_forward"
MODEL_TABULATED = "tabulated"

# Ensemble schemes
SCHEME_ANALYTIC = "analytic"
SCHEME_FULL_A2 = "full_a2"

# Kinetics modes
MODE_CONSTANT = "constant"
MODE_ENERGY_UPDATING = "energy_updating"

# Output
CSV_FLOAT_FORMAT = "{:.12e}"
