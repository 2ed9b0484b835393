# Operating point of the phase-tracking experiment; bump DEFAULTS_VERSION whenever a value changes.
DEFAULTS_VERSION = "1"

DEFAULT_PARAMS = {
    "kappa": 9e4,
    "zeta": 0.1,
    "omega_r": 6.283e3,
    "alpha_mag": 5e2,
    "r_m": 0.36,
    "r_p": 0.59,
}

DEFAULT_MU = 0.5
DEFAULT_GRID_SIZE = 201
STUDY_MU_LEVELS = (0.5, 0.7, 0.8)

# Reference smoother covariance at the default operating point.
REFERENCE_PS_11 = 3.7748607e-3
REFERENCE_PS_22 = 3.7098537e5
REFERENCE_PS_12 = -7.2880146e-15

# Expected worst-case improvements (dB) and the acceptance windows applied to them.
CLAIM_COHERENT_IMPROVEMENT_DB = 1.5
CLAIM_COHERENT_WINDOW_DB = 0.5
CLAIM_SQUEEZED_GAIN_DB = 2.0
CLAIM_SQUEEZED_WINDOW_DB = 0.75
