ENV_PREFIX = "MASERSYNC_"
NANO_RUN_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"

# truncation
TRUNCATION_THRESHOLD = 1e-10
NMAX_HARD_CAP = 400
NMAX_FLOOR = 2
NMAX_STEP = 4
TOP_LEVEL_OCCUPATION = 1e-8
# largest n_max the adaptive sector solve grows to
ADAPTIVE_NMAX_CAP = 80
ZERO_SIN2 = 1e-300

# full two-mode superoperator, validation only
FULL_NMAX_CAP = 8

# steady state
RESIDUAL_TARGET = 1e-10
RESIDUAL_LIMIT = 1e-8
UNIQUENESS_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8

# phase distributions
PHASE_GRID = 1024
NEGATIVE_PHASE_TOL = 1e-8

# correlations
EIGEN_CLIP = 1e-12

# semiclassical chain
BESSEL_MAX_ARG = 700.0
MEAN_N_FLOOR = 0.01

# outputs
CSV_DIGITS = 17
