"""Constants and defaults for virtual_twins_tools package."""

# Master seed used when neither --seed nor VT_SEED is given
DEFAULT_SEED = 20240101

# Benchmark defaults (desk scale)
DEFAULT_REPLICATES = 100
DEFAULT_WORKERS = 1
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_N_TEST = 2000

# Simulated covariate layout
N_CONTINUOUS = 100
N_BINARY = 10
N_COVARIATES = N_CONTINUOUS + N_BINARY

# Simulation generator settings
MU_VARIANCE = 3.0
BINARY_PROBABILITY = 0.7
TREATMENT_PROBABILITY = 0.5
CORRELATED_BLOCK = 4
CORRELATION = 0.7
LINEAR_NOISE_SD = 3.0
NONLINEAR_NOISE_SD = 1.0
NO_TEH_SHIFT = 2.0
BOTTOM_HALF_SHARE = 0.25


# Step-1 learner defaults
LASSO_FOLDS = 10
LASSO_N_LAMBDA = 100
FOREST_N_TREES = 500
FOREST_NODESIZE_GRID = (5, 15, 30)
MARS_MAX_TERMS = 21
MARS_DEGREE = 1
SUPERLEARNER_FOLDS = 10

# Step-2 defaults
MIN_LEAF = 20
DEPTH_GRID = (1, 2, 3, 4, 5)
CV_FOLDS = 10
CV_REPEATS = 3
ALPHA_SPLIT = 0.05
TREE_COMPLEXITY = 0.01
LINEAR_K = 5

# Permutation calibration defaults
CALIBRATION_M = 100
CALIBRATION_ALPHA = 0.05

# CSV column defaults for real-data analysis
DEFAULT_TREATMENT_COLUMN = "trt"
DEFAULT_OUTCOME_COLUMN = "y"

# Output file names
RESULTS_CSV = "results.csv"
RESULTS_MD = "results.md"
RUN_METADATA = "run_metadata.json"
TREES_DIR = "trees"
