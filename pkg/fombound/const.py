"""Constants for fombound."""

# level sizes and ids must fit a signed 64-bit integer
MAX_INTEGER = 2**63 - 1

# largest instance the simulator accepts (total number of vertices, both sides)
MAX_SIMULATED_VERTICES = 5_000_000

# instances up to this many candidate vertices can be checked against the exhaustive partition oracle
BRUTE_FORCE_LIMIT = 22

# significant digits used for the exponential in the triangle budget
HIGH_PRECISION_DIGITS = 50

# outward slack added to high precision budgets
HIGH_PRECISION_SLACK = "1e-45"

# supported online algorithms, "random" takes a seed as in "random:42"
ALGORITHMS = {
    "waterfilling": "Raise the least matched alive neighbors to a common level",
    "random": "Pseudo-random feasible saturating assignment (seeded)",
}
DEFAULT_ALGORITHM = "waterfilling"

# optimizer
DEFAULT_TOLERANCE = 1e-10
FUNCTION_TOLERANCE = 1e-15
MAX_ITERATIONS_PER_DIMENSION = 4000
MAX_POLISH_ROUNDS = 3
RESTART_GRID = (1.5, 2.5, 4.0, 8.0)
GRID_MAX_DIMENSION = 4
WARM_START_GAMMA = 8.0
FD_STEP = 1e-6
HESSIAN_STEP = 1e-4
STATIONARITY_TOLERANCE = 1e-5
CURVATURE_TOLERANCE = 1e-4
MONOTONE_SLACK = 1e-9

# non-convexity diagnostic for the l=0 bound
DERIVATIVE_STEP = 1e-5
DERIVATIVE_GRID_POINTS = 401

# output formatting, published bound values are rounded to the sixth decimal digit
ROUND_DIGITS = 6
OUTPUT_FORMATS = ("csv", "json")

# JSON schemas shipped in fombound/schemas, one per output
SCHEMA_NAMES = ("bound", "optimize", "simulate", "export", "trace_record")

# published optimum per ell: (lambda, gammas, value), only the trailing gammas for ell = 10
PUBLISHED_OPTIMA = {
    0: (7.233629, (), 0.631744),
    1: (2.58117, (8.0532,), 0.629748),
    2: (3.14832, (2.39011, 7.8746), 0.629678),
    3: (2.87586, (3.24985, 2.40342, 7.86407), 0.629674),
    10: (2.94419, (3.24164, 2.4041, 7.86352), 0.629674),
}
HEADLINE_BOUND = 0.6297

# the earlier tree construction corresponds to the l=0 bound at lambda = 7
PRIOR_BOUND_LAMBDA = 7
PRIOR_BOUND = 0.6317

# location of the local maximum of the derivative of the l=0 bound
DERIVATIVE_PEAK = 10.0266

# the table is reproduced up to this many gamma-levels
MAX_TABLE_ELL = 10
