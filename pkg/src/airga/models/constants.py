DEFAULT_ALPHA = 0.05
DEFAULT_BETA = 0.05
DEFAULT_STIFFNESS_SCALE = 1.0
DEFAULT_MASS_SCALE = 1.0
DEFAULT_FOUNDATION = 0.0

# collocated, foundation supported chain used by the solver benchmarks
BENCHMARK_STIFFNESS_SCALE = 0.5
BENCHMARK_FOUNDATION = 1.0
BENCHMARK_DAMPING = 0.5

MANIFEST_FILE = "manifest.txt"
REQUIRED_FILES = ("M.mtx", "K.mtx", "F.mtx", "Cp.mtx")
DAMPING_FILE = "D.mtx"
VELOCITY_OUTPUT_FILE = "Cv.mtx"
