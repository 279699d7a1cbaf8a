"""Instance generation, benchmarks and rendering."""
from .bench import BENCH_COLUMNS, BenchRecord, BenchRun, load_bench_config, run_bench
from .generate import generate_instance
from .render import render_svg
from .rng import XorShift64Star
