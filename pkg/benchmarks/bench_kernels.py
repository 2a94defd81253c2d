"""Compare the numba kernels with their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--steps 5000]

Part one times each kernel pair in this process. Part two runs the same
prequential explanation twice in subprocesses, once with IPDP_DISABLE_NUMBA=1,
so the end-to-end cost of each backend is visible.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ipdp import kernels
from ipdp._backend import NUMBA_ENABLED


def kernel_cases(rng):
    values = rng.normal(size=100_000)
    block = rng.normal(size=(5_000, 20))
    state = np.zeros(20)
    grid, est, pts, ice = (rng.normal(size=20) for _ in range(4))
    og, oe = np.empty(20), np.empty(20)
    return {
        "ema_update (m=20)": lambda f: f(state, pts, 0.01),
        "ema_scan (5000 x 20)": lambda f: f(block, 0.01, state),
        "rolling_max (1e5, k=500)": lambda f: f(values, 500),
        "equidistant (m=20)": lambda f: f(-1.5, 2.5, 20),
        "ema_step (m=20)": lambda f: f(grid.copy(), est.copy(), pts, ice, 0.01, 1.2, og, oe),
    }


PAIRS = {
    "ema_update (m=20)": "ema_update",
    "ema_scan (5000 x 20)": "ema_scan",
    "rolling_max (1e5, k=500)": "rolling_max",
    "equidistant (m=20)": "equidistant",
    "ema_step (m=20)": "ema_step",
}


def best_time(fn, repeat):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def end_to_end(steps, disable):
    env = dict(os.environ)
    env.pop("IPDP_DISABLE_NUMBA", None)
    if disable:
        env["IPDP_DISABLE_NUMBA"] = "1"
    code = (
        "import time, json\n"
        "from ipdp.cli import DEFAULT_CONFIG, run_stream\n"
        "cfg = json.loads(json.dumps(DEFAULT_CONFIG))\n"
        f"cfg['source']['steps'] = {steps}\n"
        "run_stream(dict(cfg, source=dict(cfg['source'], steps=200)))\n"
        "t0 = time.perf_counter(); run_stream(cfg)\n"
        "print(time.perf_counter() - t0)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=5000)
    args = parser.parse_args(argv)

    if not NUMBA_ENABLED:
        print("numba disabled in this process; unset IPDP_DISABLE_NUMBA to compare kernels")
    else:
        cases = kernel_cases(np.random.default_rng(0))
        print(f"{'kernel':<28}{'numba':>12}{'numpy':>12}{'speedup':>10}")
        for label, case in cases.items():
            name = PAIRS[label]
            fast = getattr(kernels, f"_{name}_numba")
            slow = getattr(kernels, f"_{name}_numpy")
            case(fast)  # compile outside the timed region
            t_fast = best_time(lambda: case(fast), args.repeat)
            t_slow = best_time(lambda: case(slow), args.repeat)
            print(f"{label:<28}{t_fast * 1e6:>10.2f}us{t_slow * 1e6:>10.2f}us{t_slow / t_fast:>9.1f}x")

    print(f"\nend to end, hyperplane stream, {args.steps} steps, 2 features, m=20")
    for label, disable in (("numba", False), ("numpy", True)):
        seconds = end_to_end(args.steps, disable)
        print(f"{label:<8}{seconds:8.2f}s  {seconds / args.steps * 1e6:8.1f}us/step")


if __name__ == "__main__":
    main()
