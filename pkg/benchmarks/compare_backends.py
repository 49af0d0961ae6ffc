"""Time the compiled and pure-Python kernel backends on the same workloads.

Each workload runs in a fresh interpreter so the backend is chosen at
import; ``POLYINV_PURE_PYTHON=1`` selects the fallback.  Results are the
best of ``--repeat`` runs.

    python benchmarks/compare_backends.py [--repeat 3] [--json out.json]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    "truncated nagata d4": "truncated_invariant_ideal(bench('nagata'), 4)",
    "truncated squares d4": "truncated_invariant_ideal(bench('squares'), 4)",
    "truncated yagzhev9 d3": "truncated_invariant_ideal(bench('yagzhev9'), 3)",
    "truncated yagzhev11 d3": "truncated_invariant_ideal(bench('yagzhev11'), 3)",
    "parametric linear d2": "invariant_matrix(load_loop(SAMPLES / 'linear.loop').body, 2)",
    "parametric fibonacci d2": "invariant_matrix(bench('fibonacci').body, 2)",
    "lift fib3 cubic": "lift_invariant(*fib3_cubic())",
}

PRELUDE = """
import time
from pathlib import Path
import polyinv
from polyinv import kernels
from polyinv.lifting import lift_invariant
from polyinv.loop import load_loop
from polyinv.parametric import invariant_matrix
from polyinv.truncated import truncated_invariant_ideal
SAMPLES = Path(polyinv.__file__).parent / 'samples'
def bench(name):
    return load_loop(Path(polyinv.__file__).parent / 'benchmarks' / (name + '.loop'))
def fib3_cubic():
    loop = bench('fib3')
    (g,) = truncated_invariant_ideal(loop, 3).polynomials
    return g - g.constant_term(), loop.body
t0 = time.perf_counter()
{stmt}
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def time_once(stmt, pure):
    env = dict(os.environ)
    if pure:
        env["POLYINV_PURE_PYTHON"] = "1"
    else:
        env.pop("POLYINV_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", PRELUDE.replace("{stmt}", stmt)], env=env,
                         capture_output=True, text=True, check=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", dest="json_out", default=None)
    ap.add_argument("--only", default=None, help="substring filter on workload names")
    args = ap.parse_args(argv)

    rows = []
    for name, stmt in WORKLOADS.items():
        if args.only and args.only not in name:
            continue
        timings = {}
        for pure in (False, True):
            runs = [time_once(stmt, pure) for _ in range(args.repeat)]
            timings[runs[0][0]] = min(t for _, t in runs)
        compiled = timings.get("cython")
        python = timings["python"]
        speedup = python / compiled if compiled else None
        rows.append({"workload": name, "cython_s": compiled, "python_s": python, "speedup": speedup})
        shown = "n/a" if compiled is None else f"{compiled:8.3f}"
        ratio = "" if speedup is None else f"{speedup:6.1f}x"
        print(f"{name:26s} cython {shown}  python {python:8.3f}  {ratio}", flush=True)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
