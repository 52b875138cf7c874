"""Compiled vs numpy kernels on the inner alternating loop and the projection.

    python benchmarks/bench_kernels.py [--repeat 5]

Each backend runs in a fresh interpreter so import-time selection is honest.
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
import numpy as np
from lcv import BACKEND, alm, instances
from lcv.cones import ConeSpec, NonPos, SecondOrder, Box, Zero, project

def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); times.append(time.perf_counter() - t0)
    return min(times)

repeat = {repeat}
out = {{"backend": BACKEND}}
corpus = instances.infeasible_corpus(count=30, seed=99)
cfg = alm.AlmConfig(max_outer=5000)
out["alm_corpus_30"] = best(lambda: [alm.solve(p, cfg) for *_, p in corpus], repeat)
K = ConeSpec([Zero(4), NonPos(8), Box(-np.ones(4), np.ones(4)), SecondOrder(8)])
ys = np.random.default_rng(0).standard_normal((20000, K.total_dim))
out["project_20000"] = best(lambda: [project(K, y) for y in ys], repeat)
big = instances.generate("random_infeasible", 60, 80, 3)
out["alm_n60_m80"] = best(lambda: alm.solve(big, cfg), repeat)
print(json.dumps(out))
"""


def run(pure, repeat):
    env = dict(os.environ)
    env.pop("LCV_PURE_PYTHON", None)
    if pure:
        env["LCV_PURE_PYTHON"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKLOAD.format(repeat=repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    if fast["backend"] != "cython":
        print("compiled extension not built; both columns use the numpy kernels")
    print(f"{'workload':<16}{'cython (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for key in (k for k in fast if k != "backend"):
        print(f"{key:<16}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
