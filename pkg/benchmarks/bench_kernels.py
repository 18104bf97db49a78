"""Compare the compiled ensemble kernel against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--n-traj 2048] [--n-steps 8000]

Both backends execute the identical floating-point operation sequence, so
besides timing, the script asserts bit-identical output.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from collapsim import _ensemble_np
from collapsim.kernels import get_backend

try:
    from collapsim import _ensemble_cy
except ImportError:
    _ensemble_cy = None


def make_problem(n_steps: int, n_traj: int, n_out: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    coeffs = {
        "d_eta": rng.uniform(1e-4, 2e-4, n_steps),
        "w2": rng.normal(0.0, 1.0, n_steps),
        "s_x": rng.normal(0.0, 1e-3, n_steps),
        "s_p": rng.normal(0.0, 1e-3, n_steps),
        "om_re": rng.uniform(0.5, 2.0, n_steps),
        "om_im": rng.normal(0.0, 1.0, n_steps),
        "noise": rng.normal(0.0, 1.0, (n_traj, n_steps)),
        "out_idx": np.linspace(0, n_steps, n_out).astype(np.int64),
    }
    return coeffs


def run(mod, coeffs, n_traj: int, n_out: int):
    x = np.zeros(n_traj)
    p = np.zeros(n_traj)
    sigma = np.zeros(n_traj)
    out_x = np.zeros((n_out, n_traj))
    out_p = np.zeros((n_out, n_traj))
    out_sigma = np.zeros((n_out, n_traj))
    t0 = time.perf_counter()
    mod.step_ensemble(coeffs["d_eta"], coeffs["w2"], coeffs["s_x"],
                      coeffs["s_p"], coeffs["om_re"], coeffs["om_im"],
                      coeffs["noise"], coeffs["out_idx"],
                      x, p, sigma, out_x, out_p, out_sigma)
    dt = time.perf_counter() - t0
    return dt, (x, p, sigma, out_x, out_p, out_sigma)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-steps", type=int, default=8000)
    ap.add_argument("--n-traj", type=int, default=2048)
    ap.add_argument("--n-out", type=int, default=33)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    coeffs = make_problem(args.n_steps, args.n_traj, args.n_out)
    mods = [("numpy", _ensemble_np)]
    if _ensemble_cy is not None:
        mods.append(("cython", _ensemble_cy))
    else:
        print("compiled backend unavailable; timing the fallback only")
    print(f"active backend at import: {get_backend().BACKEND}")
    print(f"problem: {args.n_steps} steps x {args.n_traj} trajectories")

    results = {}
    for name, mod in mods:
        best = np.inf
        for _ in range(args.repeat):
            dt, out = run(mod, coeffs, args.n_traj, args.n_out)
            best = min(best, dt)
        results[name] = (best, out)
        rate = args.n_steps * args.n_traj / best
        print(f"  {name:7s} {best * 1e3:9.2f} ms   {rate / 1e6:8.1f} M steps/s")

    if len(results) == 2:
        for i, label in enumerate(("x", "p", "sigma", "out_x", "out_p",
                                   "out_sigma")):
            a = results["numpy"][1][i]
            b = results["cython"][1][i]
            if not np.array_equal(a, b):
                raise SystemExit(f"backends disagree on {label}")
        speed = results["numpy"][0] / results["cython"][0]
        print(f"bit-identical outputs; speedup x{speed:.1f}")


if __name__ == "__main__":
    main()
