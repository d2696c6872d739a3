"""Time the compiled winding kernel against the numpy fallback.

Runs the same replicated rotation-time estimate on each available
backend and reports the best wall time of a few repeats. The two
backends consume identical per-replicate streams, so the estimates
also serve as a cheap agreement check.

    python3 benchmarks/compare_backends.py --n 100 --replicates 200
"""

import argparse
import time

from polywind import backend, model, montecarlo


def run_once(params, init, mc, estimator):
    fn = montecarlo.estimate_mmrt if estimator == "mmrt" else montecarlo.estimate_mrt
    t0 = time.perf_counter()
    est = fn(params, init, mc)
    return time.perf_counter() - t0, est


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100, help="number of rods")
    ap.add_argument("--D", type=float, default=10.0)
    ap.add_argument("--L", type=float, default=0.3)
    ap.add_argument("--l0", type=float, default=0.25)
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--dt", type=float, default=0.01)
    ap.add_argument("--t-max", type=float, default=100.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3,
                    help="timing repeats; best is reported")
    ap.add_argument("--estimator", choices=("mrt", "mmrt"), default="mrt")
    args = ap.parse_args()

    params = model.PolymerParams(n=args.n, D=args.D, L=args.L, l0=args.l0)
    mc = montecarlo.McConfig(replicates=args.replicates, dt=args.dt,
                             t_max=args.t_max, seed=args.seed)
    init = model.stretched()

    names = ["python"] + (["fast"] if backend.HAVE_FAST else [])
    if not backend.HAVE_FAST:
        print("compiled kernel not available; timing the fallback only")

    results = {}
    try:
        for name in names:
            backend.set_backend(name)
            best = float("inf")
            est = None
            for _ in range(args.repeats):
                elapsed, est = run_once(params, init, mc, args.estimator)
                best = min(best, elapsed)
            results[name] = (best, est)
    finally:
        backend.set_backend(None)

    print(f"{args.estimator} at n={args.n}, D={args.D}, "
          f"{args.replicates} replicates, dt={args.dt}")
    print(f"{'backend':<8} {'best s':>10} {'reps/s':>10} {'mean':>12} {'stderr':>12}")
    for name in names:
        best, est = results[name]
        print(f"{name:<8} {best:>10.3f} {args.replicates / best:>10.1f} "
              f"{est.mean:>12.6f} {est.stderr:>12.6f}")
    if len(names) == 2:
        py, fast = results["python"][0], results["fast"][0]
        print(f"speedup fast/python: {py / fast:.2f}x")
        gap = abs(results["python"][1].mean - results["fast"][1].mean)
        print(f"estimate gap between backends: {gap:.3e}")


if __name__ == "__main__":
    main()
