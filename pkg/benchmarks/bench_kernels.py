"""Compare the compiled core with the numpy fallback.

Times the nonlinear coupling term (fast and direct kernels) for a few
truncations and one full integration, and checks that both backends agree.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from ringoam import kernels
from ringoam.dynamics import IntegratorConfig, integrate
from ringoam.model import SystemParams, build_initial_state

N = 4000.0


def random_amplitudes(K, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, K)) + 1j * rng.normal(size=(2, K))
    return np.ascontiguousarray(a * math.sqrt(N / np.sum(np.abs(a) ** 2)))


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_nonlinear(backends, repeat):
    print(f"{'kernel':8s} {'M':>4s} " + " ".join(f"{b:>14s}" for b in backends) + "   speedup")
    for direct in (False, True):
        for M in (5, 15, 31):
            a = random_amplitudes(2 * M + 1)
            ref = np.asarray(kernels.get_backend("python").nonlinear(a, 1e-3, direct))
            times = []
            for b in backends:
                core = kernels.get_backend(b)
                got = np.asarray(core.nonlinear(a, 1e-3, direct))
                assert np.allclose(got, ref, rtol=1e-12, atol=1e-12), (b, M, direct)
                number = 20 if (direct and b == "python") else 200
                times.append(best(lambda: core.nonlinear(a, 1e-3, direct), repeat, number))
            speed = times[0] / times[-1] if len(times) > 1 else float("nan")
            name = "direct" if direct else "fast"
            print(f"{name:8s} {M:4d} " + " ".join(f"{t * 1e6:12.1f}us" for t in times)
                  + f"   {speed:6.1f}x")


def bench_integrate(backends, repeat):
    p = SystemParams.from_epsilon(1.0, 1.0, N, 15)
    state = build_initial_state(p, 0, 0.0, math.pi, math.sqrt(N) * 1e-4, 5)
    cfg = IntegratorConfig(t_end=10.0, sampling_stride=0.05)
    print(f"\nfull integration, M=15, tau=10, {cfg.method}")
    finals = {}
    times = []
    for b in backends:
        traj = integrate(state, p, cfg, backend=b)
        finals[b] = traj.populations[-1]
        times.append(best(lambda: integrate(state, p, cfg, backend=b), repeat, 1))
        print(f"  {b:9s} {times[-1]:8.3f}s  ({traj.n_steps} steps)")
    if len(backends) > 1:
        diff = np.max(np.abs(finals[backends[0]] - finals[backends[1]])) / N
        print(f"  speedup {times[0] / times[1]:.1f}x, max population difference {diff:.1e} N")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"] + [b for b in kernels.available_backends() if b != "python"]
    if len(backends) == 1:
        print("compiled core not built; timing the fallback only")
    bench_nonlinear(backends, args.repeat)
    bench_integrate(backends, args.repeat)


if __name__ == "__main__":
    main()
