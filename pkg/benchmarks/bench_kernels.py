"""Time the compiled and pure-Python kernel backends on random move graphs.

    python3 benchmarks/bench_kernels.py --nodes 2000 --repeat 5
"""
import argparse
import random
import time

from admissible import kernels
from admissible.fixpoints import almost_sure_reach, attractor, invariant
from admissible.kernels import CA, EA, MoveGraph, mask


def random_move_graph(rng, n, width):
    blocks = []
    for _ in range(n):
        r, c = rng.randint(1, width), rng.randint(1, width)
        blocks.append([[rng.randrange(n) for _ in range(c)] for _ in range(r)])
    return MoveGraph(blocks)


def workloads(g, target, rng):
    safe = mask(g.n, (v for v in range(g.n) if rng.random() < 0.9))
    return {
        "attractor EA": lambda: attractor(g, target, EA),
        "attractor CA": lambda: attractor(g, target, CA),
        "invariant EA": lambda: invariant(g, safe, EA),
        "almost-sure": lambda: almost_sure_reach(g, target),
        "scc": lambda: g.digraph().scc(),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--width", type=int, default=3, help="max rows/cols per node")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = random.Random(args.seed)
    g = random_move_graph(rng, args.nodes, args.width)
    target = mask(g.n, rng.sample(range(g.n), max(1, g.n // 50)))
    jobs = workloads(g, target, rng)

    backends = ["python"]
    try:
        kernels.use_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled backend not available; timing the fallback only")
    results = {}
    for name in backends:
        kernels.use_backend(name)
        results[name] = {job: best_of(fn, args.repeat) for job, fn in jobs.items()}
        # identical answers from both backends
        if name != backends[0]:
            for job, fn in jobs.items():
                got = fn()
                kernels.use_backend(backends[0])
                assert fn() == got, job
                kernels.use_backend(name)

    print(f"{args.nodes} nodes, width <= {args.width}, best of {args.repeat}")
    print(f"{'workload':<14}" + "".join(f"{b:>12}" for b in backends)
          + ("     speedup" if len(backends) > 1 else ""))
    for job in jobs:
        row = f"{job:<14}" + "".join(f"{results[b][job] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{results['python'][job] / max(results['cython'][job], 1e-9):>11.1f}x"
        print(row)
    kernels.use_backend(kernels._load_backend().BACKEND)


if __name__ == "__main__":
    main()
