"""Timing comparison of the compiled kernels against the numpy
fallback.

Run as a script. Sizes follow the default grids (n=3 at 512 nodes,
n=4 at 2000) plus a larger stress size; each kernel is warmed first so
jit compilation never lands inside a measured interval. The same
comparison can be forced package-wide by setting
CONVEXSPHERE_DISABLE_NUMBA=1 before import.
"""

import time

import numpy as np

from convexsphere import backend
from convexsphere.sphere import build_grid


def _time(fn, *args, repeats: int = 5) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(grid_n: int, resolution: int | None = None) -> list:
    grid = build_grid(grid_n, resolution)
    rng = np.random.default_rng(0)
    g = grid.size
    r = 1.0 + 0.05 * rng.standard_normal(g)
    cloud = r[:, None] * grid.nodes
    h = backend.numpy_impl.support_max_dot(cloud, grid.nodes)
    verts = rng.standard_normal((64, grid.n))
    offsets = np.array([0, 32, 64])
    weights = np.array([1.0, 0.5])

    cases = [
        ("support_max_dot", (cloud, grid.nodes)),
        ("minkowski_support", (verts, offsets, weights, 0.25, grid.nodes)),
        ("hull_gaps", (cloud, grid.nodes, h)),
        ("radial_from_support", (h, grid.nodes, grid.nodes, 1e-9)),
        ("max_nn_gap", (grid.nodes,)),
    ]
    rows = []
    for name, args in cases:
        fast = getattr(backend.numba_impl, name)
        slow = getattr(backend.numpy_impl, name)
        fast(*args)  # warm the jit cache
        t_fast = _time(fast, *args)
        t_slow = _time(slow, *args)
        rows.append((f"n={grid.n} G={g}", name, t_slow, t_fast, t_slow / t_fast))
    return rows


def main() -> None:
    print(f"active backend: {backend.backend_name()}")
    if not backend.HAS_NUMBA:
        print("numba is unavailable; nothing to compare")
        return
    rows = []
    for n, res in ((3, None), (4, None), (3, 48)):
        rows.extend(bench(n, res))
    width = max(len(r[1]) for r in rows)
    print(f"{'grid':>14}  {'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  speedup")
    for tag, name, t_np, t_nb, ratio in rows:
        print(
            f"{tag:>14}  {name:<{width}}  {t_np * 1e3:9.2f}ms  {t_nb * 1e3:9.2f}ms  "
            f"{ratio:6.1f}x"
        )


if __name__ == "__main__":
    main()
