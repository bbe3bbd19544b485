"""Quadrature grids on S^{n-1}, n = 2, 3, 4.

Grids are product rules written so the node set is closed under the
antipodal map *exactly* in floating point: the first half of the nodes
is constructed, the second half is its literal negation, and the index
map u -> -u is stored. Measures are unnormalized (lengths 2*pi, 4*pi,
2*pi^2).

Construction per dimension, with `resolution` R:

  n=2   R nodes at angles 2*pi*j/R (R even), weight 2*pi/R. Exact for
        circular harmonics of order <= R-1.
  n=3   Archimedes coordinates (t, phi): dS = dt dphi. Gauss-Legendre
        with R points in t (R even, positive half mirrored) times 2R
        uniform azimuths. Exact for polynomials of degree <= 2R-1.
  n=4   x = (t, sqrt(1-t^2) w), w in S^2: dS = (1-t^2)^{1/2} dt dS_2.
        Gauss-Chebyshev (second kind) with R points in t times the
        n=3 grid at resolution R. Exact for degree <= 2R-1.

The exact value of a monomial integral over the sphere is

    I(alpha) = 2 * prod_i Gamma((alpha_i+1)/2) / Gamma((|alpha|+n)/2)

when every alpha_i is even, and 0 otherwise. That closed form is the
oracle of record for quadrature exactness; spot values on S^2:
x1^2 -> 4*pi/3, x1^4 -> 4*pi/5.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import backend
from .errors import InputError

DEFAULT_RESOLUTION = {2: 512, 3: 16, 4: 10}


def monomial_sphere_integral(n: int, alpha) -> float:
    """Exact integral of x^alpha over S^{n-1} (unnormalized measure)."""
    alpha = [int(a) for a in alpha]
    if len(alpha) != n:
        raise InputError(f"multi-index length {len(alpha)} != n={n}")
    if any(a < 0 for a in alpha):
        raise InputError("negative exponent")
    if any(a % 2 for a in alpha):
        return 0.0
    num = 1.0
    for a in alpha:
        num *= math.gamma((a + 1) / 2.0)
    return 2.0 * num / math.gamma((sum(alpha) + n) / 2.0)


def sphere_area(n: int) -> float:
    return monomial_sphere_integral(n, [0] * n)


@dataclass(frozen=True)
class SphereGrid:
    n: int
    resolution: int
    nodes: np.ndarray          # (G, n), unit rows, nodes[G/2:] == -nodes[:G/2]
    weights: np.ndarray        # (G,), positive
    antipode: np.ndarray       # index map, nodes[antipode[i]] == -nodes[i]
    max_exact_degree: int
    angles: np.ndarray | None = field(default=None, repr=False)  # n=2 only

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @cached_property
    def key(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(f"sphere_grid:{self.n}:{self.resolution}:".encode())
        h.update(self.nodes.tobytes())
        return h.hexdigest()[:16]

    @cached_property
    def max_gap(self) -> float:
        """Largest nearest-neighbor geodesic distance; the resolution
        scale used by grid-derived tolerances."""
        return backend.max_nn_gap(self.nodes)

    def refined(self, factor: int = 2) -> "SphereGrid":
        return build_grid(self.n, self.resolution * factor)

    def __eq__(self, other):
        return isinstance(other, SphereGrid) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


def _circle_half(m: int):
    ang = 2.0 * np.pi * np.arange(m // 2) / m
    return np.column_stack([np.cos(ang), np.sin(ang)])


def build_grid(n: int, resolution: int | None = None) -> SphereGrid:
    """Product quadrature grid on S^{n-1}; see the module docstring."""
    if n not in (2, 3, 4):
        raise InputError(f"sphere dimension n={n} not supported (need 2, 3 or 4)")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[n]
    resolution = int(resolution)
    if resolution < 8 or resolution % 2:
        raise InputError(f"resolution must be even and >= 8, got {resolution}")

    if n == 2:
        m = resolution
        half = _circle_half(m)
        nodes = np.vstack([half, -half])
        weights = np.full(m, 2.0 * np.pi / m)
        angles = 2.0 * np.pi * np.arange(m) / m
        deg = m - 1
    elif n == 3:
        r = resolution
        t, wt = np.polynomial.legendre.leggauss(r)
        pos = t > 0
        tp, wp = t[pos], wt[pos]
        m_az = 2 * r
        az = 2.0 * np.pi * np.arange(m_az) / m_az
        ca, sa = np.cos(az), np.sin(az)
        s = np.sqrt(1.0 - tp**2)
        half = np.column_stack(
            [
                (s[:, None] * ca[None, :]).ravel(),
                (s[:, None] * sa[None, :]).ravel(),
                np.repeat(tp, m_az),
            ]
        )
        wh = np.repeat(wp, m_az) * (2.0 * np.pi / m_az)
        nodes = np.vstack([half, -half])
        weights = np.concatenate([wh, wh])
        angles = None
        deg = 2 * r - 1
    else:
        r = resolution
        k = np.arange(1, r + 1)
        tc = np.cos(k * np.pi / (r + 1))
        wc = (np.pi / (r + 1)) * np.sin(k * np.pi / (r + 1)) ** 2
        pos = tc > 0
        tp, wp = tc[pos], wc[pos]
        inner = build_grid(3, r)
        s = np.sqrt(1.0 - tp**2)
        gi = inner.size
        half = np.empty((tp.size * gi, 4))
        half[:, 0] = np.repeat(tp, gi)
        half[:, 1:] = (s[:, None, None] * inner.nodes[None, :, :]).reshape(-1, 3)
        wh = (wp[:, None] * inner.weights[None, :]).ravel()
        nodes = np.vstack([half, -half])
        weights = np.concatenate([wh, wh])
        angles = None
        deg = min(2 * r - 1, inner.max_exact_degree)

    g = nodes.shape[0]
    antipode = (np.arange(g) + g // 2) % g
    return SphereGrid(
        n=n,
        resolution=resolution,
        nodes=np.ascontiguousarray(nodes),
        weights=weights,
        antipode=antipode,
        max_exact_degree=deg,
        angles=angles,
    )


def check_samples(grid: SphereGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != grid.size:
        raise InputError(
            f"sample array of length {f.shape[-1]} does not match grid of size {grid.size}"
        )
    return f


def integrate(grid: SphereGrid, f) -> float:
    """Quadrature of grid samples against the grid weights."""
    f = check_samples(grid, f)
    return float(f @ grid.weights)


def norms(grid: SphereGrid, f) -> tuple[float, float]:
    """(L2, C0) norms of a sampled function."""
    f = check_samples(grid, f)
    l2 = math.sqrt(max(float((f * f) @ grid.weights), 0.0))
    return l2, float(np.max(np.abs(f)))


def monomial_samples(grid: SphereGrid, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=int)
    return np.prod(grid.nodes ** alpha[None, :], axis=1)
