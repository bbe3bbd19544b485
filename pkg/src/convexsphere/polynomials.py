"""Spherical polynomial spaces P^d on S^{n-1}, n = 2, 3, 4.

P^d is the span of all degree-<=d polynomials restricted to the sphere;
F^d is its even, zero-average subspace. Dimensions:

    dim P^d_2 = 2d+1
    dim P^d_3 = (d+1)^2
    dim P^d_4 = (d+1)(d+2)(2d+3)/6

An L2-orthonormal basis (unnormalized surface measure) is produced from
closed-form harmonics - trigonometric on S^1, real spherical harmonics
on S^2, Gegenbauer-type hyperspherical harmonics on S^3 - and
re-orthonormalized by a weighted QR against the quadrature grid. The
start family is analytically orthogonal, so the QR is well conditioned
and discrete orthonormality holds to machine precision; the quadrature
is exact for polynomials up to the grid's degree, so discrete and true
L2 inner products agree. Basis elements are homogeneous of a single
harmonic degree, hence parity-pure, and the basis is nested by degree
(element i lies in the span of the family up to its own degree).

Gram-Schmidt over sphere-restricted monomials was rejected: the
monomial Gram at d = 12 is too ill-conditioned for float64 to reach
1e-10 orthonormality.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import eval_gegenbauer, sph_harm_y

from .errors import ConstantPolynomial, InputError
from .sphere import SphereGrid, check_samples

MAX_DEGREE = 12


def space_dimension(n: int, d: int) -> int:
    if n == 2:
        return 2 * d + 1
    if n == 3:
        return (d + 1) ** 2
    if n == 4:
        return (d + 1) * (d + 2) * (2 * d + 3) // 6
    raise InputError(f"unsupported sphere dimension n={n}")


def _real_sph_harm_table(d: int, theta, phi):
    """Real orthonormal spherical harmonics for all l <= d, m in [-l, l],
    keyed (l, m). Complex scipy harmonics combined into the standard
    real form."""
    out = {}
    for l in range(d + 1):
        out[(l, 0)] = np.real(sph_harm_y(l, 0, theta, phi))
        for m in range(1, l + 1):
            y = sph_harm_y(l, m, theta, phi)
            s = np.sqrt(2.0) * (-1.0) ** m
            out[(l, m)] = s * np.real(y)
            out[(l, -m)] = s * np.imag(y)
    return out


def _angles_3(points):
    z = np.clip(points[:, 2], -1.0, 1.0)
    theta = np.arccos(z)
    phi = np.arctan2(points[:, 1], points[:, 0])
    return theta, phi


def _family(n: int, d: int, points: np.ndarray):
    """Start family samples (P, dim) and per-element harmonic degrees."""
    p = np.asarray(points, dtype=float)
    if n == 2:
        ang = np.arctan2(p[:, 1], p[:, 0])
        cols = [np.ones(p.shape[0])]
        degs = [0]
        for q in range(1, d + 1):
            cols.append(np.cos(q * ang))
            cols.append(np.sin(q * ang))
            degs += [q, q]
    elif n == 3:
        theta, phi = _angles_3(p)
        tab = _real_sph_harm_table(d, theta, phi)
        cols, degs = [], []
        for l in range(d + 1):
            for m in range(-l, l + 1):
                cols.append(tab[(l, m)])
                degs += [l]
    elif n == 4:
        t = np.clip(p[:, 0], -1.0, 1.0)
        rest = p[:, 1:]
        s = np.linalg.norm(rest, axis=1)
        safe = np.where(s > 1e-300, s, 1.0)
        omega = rest / safe[:, None]
        omega[s <= 1e-300] = (0.0, 0.0, 1.0)
        theta, phi = _angles_3(omega)
        tab = _real_sph_harm_table(d, theta, phi)
        cols, degs = [], []
        for k in range(d + 1):
            for l in range(k + 1):
                geg = eval_gegenbauer(k - l, l + 1.0, t)
                radial = geg * s**l
                for m in range(-l, l + 1):
                    cols.append(radial * tab[(l, m)])
                    degs += [k]
    else:
        raise InputError(f"unsupported sphere dimension n={n}")
    return np.column_stack(cols), np.asarray(degs)


@dataclass
class Basis:
    """Orthonormal basis of P^d attached to a grid."""

    n: int
    d: int
    grid: SphereGrid = field(repr=False)
    samples: np.ndarray = field(repr=False)   # (G, m), b_i at grid nodes
    transform: np.ndarray = field(repr=False)  # family @ transform = basis
    degrees: np.ndarray = field(repr=False)
    _proj: np.ndarray = field(repr=False)      # (m, G), c = _proj @ f

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @cached_property
    def f_mask(self) -> np.ndarray:
        """Selector of the even, zero-average subspace F^d."""
        return (self.degrees % 2 == 0) & (self.degrees > 0)

    @cached_property
    def key(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(f"basis:{self.n}:{self.d}:{self.grid.key}:".encode())
        h.update(self.transform.tobytes())
        return h.hexdigest()[:16]

    def eval(self, points: np.ndarray) -> np.ndarray:
        """Basis values at arbitrary unit vectors, shape (P, dim)."""
        fam, _ = _family(self.n, self.d, points)
        return fam @ self.transform

    def project_samples(self, f: np.ndarray) -> np.ndarray:
        """L2 coefficients of grid samples (exact for polynomials within
        the grid's exact degree)."""
        return self._proj @ f


_BASIS_CACHE: dict[tuple, Basis] = {}


def get_basis(n: int, d: int, grid: SphereGrid) -> Basis:
    if d < 0 or d > MAX_DEGREE:
        raise InputError(f"degree d={d} outside 0..{MAX_DEGREE}")
    if grid.n != n:
        raise InputError(f"grid dimension {grid.n} != n={n}")
    if 2 * d > grid.max_exact_degree:
        raise InputError(
            f"grid exact to degree {grid.max_exact_degree} cannot hold a "
            f"degree-{d} basis (needs {2 * d})"
        )
    key = (n, d, grid.key)
    hit = _BASIS_CACHE.get(key)
    if hit is not None:
        return hit

    fam, degs = _family(n, d, grid.nodes)
    m = fam.shape[1]
    if m != space_dimension(n, d):
        raise InputError("family size mismatch")  # pragma: no cover
    sw = np.sqrt(grid.weights)
    q, r = np.linalg.qr(sw[:, None] * fam)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1.0
    q = q * sign[None, :]
    r = sign[:, None] * r
    dr = np.abs(np.diag(r))
    if dr.min() < 1e-8 * dr.max():
        raise InputError("start family is rank deficient on this grid")
    transform = solve_triangular(r, np.eye(m))
    basis = Basis(
        n=n,
        d=d,
        grid=grid,
        samples=q / sw[:, None],
        transform=transform,
        degrees=degs,
        _proj=(q * sw[:, None]).T,
    )
    _BASIS_CACHE[key] = basis
    return basis


@dataclass
class SphericalPoly:
    """Element of P^d as coefficients in the canonical basis."""

    n: int
    d: int
    coeffs: np.ndarray
    basis: Basis = field(repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.basis.dim,):
            raise InputError(
                f"coefficient vector of length {self.coeffs.size} does not "
                f"match basis dimension {self.basis.dim}"
            )

    @cached_property
    def samples(self) -> np.ndarray:
        return self.basis.samples @ self.coeffs

    @property
    def grid(self) -> SphereGrid:
        return self.basis.grid

    def eval(self, points: np.ndarray) -> np.ndarray:
        return self.basis.eval(points) @ self.coeffs

    @property
    def norm(self) -> float:
        """L2 norm (Parseval)."""
        return float(np.linalg.norm(self.coeffs))

    @property
    def mean(self) -> float:
        """Average value over the sphere."""
        from .sphere import sphere_area

        return float(self.coeffs[0]) / np.sqrt(sphere_area(self.n))

    def odd_part_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs[self.basis.degrees % 2 == 1]))

    def scaled(self, a: float) -> "SphericalPoly":
        return SphericalPoly(self.n, self.d, a * self.coeffs, self.basis)


def project(grid: SphereGrid, f, d: int) -> SphericalPoly:
    """Quadrature L2 projection of grid samples onto P^d."""
    f = check_samples(grid, f)
    basis = get_basis(grid.n, d, grid)
    return SphericalPoly(grid.n, d, basis.project_samples(f), basis)


def to_F_space(p: SphericalPoly, tol: float = 1e-12) -> SphericalPoly:
    """Project onto the even zero-average subspace and rescale to unit
    L2 norm. Raises ConstantPolynomial when nothing survives."""
    c = np.where(p.basis.f_mask, p.coeffs, 0.0)
    nrm = np.linalg.norm(c)
    if nrm <= tol * max(1.0, np.linalg.norm(p.coeffs)):
        raise ConstantPolynomial(
            "projection onto the even zero-average subspace vanishes"
        )
    return SphericalPoly(p.n, p.d, c / nrm, p.basis)


def is_nonconstant(p: SphericalPoly, tol: float = 1e-8) -> bool:
    """True when the L2 variance (squared norm of the deviation from the
    mean) exceeds tol."""
    variance = float(np.sum(p.coeffs[1:] ** 2))
    return variance > tol


@dataclass
class JoinPoint:
    """Formal join-coordinate point: positive weights summing to one,
    each attached to a unit-norm even non-constant polynomial of a
    common degree."""

    entries: list  # [(t_i, SphericalPoly)]

    def __post_init__(self):
        if not self.entries:
            raise InputError("join point needs at least one entry")
        ts = np.array([t for t, _ in self.entries], dtype=float)
        if np.any(ts <= 0) or abs(ts.sum() - 1.0) > 1e-10:
            raise InputError("join weights must be positive and sum to 1")
        polys = [f for _, f in self.entries]
        n, d = polys[0].n, polys[0].d
        for f in polys:
            if (f.n, f.d) != (n, d):
                raise InputError("join entries must share (n, d)")
            if abs(f.norm - 1.0) > 1e-8:
                raise InputError("join entries must have unit L2 norm")
            if f.odd_part_norm() > 1e-8 or abs(f.mean) > 1e-8:
                raise InputError("join entries must be even with zero average")
            if not is_nonconstant(f):
                raise InputError("join entries must be non-constant")

    @property
    def k(self) -> int:
        return len(self.entries)


def join_product(jp: JoinPoint, d_out: int | None = None) -> SphericalPoly:
    """prod_i (1 + t_i f_i), projected to degree d_out (default: the
    exact product degree k*d) and normalized into the unit sphere of F."""
    polys = [f for _, f in jp.entries]
    ts = [t for t, _ in jp.entries]
    n, d = polys[0].n, polys[0].d
    grid = polys[0].grid
    if d_out is None:
        d_out = min(jp.k * d, MAX_DEGREE)
    prod_deg = jp.k * d
    if d_out + prod_deg > grid.max_exact_degree:
        raise InputError(
            f"projection of a degree-{prod_deg} product at degree {d_out} "
            f"needs grid exactness {d_out + prod_deg}, have "
            f"{grid.max_exact_degree}; refine the grid"
        )
    g = np.ones(grid.size)
    for t, f in zip(ts, polys):
        g = g * (1.0 + t * f.samples)
    return to_F_space(project(grid, g, d_out))


def poly_product(p: SphericalPoly, q: SphericalPoly, d_out: int) -> SphericalPoly:
    """Pointwise product projected to degree d_out (no normalization)."""
    if p.grid is not q.grid and p.grid != q.grid:
        raise InputError("polynomial product requires a common grid")
    grid = p.grid
    if d_out + p.d + q.d > grid.max_exact_degree:
        raise InputError(
            f"product projection needs grid exactness {d_out + p.d + q.d}, "
            f"have {grid.max_exact_degree}"
        )
    return project(grid, p.samples * q.samples, d_out)


def rotate_poly(p: SphericalPoly, rot: np.ndarray) -> SphericalPoly:
    """p o R, i.e. u -> p(R u); exact (degree is preserved)."""
    pts = p.grid.nodes @ np.asarray(rot, dtype=float).T
    return project(p.grid, p.eval(pts), p.d)


def odd_even_split(grid: SphereGrid, f) -> tuple[np.ndarray, np.ndarray]:
    """(even, odd) parts of grid samples via the exact antipode map."""
    f = check_samples(grid, f)
    fa = f[..., grid.antipode]
    return 0.5 * (f + fa), 0.5 * (f - fa)
