"""Planar sections of bodies in R^N and the round-section search.

A section family maps an orthonormal 2-frame to the planar convex
body cut out by the frame's plane. Ellipsoid sections are exact
quadratic-form slices; cube and V-polytope sections clip the plane
against the halfspace description and hull the resulting polygon.
The search scores frames by circle-harmonic energy of the section's
support function and descends the best coarse frames through
exponential-map charts of the Grassmannian, keeping a monotone
best-so-far trace; on non-convergence the best frame found is
returned with converged=False rather than an error.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull

from .bodies import ConvexBody, from_support_samples, from_vertices
from .errors import InputError, OriginNotInterior
from .fourier2d import fourier_analyze, harmonic_energy
from .sphere import SphereGrid, build_grid

__all__ = [
    "SectionFamily",
    "ellipsoid_family",
    "cube_family",
    "polytope_family",
    "plane_section",
    "round_section_search",
    "clip_polygon",
]


def _halfplane_polygon(normals: np.ndarray, offsets: np.ndarray,
                       span: float) -> np.ndarray:
    """Vertices of {y: <normals_i, y> <= offsets_i}, clipped from a
    generous bounding square (Sutherland-Hodgman)."""
    poly = span * np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    for nrm, off in zip(normals, offsets):
        poly = clip_polygon(poly, nrm, off)
        if poly.shape[0] == 0:
            return poly
    return poly


def clip_polygon(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of a convex polygon with <normal, y> <= offset."""
    if poly.shape[0] == 0:
        return poly
    vals = poly @ normal - offset
    out = []
    m = poly.shape[0]
    for i in range(m):
        j = (i + 1) % m
        vi, vj = vals[i], vals[j]
        if vi <= 0:
            out.append(poly[i])
        if (vi < 0 < vj) or (vj < 0 < vi):
            t = vi / (vi - vj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.asarray(out).reshape(-1, 2)


@dataclass
class SectionFamily:
    """Planar central sections of one body in R^N, indexed by 2-frames."""

    ambient_dim: int
    kind: str
    grid: SphereGrid = field(repr=False)
    quad: np.ndarray | None = field(default=None, repr=False)  # x' Q x <= 1
    normals: np.ndarray | None = field(default=None, repr=False)
    offsets: np.ndarray | None = field(default=None, repr=False)

    def section(self, frame: np.ndarray) -> ConvexBody:
        return plane_section(self, frame)


def ellipsoid_family(axes, grid: SphereGrid | None = None) -> SectionFamily:
    axes = np.asarray(axes, dtype=float)
    if np.any(axes <= 0):
        raise InputError("ellipsoid semiaxes must be positive")
    if grid is None:
        grid = build_grid(2)
    return SectionFamily(axes.size, "ellipsoid", grid, quad=np.diag(axes**-2))


def cube_family(big_n: int, half_width: float = 1.0,
                grid: SphereGrid | None = None) -> SectionFamily:
    if grid is None:
        grid = build_grid(2)
    eye = np.eye(big_n)
    normals = np.vstack([eye, -eye])
    offsets = np.full(2 * big_n, float(half_width))
    return SectionFamily(big_n, "polytope", grid, normals=normals, offsets=offsets)


def polytope_family(vertices: np.ndarray, grid: SphereGrid | None = None) -> SectionFamily:
    """Sections of the hull of a vertex set (origin must be interior)."""
    vertices = np.asarray(vertices, dtype=float)
    if grid is None:
        grid = build_grid(2)
    hull = ConvexHull(vertices)
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    if np.any(offsets <= 0):
        raise OriginNotInterior("origin is not interior to the polytope")
    return SectionFamily(vertices.shape[1], "polytope", grid,
                         normals=normals, offsets=offsets)


def _check_frame(frame: np.ndarray, big_n: int) -> np.ndarray:
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (2, big_n):
        raise InputError(f"expected a 2x{big_n} frame, got {frame.shape}")
    if np.max(np.abs(frame @ frame.T - np.eye(2))) > 1e-10:
        raise InputError("frame rows are not orthonormal")
    return frame


def plane_section(family: SectionFamily, frame: np.ndarray) -> ConvexBody:
    """The 2-D body {y: y1*frame[0] + y2*frame[1] in K} on the circle grid."""
    frame = _check_frame(frame, family.ambient_dim)
    grid = family.grid
    if family.kind == "ellipsoid":
        q2 = frame @ family.quad @ frame.T
        # support of {y: <y, Q2 y> <= 1} is sqrt(<v, Q2^-1 v>)
        qinv = np.linalg.inv(q2)
        h = np.sqrt(np.einsum("gi,ij,gj->g", grid.nodes, qinv, grid.nodes))
        return from_support_samples(grid, h)
    normals2 = family.normals @ frame.T
    span = float(np.max(family.offsets)) / max(
        1e-12, float(np.min(np.linalg.norm(family.normals, axis=1)))
    )
    poly = _halfplane_polygon(normals2, family.offsets, 4.0 * span)
    if poly.shape[0] < 3:
        raise InputError("section is empty or degenerate")
    return from_vertices(grid, poly)


def _random_frames2(big_n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((count, 2, big_n))
    for i in range(count):
        q, r = np.linalg.qr(rng.normal(size=(big_n, 2)))
        out[i] = (q * np.sign(np.diag(r))[None, :]).T
    return out


def _coordinate_frames2(big_n: int) -> list:
    frames = []
    eye = np.eye(big_n)
    for i in range(big_n):
        for j in range(i + 1, big_n):
            frames.append(eye[[i, j]])
    return frames


def _chart(frame: np.ndarray):
    """Exponential-map chart of the Grassmannian around a frame: the
    2(N-2) parameters rotate the plane toward its orthocomplement."""
    big_n = frame.shape[1]
    basis = np.linalg.qr(
        np.hstack([frame.T, np.random.default_rng(12345).normal(size=(big_n, big_n - 2))])
    )[0]
    # first two columns span the plane up to sign; rebuild exactly
    basis[:, :2] = frame.T

    def at(xi: np.ndarray) -> np.ndarray:
        k = xi.reshape(2, big_n - 2)
        s = np.zeros((big_n, big_n))
        s[:2, 2:] = k
        s[2:, :2] = -k.T
        w, v = np.linalg.eigh(1j * s)
        rot = (v * np.exp(-1j * w)) @ v.conj().T
        return (basis @ rot.real)[:, :2].T

    return at


def round_section_search(
    family: SectionFamily,
    d: int = 8,
    tol: float = 1e-8,
    coarse_count: int = 120,
    seed: int = 0,
    refine_top: int = 4,
    maxiter: int = 400,
) -> dict:
    """Find a 2-frame whose section has circle-harmonic energy below
    tol through degrees 1..d. Coarse Stiefel sampling plus coordinate
    planes, then Nelder-Mead descent in Grassmannian charts around the
    best candidates."""
    big_n = family.ambient_dim
    if big_n == 2:
        frame = np.eye(2)
        e = harmonic_energy(fourier_analyze(plane_section(family, frame), d))
        return {"frame": frame, "energy": e, "radius": _radius(family, frame),
                "converged": e < tol, "trace": [e]}
    rng = np.random.default_rng(seed)
    frames = list(_random_frames2(big_n, coarse_count, rng)) + _coordinate_frames2(big_n)

    def score(fr):
        return harmonic_energy(fourier_analyze(plane_section(family, fr), d))

    energies = np.array([score(fr) for fr in frames])
    order = np.argsort(energies)
    trace = [float(np.minimum.accumulate(energies[order][:1])[0])]
    best_frame = frames[order[0]]
    best_e = float(energies[order[0]])
    trace = [best_e]

    for idx in order[:refine_top]:
        at = _chart(frames[idx])
        res = minimize(
            lambda xi: score(at(xi)),
            np.zeros(2 * (big_n - 2)),
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-18, "maxiter": maxiter},
        )
        if res.fun < best_e:
            best_e = float(res.fun)
            best_frame = at(res.x)
        trace.append(best_e)
        if best_e < tol:
            break

    return {
        "frame": np.asarray(best_frame),
        "energy": best_e,
        "radius": _radius(family, best_frame),
        "converged": best_e < tol,
        "trace": trace,
    }


def _radius(family: SectionFamily, frame) -> float:
    body = plane_section(family, np.asarray(frame))
    return float(fourier_analyze(body, 1).a0)
