"""Constant-element boundary element solver for (del^2 - q^2) u = 0 in 2D.

Solves the transformed diffusion equation on a meshed closed polygon
(rectangles, for the shipped benchmark) with mixed Dirichlet/Neumann data,
one dense complex solve per Laplace parameter.  Kernels are the modified
Bessel functions K0 (single layer) and K1 (double layer and gradients).

Conventions
-----------
* Perimeter is traversed counterclockwise, normals point outward.
* Collocation at element midpoints; the smooth-boundary jump coefficient
  c = 1/2 then applies on every element (corners are never collocated).
* `flux` on the boundary means the outward normal derivative of u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import EULER_GAMMA, k01_values

GAUSS_ORDER = 8

#: Element pairs closer than this multiple of the element length get a
#: subdivided quadrature to control near-singular error.
NEAR_FIELD_FACTOR = 3.0
NEAR_FIELD_SPLIT = 4

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

FLAG_NEAR_BOUNDARY = "near-boundary"
FLAG_OUTSIDE_DOMAIN = "outside-domain"


class SingularSystemError(RuntimeError):
    """Dense boundary system could not be solved."""


@dataclass(frozen=True)
class BoundaryMesh:
    """Closed counterclockwise perimeter of straight constant elements.

    Arrays are aligned by element: segment start/end points, midpoints,
    outward unit normals, lengths, a condition tag per element, and the
    spatial boundary value carried by that condition.
    """

    starts: np.ndarray
    ends: np.ndarray
    midpoints: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    lengths: np.ndarray
    bc_kind: tuple
    bc_value: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.lengths.size

    def validate(self):
        n = self.n_elements
        if np.any(self.lengths <= 0):
            raise ValueError("element lengths must be positive")
        norms = np.linalg.norm(self.normals, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            raise ValueError("normals must be unit vectors")
        if not np.allclose(self.ends, np.roll(self.starts, -1, axis=0), atol=1e-12):
            raise ValueError("perimeter must be closed and ordered")
        if len(self.bc_kind) != n or self.bc_value.size != n:
            raise ValueError("boundary condition arrays must match element count")
        for k in self.bc_kind:
            if k not in (DIRICHLET, NEUMANN):
                raise ValueError(f"unknown boundary condition kind {k!r}")


_SIDE_ORDER = ("bottom", "right", "top", "left")


def discretize_rectangle(width: float, height: float, n_per_unit: int,
                         bc: dict) -> BoundaryMesh:
    """Mesh the rectangle [0,w] x [0,h] with uniform elements per side.

    `bc` maps each of 'bottom', 'right', 'top', 'left' to a
    (kind, spatial value) pair with kind 'dirichlet' or 'neumann'.
    """
    if width <= 0 or height <= 0:
        raise ValueError("rectangle dimensions must be positive")
    if n_per_unit < 1:
        raise ValueError("n_per_unit must be >= 1")
    missing = set(_SIDE_ORDER) - set(bc)
    if missing:
        raise ValueError(f"missing boundary condition for sides: {sorted(missing)}")

    corners = {
        "bottom": (np.array([0.0, 0.0]), np.array([width, 0.0])),
        "right": (np.array([width, 0.0]), np.array([width, height])),
        "top": (np.array([width, height]), np.array([0.0, height])),
        "left": (np.array([0.0, height]), np.array([0.0, 0.0])),
    }
    starts, ends, kinds, values = [], [], [], []
    for side in _SIDE_ORDER:
        kind, value = bc[side]
        if kind not in (DIRICHLET, NEUMANN):
            raise ValueError(f"side {side!r}: unknown condition kind {kind!r}")
        a, b = corners[side]
        m = int(round(np.linalg.norm(b - a) * n_per_unit))
        if m < 1:
            raise ValueError(f"side {side!r} resolves to zero elements")
        fractions = np.linspace(0.0, 1.0, m + 1)
        pts = a[None, :] + fractions[:, None] * (b - a)[None, :]
        starts.append(pts[:-1])
        ends.append(pts[1:])
        kinds.extend([kind] * m)
        values.extend([float(value)] * m)

    starts = np.vstack(starts)
    ends = np.vstack(ends)
    seg = ends - starts
    lengths = np.linalg.norm(seg, axis=1)
    tangents = seg / lengths[:, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    mesh = BoundaryMesh(starts=starts, ends=ends, midpoints=0.5 * (starts + ends),
                        normals=normals, tangents=tangents, lengths=lengths,
                        bc_kind=tuple(kinds), bc_value=np.array(values))
    mesh.validate()
    return mesh


def benchmark_rectangle_mesh(n_per_unit: int = 8) -> BoundaryMesh:
    """The 3 x 2 test rectangle: potential -2|+2 at the short ends,
    insulated long sides."""
    return discretize_rectangle(3.0, 2.0, n_per_unit, {
        "left": (DIRICHLET, -2.0),
        "right": (DIRICHLET, 2.0),
        "bottom": (NEUMANN, 0.0),
        "top": (NEUMANN, 0.0),
    })


@dataclass(frozen=True)
class HelmholtzSystem:
    """Dense collocation matrices for one wavenumber.

    h includes the c = 1/2 jump term on its diagonal; g is the single
    layer.  Both are n x n complex for n elements.
    """

    h: np.ndarray
    g: np.ndarray
    q: complex


@dataclass(frozen=True)
class BoundarySolution:
    """Element-wise potential and outward normal flux for one q."""

    phi: np.ndarray
    flux: np.ndarray
    q: complex


def _gauss_points(mesh: BoundaryMesh, split: int):
    """Composite Gauss nodes and weights on every element, (n, split*g, 2)."""
    u, w = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    if split > 1:
        centers = (2.0 * np.arange(split) + 1.0) / split - 1.0
        u = (centers[:, None] + u[None, :] / split).ravel()
        w = np.tile(w / split, split)
    pts = (mesh.midpoints[:, None, :]
           + 0.5 * mesh.lengths[:, None, None] * u[None, :, None]
           * mesh.tangents[:, None, :])
    return pts, w


def _layer_integrals(targets: np.ndarray, mesh: BoundaryMesh, q: complex):
    """Single- and double-layer integrals of the K0 kernel.

    Returns (G, H) with shape (n_targets, n_elements); H here is the bare
    integral of dG/dn without any jump term.
    """
    pts, w = _gauss_points(mesh, 1)
    rvec = pts[None, :, :, :] - targets[:, None, None, :]
    r = np.linalg.norm(rvec, axis=-1)
    safe_r = np.where(r == 0.0, 1.0, r)
    k0, k1 = k01_values(q * safe_r)
    costh = np.einsum("tjgd,jd->tjg", rvec, mesh.normals) / safe_r
    gmat = (mesh.lengths[None, :] / 2.0) * np.einsum("g,tjg->tj", w, k0) / (2.0 * np.pi)
    hker = -(q / (2.0 * np.pi)) * k1 * costh
    hmat = (mesh.lengths[None, :] / 2.0) * np.einsum("g,tjg->tj", w, hker)
    return gmat, hmat


def _layer_integrals_paired(targets: np.ndarray, mesh: BoundaryMesh, q: complex,
                            element_idx: np.ndarray, split: int):
    """Layer integrals for matched (target, element) pairs only."""
    pts, w = _gauss_points(mesh, split)
    pts = pts[element_idx]
    normals = mesh.normals[element_idx]
    lengths = mesh.lengths[element_idx]
    rvec = pts - targets[:, None, :]
    r = np.linalg.norm(rvec, axis=-1)
    k0, k1 = k01_values(q * r)
    costh = np.einsum("mgd,md->mg", rvec, normals) / r
    g = (lengths / 2.0) * (k0 @ w) / (2.0 * np.pi)
    h = (lengths / 2.0) * ((-(q / (2.0 * np.pi)) * k1 * costh) @ w)
    return g, h


def _diagonal_g(mesh: BoundaryMesh, q: complex) -> np.ndarray:
    """Self integrals of K0 with the log singularity removed analytically.

    Writing K0(qs) = R(qs) - ln(qs/2) - gamma with R smooth and R(0) = 0,
    the log part integrates in closed form over the half element while R
    is handled by regular quadrature.
    """
    u, w = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    half = mesh.lengths / 2.0
    s = 0.5 * half[:, None] * (u[None, :] + 1.0)
    z = q * s
    k0, _ = k01_values(z)
    smooth = k0 + np.log(0.5 * z) + EULER_GAMMA
    quad = 0.5 * half * (smooth @ w)
    closed = half * (1.0 - EULER_GAMMA - np.log(q * mesh.lengths / 4.0))
    return (quad + closed) / np.pi


def assemble(mesh: BoundaryMesh, q: complex) -> HelmholtzSystem:
    """Collocation matrices H (double layer + 1/2 jump) and G (single layer).

    Requires Re(q) > 0 so the kernel decays.  Off-diagonal entries use
    Gauss-Legendre quadrature with near-field subdivision; the singular
    diagonal of G subtracts and integrates the log singularity in closed
    form, and the flat-element diagonal of H is exactly the 1/2 jump term.
    """
    q = complex(q)
    if q.real <= 0:
        raise ValueError("assemble requires Re(q) > 0 (principal sqrt of p/alpha)")
    n = mesh.n_elements
    gmat, hmat = _layer_integrals(mesh.midpoints, mesh, q)
    if not (np.all(np.isfinite(np.where(np.eye(n, dtype=bool), 0, gmat)))
            and np.all(np.isfinite(np.where(np.eye(n, dtype=bool), 0, hmat)))):
        bad = np.argwhere(~np.isfinite(hmat) | ~np.isfinite(gmat))
        bad = [tuple(b) for b in bad if b[0] != b[1]][:3]
        raise FloatingPointError(f"non-finite kernel integrals at element pairs {bad}")

    # near-field refinement: close but non-singular pairs get a composite rule
    dist = np.linalg.norm(mesh.midpoints[:, None, :] - mesh.midpoints[None, :, :], axis=-1)
    scale = np.maximum(mesh.lengths[:, None], mesh.lengths[None, :])
    near_i, near_j = np.nonzero((dist < NEAR_FIELD_FACTOR * scale) & ~np.eye(n, dtype=bool))
    if near_i.size:
        gn, hn = _layer_integrals_paired(mesh.midpoints[near_i], mesh, q,
                                         near_j, NEAR_FIELD_SPLIT)
        gmat[near_i, near_j] = gn
        hmat[near_i, near_j] = hn

    idx = np.arange(n)
    gmat[idx, idx] = _diagonal_g(mesh, q)
    hmat[idx, idx] = 0.5
    return HelmholtzSystem(h=hmat, g=gmat, q=q)


def solve_boundary(system: HelmholtzSystem, mesh: BoundaryMesh,
                   f_t_hat: complex = 1.0) -> BoundarySolution:
    """Solve for the unknown boundary potential / flux densities.

    Dirichlet elements carry phi = value * f_t_hat exactly and their flux
    is solved for; Neumann elements carry flux = value * f_t_hat exactly
    and their potential is solved for.
    """
    n = mesh.n_elements
    if system.h.shape != (n, n):
        raise ValueError("system was assembled for a different mesh")
    dir_mask = np.array([k == DIRICHLET for k in mesh.bc_kind])
    phi = np.zeros(n, dtype=complex)
    flux = np.zeros(n, dtype=complex)
    phi[dir_mask] = mesh.bc_value[dir_mask] * f_t_hat
    flux[~dir_mask] = mesh.bc_value[~dir_mask] * f_t_hat

    a = np.where(dir_mask[None, :], -system.g, system.h)
    b = -system.h[:, dir_mask] @ phi[dir_mask] + system.g[:, ~dir_mask] @ flux[~dir_mask]
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"boundary system is singular at q = {system.q!r} "
            f"(cond ~ {np.linalg.cond(a):.3e})") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(
            f"boundary solve produced non-finite densities at q = {system.q!r} "
            f"(cond ~ {np.linalg.cond(a):.3e})")
    flux[dir_mask] = x[dir_mask]
    phi[~dir_mask] = x[~dir_mask]
    return BoundarySolution(phi=phi, flux=flux, q=system.q)


def _winding_number(mesh: BoundaryMesh, point: np.ndarray) -> float:
    a = mesh.starts - point[None, :]
    b = mesh.ends - point[None, :]
    ang = np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
                     np.einsum("ij,ij->i", a, b))
    return float(ang.sum())


def eval_interior(solution: BoundarySolution, mesh: BoundaryMesh, point):
    """Potential and gradient at an interior point from the boundary data.

    Uses the representation u(xi) = int G flux - int u dG/dn with c = 1;
    the gradient differentiates both kernels analytically (K1 terms).
    Returns (phi, grad, flags); points outside or within half an element
    length of the boundary are flagged rather than rejected.
    """
    pt = np.asarray(point, dtype=float)
    q = solution.q
    flags = []
    if abs(_winding_number(mesh, pt)) < np.pi:
        flags.append(FLAG_OUTSIDE_DOMAIN)

    pts, w = _gauss_points(mesh, NEAR_FIELD_SPLIT)
    rvec = pts - pt[None, None, :]
    r = np.linalg.norm(rvec, axis=-1)
    min_dist = float(np.min(r))
    if min_dist < 0.5 * float(np.max(mesh.lengths)):
        flags.append(FLAG_NEAR_BOUNDARY)
    k0, k1 = k01_values(q * r)
    costh = np.einsum("jgd,jd->jg", rvec, mesh.normals) / r

    wl = 0.5 * mesh.lengths[:, None] * w[None, :]
    g_row = (wl * k0).sum(axis=1) / (2.0 * np.pi)
    h_row = (wl * (-(q / (2.0 * np.pi)) * k1 * costh)).sum(axis=1)
    phi = g_row @ solution.flux - h_row @ solution.phi

    # gradients of the kernels with respect to the evaluation point
    e = rvec / r[..., None]
    grad_g_ker = (q / (2.0 * np.pi)) * k1[..., None] * e
    u_un = e * costh[..., None]
    grad_h_ker = -(q / (2.0 * np.pi)) * (
        (q * k0 + 2.0 * k1 / r)[..., None] * u_un
        - (k1 / r)[..., None] * mesh.normals[:, None, :]
    )
    grad_g_row = (wl[..., None] * grad_g_ker).sum(axis=1)
    grad_h_row = (wl[..., None] * grad_h_ker).sum(axis=1)
    grad = (grad_g_row.T @ solution.flux - grad_h_row.T @ solution.phi)
    return phi, grad, tuple(flags)


def dump_mesh(mesh: BoundaryMesh, stream):
    """Write the element table as documented plain text (debug aid)."""
    stream.write("# invlap boundary mesh\n")
    stream.write("# columns: x0 y0 x1 y1 nx ny length kind value\n")
    for i in range(mesh.n_elements):
        stream.write(
            f"{mesh.starts[i,0]:.12g} {mesh.starts[i,1]:.12g} "
            f"{mesh.ends[i,0]:.12g} {mesh.ends[i,1]:.12g} "
            f"{mesh.normals[i,0]:.12g} {mesh.normals[i,1]:.12g} "
            f"{mesh.lengths[i]:.12g} {mesh.bc_kind[i]} {mesh.bc_value[i]:.12g}\n")


def dump_solution(solution: BoundarySolution, mesh: BoundaryMesh, stream):
    """Write the solved boundary densities next to the element table."""
    stream.write(f"# invlap boundary solution, q = {solution.q.real:.12g}"
                 f"{solution.q.imag:+.12g}j\n")
    stream.write("# columns: xm ym kind phi_re phi_im flux_re flux_im\n")
    for i in range(mesh.n_elements):
        stream.write(
            f"{mesh.midpoints[i,0]:.12g} {mesh.midpoints[i,1]:.12g} "
            f"{mesh.bc_kind[i]} "
            f"{solution.phi[i].real:.12g} {solution.phi[i].imag:.12g} "
            f"{solution.flux[i].real:.12g} {solution.flux[i].imag:.12g}\n")
