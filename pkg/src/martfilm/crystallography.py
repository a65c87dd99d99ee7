"""Variant algebra: point groups, energy wells, well projections, twin solutions.

Variants are indexed from 0.  The austenite well (identity stretch) is
addressed by the sentinel index ``AUSTENITE`` wherever a classification
can return either phase.  All matrix-valued routines accept arbitrary
leading batch dimensions on their ``(..., 3, 3)`` arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AUSTENITE",
    "PointGroup",
    "WellSet",
    "LaminateSpec",
    "point_group",
    "generate_variants",
    "closest_rotation",
    "dist_to_well",
    "well_distances",
    "project_pi",
    "project_pi_ij",
    "solve_twin",
]

AUSTENITE = -1

# Relative slack used when breaking near-ties between well distances.
# Ties resolve to the earlier candidate (austenite first, then lowest
# variant index), so classification is deterministic.
_TIE_RTOL = 1e-12

_EYE3 = np.eye(3)


def _signed_permutations():
    """All 48 signed permutation matrices, identity first, fixed order."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            r = np.zeros((3, 3))
            for row, (col, s) in enumerate(zip(perm, signs)):
                r[row, col] = s
            mats.append(r)
    return mats


def _proper(mats):
    return [m for m in mats if np.linalg.det(m) > 0]


@dataclass(frozen=True)
class PointGroup:
    """Proper rotation group of the high-temperature phase.

    ``rotations`` is an ``(n, 3, 3)`` stack; each element is in SO(3).
    """

    name: str
    rotations: np.ndarray

    def __post_init__(self):
        rots = np.asarray(self.rotations, float)
        if rots.ndim != 3 or rots.shape[1:] != (3, 3):
            raise ValueError("rotations must be an (n, 3, 3) stack")
        rtr = np.einsum("nij,nik->njk", rots, rots)
        if np.max(np.abs(rtr - _EYE3)) > 1e-12:
            raise ValueError(f"point group {self.name!r}: element not orthogonal")
        if np.max(np.abs(np.linalg.det(rots) - 1.0)) > 1e-12:
            raise ValueError(f"point group {self.name!r}: improper rotation present")
        object.__setattr__(self, "rotations", rots)

    def __len__(self):
        return len(self.rotations)


def point_group(name: str) -> PointGroup:
    """Return the named proper point group as an explicit rotation list.

    Supported names: ``cubic`` (24 rotations), ``tetragonal`` (8, z-axis
    distinguished), ``orthorhombic`` (4, the diagonal two-fold group).
    """
    signed = _signed_permutations()
    if name == "cubic":
        rots = _proper(signed)
    elif name == "tetragonal":
        rots = [m for m in _proper(signed) if abs(m[2, 2]) == 1.0]
    elif name == "orthorhombic":
        rots = [m for m in _proper(signed) if np.all(np.diag(np.abs(m)) == 1.0)]
    else:
        raise ValueError(f"unknown point group {name!r}")
    return PointGroup(name, np.array(rots))


def _check_spd(u, what="U"):
    u = np.asarray(u, float)
    if u.shape != (3, 3):
        raise ValueError(f"{what} must be 3x3")
    if np.max(np.abs(u - u.T)) > 1e-10:
        raise ValueError(f"{what} must be symmetric")
    if np.min(np.linalg.eigvalsh(u)) <= 0.0:
        raise ValueError(f"{what} must be positive definite")
    return u


@dataclass(frozen=True)
class WellSet:
    """Martensitic variant stretches, optionally together with austenite.

    ``variants`` is an ``(N, 3, 3)`` stack of symmetric positive definite
    transformation strains.  ``includes_austenite`` controls whether the
    identity well SO(3) participates in projections and classification.
    """

    variants: np.ndarray
    includes_austenite: bool = False

    def __post_init__(self):
        var = np.asarray(self.variants, float)
        if var.ndim != 3 or var.shape[1:] != (3, 3):
            raise ValueError("variants must be an (N, 3, 3) stack")
        for k in range(var.shape[0]):
            _check_spd(var[k], f"variant {k}")
        for k in range(var.shape[0]):
            for l in range(k + 1, var.shape[0]):
                if np.linalg.norm(var[k] - var[l]) <= 1e-10:
                    raise ValueError(f"variants {k} and {l} coincide")
        object.__setattr__(self, "variants", var)

    @property
    def n_variants(self) -> int:
        return self.variants.shape[0]


def generate_variants(u1, group: PointGroup, include_austenite: bool = False) -> WellSet:
    """Orbit ``{R^T U1 R : R in group}`` deduplicated to the distinct variants.

    The first occurrence order over the group's rotation list is kept, so
    ``u1`` itself is always variant 0.
    """
    u1 = _check_spd(u1, "U1")
    variants = []
    for r in group.rotations:
        u = r.T @ u1 @ r
        if all(np.linalg.norm(u - v) >= 1e-10 for v in variants):
            variants.append(u)
    return WellSet(np.array(variants), includes_austenite=include_austenite)


def closest_rotation(m) -> np.ndarray:
    """Orthogonal Procrustes solution: the R in SO(3) maximizing trace(R^T M).

    Uses the SVD with a determinant correction that flips the direction of
    the smallest singular value when the unconstrained orthogonal factor is
    a reflection.  Deterministic up to LAPACK's SVD convention; for
    degenerate inputs (repeated singular values) the convention's choice of
    basis fixes the result.
    """
    m = np.asarray(m, float)
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    neg = np.linalg.det(r) < 0
    if np.any(neg):
        u = np.where(neg[..., None, None], u * np.array([1.0, 1.0, -1.0]), u)
        r = u @ vt
    return r


def dist_to_well(f, u):
    """Frobenius distance from F to the well SO(3)U and the realizing rotation.

    Returns ``(distance, R)`` with ``distance = ||F - R U||`` minimal over
    SO(3), ``R = closest_rotation(F U^T)``.  ``f`` may carry batch
    dimensions.
    """
    f = np.asarray(f, float)
    u = np.asarray(u, float)
    r = closest_rotation(f @ u.T)
    d = np.linalg.norm(f - r @ u, axis=(-2, -1))
    return d, r


def well_distances(f, wells: WellSet):
    """Distances and rotations from F to every candidate well.

    Candidates are ordered austenite first (when the well set includes it)
    followed by the variants; the returned ``labels`` array maps candidate
    positions to well indices (``AUSTENITE`` or the variant index).

    Returns ``(labels, d, r)`` where ``d`` has shape ``(..., M)`` and ``r``
    has shape ``(..., M, 3, 3)``.
    """
    f = np.asarray(f, float)
    us = wells.variants
    labels = list(range(wells.n_variants))
    if wells.includes_austenite:
        us = np.concatenate([_EYE3[None], us], axis=0)
        labels = [AUSTENITE] + labels
    m = f[..., None, :, :] @ np.swapaxes(us, -1, -2)
    r = closest_rotation(m)
    d = np.linalg.norm(f[..., None, :, :] - r @ us, axis=(-2, -1))
    return np.array(labels), d, r


def _argmin_tied(d):
    """First index attaining the minimum of d along the last axis, with a
    relative slack so that analytically exact ties resolve deterministically."""
    dmin = np.min(d, axis=-1, keepdims=True)
    tol = _TIE_RTOL * (1.0 + dmin)
    return np.argmax(d <= dmin + tol, axis=-1)


def project_pi(f, wells: WellSet):
    """Projection onto the well set: nearest well index and projected matrix.

    Returns ``(k, piF)``: ``k`` is the variant index (or ``AUSTENITE``) of
    the closest well, ties broken austenite first then lowest variant
    index; ``piF = R U_k`` realizes the minimum distance.
    """
    labels, d, r = well_distances(f, wells)
    us = wells.variants
    if wells.includes_austenite:
        us = np.concatenate([_EYE3[None], us], axis=0)
    pos = _argmin_tied(d)
    rw = r @ us
    pif = np.take_along_axis(rw, pos[..., None, None, None], axis=-3)[..., 0, :, :]
    return labels[pos], pif


def project_pi_ij(f, lam: "LaminateSpec", wells: WellSet):
    """Two-well projection split into rotation and well parts.

    Projects F onto SO(3)U_i ∪ SO(3)U_j for the laminate's pair and
    returns ``(Theta, Pi)`` with ``Theta`` in SO(3), ``Pi`` in
    ``{Q U_i, U_j}`` and ``Theta @ Pi`` the projection.  The rotation is
    reported relative to the laminate's ``Q`` on the i side, so that the
    well part is exactly ``Q U_i`` there.
    """
    f = np.asarray(f, float)
    ui, uj = wells.variants[lam.i], wells.variants[lam.j]
    di, ri = dist_to_well(f, ui)
    dj, rj = dist_to_well(f, uj)
    tol = _TIE_RTOL * (1.0 + np.minimum(di, dj))
    i_side = di <= dj + tol if lam.i < lam.j else di < dj - tol
    qui = lam.Q @ ui
    theta_i = ri @ lam.Q.T
    shape = f.shape
    theta = np.where(i_side[..., None, None], theta_i, rj)
    pi = np.where(i_side[..., None, None], np.broadcast_to(qui, shape), np.broadcast_to(uj, shape))
    return theta, pi


@dataclass(frozen=True)
class LaminateSpec:
    """Rank-one connected pair defining simple-laminate boundary data.

    Encodes ``Q U_i = U_j + a ⊗ n`` together with the mixing fraction
    ``lam`` of the rotated i-variant; the affine boundary data is
    ``y0(x) = [lam Q U_i + (1 - lam) U_j] (x1, x2, 0)``.
    """

    i: int
    j: int
    Q: np.ndarray
    a: np.ndarray
    n: np.ndarray
    lam: float = 0.5

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("laminate needs two distinct variants")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("volume fraction must lie in [0, 1]")
        q = np.asarray(self.Q, float)
        a = np.asarray(self.a, float)
        n = np.asarray(self.n, float)
        if np.max(np.abs(q.T @ q - _EYE3)) > 1e-10 or abs(np.linalg.det(q) - 1.0) > 1e-10:
            raise ValueError("Q must be a rotation")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("interface normal must be a unit vector")
        if np.linalg.norm(a) == 0.0:
            raise ValueError("shear vector must be nonzero")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "n", n)

    def well_pair(self, wells: WellSet):
        """The two laminate gradients ``(Q U_i, U_j)``."""
        return self.Q @ wells.variants[self.i], wells.variants[self.j]

    def average_gradient(self, wells: WellSet) -> np.ndarray:
        """Affine boundary-data matrix ``lam Q U_i + (1 - lam) U_j``."""
        qui, uj = self.well_pair(wells)
        return self.lam * qui + (1.0 - self.lam) * uj

    def residual(self, wells: WellSet) -> float:
        """Frobenius defect of the rank-one connection."""
        qui, uj = self.well_pair(wells)
        return float(np.linalg.norm(qui - uj - np.outer(self.a, self.n)))


def solve_twin(ui, uj, *, i: int = 0, j: int = 1, fraction: float = 0.5,
               tol: float = 1e-9) -> list[LaminateSpec]:
    """Solve the interface equation ``Q U_i = U_j + a ⊗ n`` for (Q, a, n).

    Forms ``C = U_j^{-T} U_i^2 U_j^{-1}`` and eigendecomposes; solutions
    exist iff the middle eigenvalue equals 1 within ``tol``, in which case
    the two families (or one, in degenerate cases) are constructed from the
    extreme eigenpairs with ``n`` normalized to unit length.  Returns an
    empty list when no rank-one connection exists; raises for non-SPD
    input.
    """
    ui = _check_spd(ui, "U_i")
    uj = _check_spd(uj, "U_j")
    if np.linalg.norm(ui - uj) <= 1e-10:
        return []
    uj_inv = np.linalg.inv(uj)
    c = uj_inv.T @ ui @ ui @ uj_inv
    c = 0.5 * (c + c.T)
    lam, evec = np.linalg.eigh(c)
    l1, l2, l3 = lam
    if abs(l2 - 1.0) > tol:
        return []
    if l3 - l1 <= tol:
        return []
    l1 = min(l1, 1.0)
    l3 = max(l3, 1.0)
    e1, e3 = evec[:, 0], evec[:, 2]
    den = np.sqrt(l3 - l1)
    ui_inv = np.linalg.inv(ui)
    out = []
    for kappa in (1.0, -1.0):
        a_raw = (np.sqrt(l3 * (1.0 - l1)) * e1 + kappa * np.sqrt(l1 * (l3 - 1.0)) * e3) / den
        m_raw = ((np.sqrt(l3) - np.sqrt(l1)) / den) * (
            -np.sqrt(1.0 - l1) * e1 + kappa * np.sqrt(l3 - 1.0) * e3
        )
        n_raw = uj @ m_raw
        rho = np.linalg.norm(n_raw)
        if rho < 1e-14:
            continue
        n = n_raw / rho
        a = rho * a_raw
        q = (uj + np.outer(a, n)) @ ui_inv
        # polish: project Q onto SO(3) and refit a to the exact rank-one residual
        q = closest_rotation(q)
        a = (q @ ui - uj) @ n
        if np.linalg.norm(a) == 0.0:
            continue
        out.append(LaminateSpec(i=i, j=j, Q=q, a=a, n=n, lam=fraction))
    return out
