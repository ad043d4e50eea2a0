"""Geometry of the symmetric space GL(n, R)^1 / O(n).

Every ``g`` with ``|det g| = 1`` factors as ``g = k exp(X)`` with ``k``
orthogonal and ``X`` symmetric.  The geodesic distance from the base point
``K`` to ``gK`` is the Frobenius norm of ``X``, i.e. the l2-norm of the vector
of log singular values of ``g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix

DET_RTOL = 1e-9
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class GroupPoint:
    """An element of GL(n, R)^1, i.e. a real n x n matrix with |det| = 1."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise ValueError(f"expected a square matrix of size >= 2, got shape {a.shape}")
        s = np.linalg.svd(a, compute_uv=False)
        if s[-1] <= SINGULAR_RTOL * s[0]:
            raise SingularMatrix("matrix is numerically singular")
        logdet = float(np.sum(np.log(s)))
        if abs(math.expm1(logdet)) > DET_RTOL:
            raise ValueError(f"|det g| = {math.exp(logdet)!r} is not 1")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def normalized(cls, a) -> GroupPoint:
        """Rescale an invertible matrix so that its determinant has modulus one."""
        a = np.asarray(a, dtype=float)
        sign, logdet = np.linalg.slogdet(a)
        if sign == 0:
            raise SingularMatrix("cannot normalize a singular matrix")
        return cls(a * math.exp(-logdet / a.shape[0]))


@dataclass(frozen=True)
class PolarData:
    orthogonal_factor: np.ndarray
    log_symmetric: np.ndarray
    singular_values: np.ndarray


@dataclass(frozen=True)
class DistanceCheck:
    r: float
    log_opnorm: float
    log_frobnorm: float
    margin_op: float
    margin_frob: float


def _as_array(g) -> np.ndarray:
    if isinstance(g, GroupPoint):
        return g.entries
    return np.asarray(g, dtype=float)


def _svd(g):
    a = _as_array(g)
    u, s, vt = np.linalg.svd(a)
    if s[-1] < SINGULAR_RTOL * s[0]:
        raise SingularMatrix(f"smallest singular value {s[-1]:.3e} is below tolerance")
    return u, s, vt


def polar_log(g) -> PolarData:
    """Right polar decomposition ``g = k exp(X)`` with ``X`` symmetric."""
    u, s, vt = _svd(g)
    k = u @ vt
    x = vt.T @ np.diag(np.log(s)) @ vt
    x = 0.5 * (x + x.T)
    return PolarData(orthogonal_factor=k, log_symmetric=x, singular_values=s)


def log_singular_values(g) -> np.ndarray:
    return np.log(_svd(g)[1])


def cartan_distance(g) -> float:
    """Geodesic distance d(K, gK) = ||(log s_1, ..., log s_n)||_2."""
    return float(np.linalg.norm(log_singular_values(g)))


def cartan_distance_with_inverse(g, g_inv) -> float:
    """Distance computed from ``g`` and an independently formed ``g^-1``.

    Singular values >= 1 are read off ``g`` and the ones below 1 as reciprocals
    of the large singular values of ``g^-1``, so both ends keep full relative
    accuracy even when the condition number is beyond 1e12.
    """
    s = np.linalg.svd(_as_array(g), compute_uv=False)
    si = np.linalg.svd(_as_array(g_inv), compute_uv=False)[::-1]
    logs = np.where(s >= 1.0, np.log(s), -np.log(si))
    return float(np.linalg.norm(logs))


def operator_norm(g) -> float:
    return float(np.linalg.norm(_as_array(g), 2))


def frobenius_norm(g) -> float:
    return float(np.linalg.norm(_as_array(g), "fro"))


def check_distance_lemma(g) -> DistanceCheck:
    """Compare r(g) with log ||g|| for both the operator and Frobenius norms.

    ``r(g) >= log ||g||_op`` holds exactly because the largest |log s_i| is at
    most the l2-norm of the log singular values.  The Frobenius version only
    holds up to the constant ``log sqrt(n)`` (it fails at the identity), so
    ``margin_frob`` uses ``log ||g||_F - log(n)/2``.
    """
    a = _as_array(g)
    n = a.shape[0]
    logs = log_singular_values(a)
    r = float(np.linalg.norm(logs))
    log_op = float(np.max(logs))
    log_frob = math.log(frobenius_norm(a))
    return DistanceCheck(
        r=r,
        log_opnorm=log_op,
        log_frobnorm=log_frob,
        margin_op=r - log_op,
        margin_frob=r - (log_frob - 0.5 * math.log(n)),
    )


def random_unit_det(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian matrix rescaled to |det| = 1; ``scale`` widens the spread of singular values."""
    while True:
        a = rng.standard_normal((n, n)) * np.exp(scale * rng.standard_normal((n, 1)))
        sign, logdet = np.linalg.slogdet(a)
        if sign != 0 and np.isfinite(logdet):
            return a * math.exp(-logdet / n)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
