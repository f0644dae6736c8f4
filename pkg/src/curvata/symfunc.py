"""Elementary symmetric functions of principal curvatures and Newton transformations.

Everything here works on the eigenvalues of the shape operator, so a Newton
transformation ``P_r`` is represented by its diagonal ``S_r(A_i)`` in the
principal frame.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInput


@dataclass(frozen=True)
class CurvatureVector:
    """Principal curvatures ``kappa_1, ..., kappa_n`` at a point."""

    kappa: tuple[float, ...]

    def __init__(self, kappa: Sequence[float]):
        try:
            values = tuple(float(k) for k in np.ravel(np.asarray(kappa, dtype=float)))
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"curvatures must be real numbers: {kappa!r}") from exc
        if len(values) < 1:
            raise InvalidInput("a curvature vector needs at least one entry")
        if not all(math.isfinite(v) for v in values):
            raise InvalidInput(f"curvatures must be finite: {values}")
        object.__setattr__(self, "kappa", values)

    @classmethod
    def umbilic(cls, n: int, value: float) -> "CurvatureVector":
        if n < 1:
            raise InvalidInput(f"dimension must be positive, got {n}")
        return cls([value] * n)

    @property
    def n(self) -> int:
        return len(self.kappa)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.kappa)

    def __neg__(self) -> "CurvatureVector":
        return CurvatureVector([-k for k in self.kappa])

    def is_umbilic(self, tol: float = 1e-12) -> bool:
        k = self.array
        return float(k.max() - k.min()) <= tol * max(1.0, float(np.abs(k).max()))

    def default_tol(self, degree: int | None = None) -> float:
        """Absolute tolerance ``1e-9 * (1 + max|kappa|)**degree`` (degree defaults to n)."""
        degree = self.n if degree is None else degree
        return 1e-9 * (1.0 + float(np.abs(self.array).max())) ** degree


def _as_curvatures(kv) -> CurvatureVector:
    return kv if isinstance(kv, CurvatureVector) else CurvatureVector(kv)


def _esf_rows(values: np.ndarray) -> np.ndarray:
    # Coefficients of prod_j (t + x_j) for every row, one pass over the columns.
    rows, n = values.shape
    e = np.zeros((rows, n + 1))
    e[:, 0] = 1.0
    for j in range(n):
        e[:, 1 : j + 2] += values[:, j : j + 1] * e[:, : j + 1]
    return e


def symmetric_functions(kv) -> np.ndarray:
    """Return ``[S_0, ..., S_n]`` for the curvature vector."""
    kv = _as_curvatures(kv)
    return _esf_rows(kv.array[None, :])[0]


def elementary_symmetric(kv, r: int) -> float:
    """Evaluate ``sigma_r(kappa)``; 1 for ``r = 0`` and 0 for ``r > n``."""
    kv = _as_curvatures(kv)
    if int(r) != r or r < 0:
        raise InvalidInput(f"order must be a nonnegative integer, got {r!r}")
    r = int(r)
    if r > kv.n:
        return 0.0
    return float(symmetric_functions(kv)[r])


def newton_spectra(kv) -> np.ndarray:
    """Remove-one symmetric sums: entry ``(r, i)`` is ``S_r(A_i)`` for r in 0..n-1.

    Setting ``kappa_i`` to zero leaves every symmetric function of the
    remaining entries unchanged, so all n deletions run as one batch.
    """
    kv = _as_curvatures(kv)
    n = kv.n
    deleted = np.tile(kv.array, (n, 1))
    np.fill_diagonal(deleted, 0.0)
    return _esf_rows(deleted)[:, :n].T.copy()


def newton_recurrence(kv, r: int) -> np.ndarray:
    """Eigenvalues of ``P_r`` from ``P_0 = I``, ``P_r = S_r I - A P_{r-1}``.

    Valid for any ``r >= 0``; at ``r = n`` the result is the zero vector
    up to rounding (Cayley-Hamilton).
    """
    kv = _as_curvatures(kv)
    if int(r) != r or r < 0:
        raise InvalidInput(f"order must be a nonnegative integer, got {r!r}")
    S = symmetric_functions(kv)
    k = kv.array
    row = np.ones(kv.n)
    for j in range(1, int(r) + 1):
        s_j = S[j] if j <= kv.n else 0.0
        row = s_j - k * row
    return row


@dataclass(frozen=True)
class SymmetricProfile:
    """Derived curvature scalars of one curvature vector.

    ``traces[r]`` holds ``(tr P_r, tr P_r A, tr P_r A^2)`` computed as
    weighted sums of the Newton spectrum, not from the closed forms.
    """

    curvatures: CurvatureVector
    S: np.ndarray
    H: np.ndarray
    newton: np.ndarray
    traces: np.ndarray
    tau: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.curvatures.n

    def s(self, r: int) -> float:
        """``S_r`` with the conventions ``S_r = 0`` for r > n or r < 0."""
        return float(self.S[r]) if 0 <= r <= self.n else 0.0

    def trace_closed_forms(self) -> np.ndarray:
        """The right-hand sides ``(n-r)S_r, (r+1)S_{r+1}, S_1 S_{r+1} - (r+2)S_{r+2}``."""
        n = self.n
        out = np.empty((n, 3))
        for r in range(n):
            out[r] = (
                (n - r) * self.s(r),
                (r + 1) * self.s(r + 1),
                self.s(1) * self.s(r + 1) - (r + 2) * self.s(r + 2),
            )
        return out

    def trace_residuals(self) -> np.ndarray:
        """Relative residuals of the three trace identities, shape ``(n, 3)``."""
        closed = self.trace_closed_forms()
        k = np.abs(self.curvatures.array)
        # scale by the sum of absolute contributions so cancellation is not penalized
        contrib = np.abs(self.newton) @ np.stack([np.ones_like(k), k, k * k], axis=1)
        return np.abs(self.traces - closed) / np.maximum(1.0, contrib)


@functools.lru_cache(maxsize=None)
def _binomials(n: int) -> np.ndarray:
    return np.array([math.comb(n, r) for r in range(n + 1)], dtype=float)


def batch_spectra(values) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric functions ``(B, n+1)`` and Newton spectra ``(B, n, n)`` of B curvature rows.

    ``newton[b, r, i]`` is ``S_r(A_i)`` of row b, exactly as in :func:`newton_spectra`.
    """
    values = np.asarray(values, dtype=float)
    B, n = values.shape
    # slot 0 holds the full vector, slots 1..n the remove-one vectors
    rows = np.repeat(values[:, None, :], n + 1, axis=1)
    i = np.arange(n)
    rows[:, i + 1, i] = 0.0
    e = _esf_rows(rows.reshape(-1, n)).reshape(B, n + 1, n + 1)
    return e[:, 0, :], e[:, 1:, :n].transpose(0, 2, 1)


def profile(kv) -> SymmetricProfile:
    kv = _as_curvatures(kv)
    n = kv.n
    k = kv.array
    S, newton = batch_spectra(k[None, :])
    S, newton = S[0], newton[0]
    traces = newton @ np.array([np.ones(n), k, k * k]).T
    j = np.arange(n)
    tau = (j + 1) ** 2 * S[1:] ** 2 - (n - j) * S[:n] * traces[:, 2]
    return SymmetricProfile(kv, S, S / _binomials(n), newton, traces, tau)


def umbilicity_coefficient(kv, k: int) -> float:
    """``tau_k = (k+1)^2 S_{k+1}^2 - (n-k) S_k tr(P_k A^2)``."""
    kv = _as_curvatures(kv)
    if int(k) != k or not 0 <= k <= kv.n - 1:
        raise InvalidInput(f"order k must lie in 0..{kv.n - 1}, got {k!r}")
    return float(profile(kv).tau[int(k)])


@dataclass(frozen=True)
class MaclaurinEntry:
    ident: str
    lhs: float
    rhs: float
    margin: float
    equality: bool


@dataclass(frozen=True)
class MaclaurinReport:
    applicable: bool
    entries: tuple[MaclaurinEntry, ...] = ()
    reason: str = ""

    def margins(self) -> np.ndarray:
        return np.array([e.margin for e in self.entries])

    def all_equalities(self) -> bool:
        return self.applicable and all(e.equality for e in self.entries)


def maclaurin_report(kv, rel_tol: float = 1e-12) -> MaclaurinReport:
    """Margins (``larger - smaller``) of the Newton-Maclaurin inequalities.

    Three families: ``H_{r-1}H_{r+1} <= H_r^2`` (id ``newton[r]``), the chain
    ``H_r^{1/r} >= H_{r+1}^{1/(r+1)}`` (id ``chain[r]``) and
    ``H_1 H_{r+1} >= H_{r+2}`` (id ``product[r]``). Only meaningful for
    nonnegative curvatures; otherwise a non-applicable report is returned.
    """
    kv = _as_curvatures(kv)
    if min(kv.kappa) < 0:
        return MaclaurinReport(False, (), "negative principal curvature")
    n = kv.n
    H = profile(kv).H
    entries = []

    def add(ident, smaller, larger):
        margin = float(larger - smaller)
        scale = max(1.0, abs(smaller), abs(larger))
        entries.append(MaclaurinEntry(ident, float(smaller), float(larger), margin,
                                      abs(margin) <= rel_tol * scale))

    for r in range(1, n):
        add(f"newton[{r}]", H[r - 1] * H[r + 1], H[r] ** 2)
    for r in range(1, n):
        add(f"chain[{r}]", H[r + 1] ** (1.0 / (r + 1)), H[r] ** (1.0 / r))
    for r in range(0, n - 1):
        add(f"product[{r}]", H[r + 2], H[1] * H[r + 1])
    return MaclaurinReport(True, tuple(entries))


class Definiteness(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    INDEFINITE = "Indefinite"

    def __str__(self):
        return self.value


def positivity_check(kv, r: int, tol: float | None = None) -> Definiteness:
    """Sign pattern of the eigenvalues of ``P_r``; ties at ``|x| <= tol`` are Indefinite.

    ``kv`` may also be a :class:`SymmetricProfile`, whose Newton spectrum is reused.
    """
    prof = kv if isinstance(kv, SymmetricProfile) else None
    kv = prof.curvatures if prof is not None else _as_curvatures(kv)
    if int(r) != r or not 0 <= r <= kv.n - 1:
        raise InvalidInput(f"order r must lie in 0..{kv.n - 1}, got {r!r}")
    row = (prof.newton if prof is not None else newton_spectra(kv))[int(r)]
    if tol is None:
        tol = kv.default_tol(int(r))
    return definiteness(row, tol)


def definiteness(eigenvalues, tol: float) -> Definiteness:
    """Classify a list of eigenvalues; anything within ``tol`` of zero makes it Indefinite."""
    row = np.asarray(eigenvalues)
    if np.all(row > tol):
        return Definiteness.POSITIVE_DEFINITE
    if np.all(row < -tol):
        return Definiteness.NEGATIVE_DEFINITE
    return Definiteness.INDEFINITE
