"""Space forms of constant curvature ``c`` and their rotationally symmetric models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .symfunc import CurvatureVector, SymmetricProfile, profile

# |c| rho^2 below this switches sn/cn to their Taylor series.
SERIES_THRESHOLD = 1e-8


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space form with sectional curvature ``c``.

    ``sn`` and ``cn`` solve ``y'' + c y = 0`` with ``sn(0)=0, sn'(0)=1`` and
    ``cn(0)=1, cn'(0)=0``.
    """

    c: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise InvalidInput(f"curvature must be finite, got {self.c}")

    @property
    def R_c(self) -> float:
        """Largest admissible radial coordinate (``pi/sqrt(c)`` or infinity)."""
        return math.pi / math.sqrt(self.c) if self.c > 0 else math.inf

    def _check(self, rho, closed: bool = False):
        bound = self.R_c
        if np.ndim(rho) == 0:
            rho = float(rho)
            if not (math.isfinite(rho) and rho >= 0):
                raise InvalidInput("radial coordinate must be finite and nonnegative")
            if rho > bound or (not closed and rho >= bound):
                raise InvalidInput(f"radial coordinate must be below R_c = {bound}")
            return rho
        rho = np.asarray(rho, dtype=float)
        if np.any(~np.isfinite(rho)) or np.any(rho < 0):
            raise InvalidInput("radial coordinate must be finite and nonnegative")
        if np.any(rho > bound) or (not closed and np.any(rho >= bound)):
            raise InvalidInput(f"radial coordinate must be below R_c = {bound}")
        return rho

    def sn(self, rho, *, closed: bool = False):
        rho = self._check(rho, closed)
        c = self.c
        x = c * rho * rho
        series = rho * (1 - x / 6 * (1 - x / 20 * (1 - x / 42 * (1 - x / 72))))
        if isinstance(rho, float):
            if abs(x) < SERIES_THRESHOLD:
                return series
            if c > 0:
                return math.sin(math.sqrt(c) * rho) / math.sqrt(c)
            return math.sinh(math.sqrt(-c) * rho) / math.sqrt(-c)
        if c > 0:
            exact = np.sin(math.sqrt(c) * rho) / math.sqrt(c)
        elif c < 0:
            exact = np.sinh(math.sqrt(-c) * rho) / math.sqrt(-c)
        else:
            exact = rho
        return np.where(np.abs(x) < SERIES_THRESHOLD, series, exact)

    def cn(self, rho, *, closed: bool = False):
        rho = self._check(rho, closed)
        c = self.c
        x = c * rho * rho
        series = 1 - x / 2 * (1 - x / 12 * (1 - x / 30 * (1 - x / 56)))
        if isinstance(rho, float):
            if abs(x) < SERIES_THRESHOLD:
                return series
            return math.cos(math.sqrt(c) * rho) if c > 0 else math.cosh(math.sqrt(-c) * rho)
        if c > 0:
            exact = np.cos(math.sqrt(c) * rho)
        elif c < 0:
            exact = np.cosh(math.sqrt(-c) * rho)
        else:
            exact = np.ones_like(rho)
        return np.where(np.abs(x) < SERIES_THRESHOLD, series, exact)

    def cot(self, rho):
        """``cn/sn``, the principal curvature of the geodesic sphere of radius rho."""
        return self.cn(rho) / self.sn(rho)

    def check_radius(self, R: float, what: str = "radius") -> float:
        R = float(R)
        if not (0 < R < self.R_c):
            raise InvalidInput(f"{what} must lie in (0, {self.R_c}), got {R}")
        return R


@dataclass(frozen=True)
class ModelHypersurface:
    """A homogeneous model hypersurface (sphere, cylinder over a model, umbilic cap)."""

    kind: str
    curvatures: CurvatureVector
    params: Mapping[str, Any] = field(default_factory=dict)
    base: "ModelHypersurface | None" = None

    @cached_property
    def profile(self) -> SymmetricProfile:
        return profile(self.curvatures)

    @property
    def n(self) -> int:
        return self.curvatures.n


def sphere_profile(m: int, sf: SpaceForm, R: float) -> ModelHypersurface:
    """Geodesic sphere of radius ``R`` in ``M^m(c)``: m-1 curvatures ``cn(R)/sn(R)``."""
    if int(m) != m or m < 2:
        raise InvalidInput(f"ambient dimension must be an integer >= 2, got {m!r}")
    R = sf.check_radius(R)
    k = sf.cot(R)
    return ModelHypersurface(
        "sphere",
        CurvatureVector.umbilic(int(m) - 1, k),
        {"m": int(m), "c": sf.c, "R": R, "sn": sf.sn(R), "cn": sf.cn(R)},
    )


def cylinder_profile(base: ModelHypersurface, l: float) -> ModelHypersurface:
    """Product of ``base`` with an interval of length ``l``; the axis adds a zero curvature.

    Checks ``S_{r+1}(cylinder) = S_{r+1}(base)``,
    ``H_{r+1}(cylinder) = ((n-r-1)/n) H_{r+1}(base)`` and that the axial
    Newton eigenvalue equals ``S_r(base)`` before returning.
    """
    l = float(l)
    if not (l > 0 and math.isfinite(l)):
        raise InvalidInput(f"height must be positive, got {l}")
    kv = CurvatureVector(base.curvatures.kappa + (0.0,))
    cyl = ModelHypersurface("cylinder", kv, {"l": l}, base)
    err = cylinder_residuals(base.profile.S[None, :], cyl.profile.S[None, :],
                             cyl.profile.newton[None, :, -1])
    scale = 1e-12 * (1.0 + float(np.abs(base.curvatures.array).max())) ** base.n
    if err[0] > scale:
        raise NumericalFailure("cylinder curvature data inconsistent with its base",
                               {"residual": float(err[0]), "S": cyl.profile.S,
                                "S0": base.profile.S})
    return cyl


def cylinder_residuals(S0: np.ndarray, S: np.ndarray, axial: np.ndarray) -> np.ndarray:
    """Largest violation, per batch row, of the cylinder-over-base identities.

    ``S0`` is ``(B, m+1)`` for the base, ``S`` is ``(B, m+2)`` and ``axial``
    ``(B, m+1)`` the Newton eigenvalues along the axis. Checks
    ``S_j = S0_j``, ``S_{m+1} = 0``, ``axial_r = S0_r`` and
    ``H_{r+1} = ((n-r-1)/n) H0_{r+1}`` with ``n = m + 1``.
    """
    m = S0.shape[1] - 1
    n = m + 1
    err = np.abs(S[:, : m + 1] - S0).max(axis=1)
    err = np.maximum(err, np.abs(S[:, -1]))
    err = np.maximum(err, np.abs(axial - S0).max(axis=1))
    j = np.arange(1, m + 1)
    binom_n = np.array([math.comb(n, int(q)) for q in j], dtype=float)
    binom_m = np.array([math.comb(m, int(q)) for q in j], dtype=float)
    H, H0 = S[:, 1 : m + 1] / binom_n, S0[:, 1:] / binom_m
    return np.maximum(err, np.abs(H - (n - j) / n * H0).max(axis=1))


def robin_coefficient(kappa_support: float, kappa_hyp: float, theta: float) -> float:
    """Umbilicity factor ``csc(theta) k_support - cot(theta) k_hyp`` of the boundary.

    For a geodesic cap of geodesic radius rho0 this is the coefficient ``beta``
    of the Robin condition ``f'(rho0) = beta f(rho0)``.
    """
    theta = float(theta)
    if not (0 < theta < math.pi):
        raise InvalidInput(f"contact angle must lie in (0, pi), got {theta}")
    return kappa_support / math.sin(theta) - kappa_hyp * math.cos(theta) / math.sin(theta)


def umbilic_cap(n: int, kappa: float, kappa_support: float, theta: float) -> ModelHypersurface:
    """Totally umbilical cap with umbilicity factor ``kappa`` meeting its support at ``theta``."""
    beta = robin_coefficient(kappa_support, kappa, theta)
    return ModelHypersurface(
        "cap",
        CurvatureVector.umbilic(n, kappa),
        {"kappa": float(kappa), "kappa_support": float(kappa_support), "theta": float(theta),
         "robin": beta},
    )
