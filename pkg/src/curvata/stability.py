"""Stability verdicts for model hypersurfaces in space forms.

In a space form every Newton transformation is divergence free, so the
symmetrized potential coincides with ``q_r = tr(P_r A^2) + c (n - r) S_r``
and only ambients of constant curvature are accepted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import InsufficientInput, InvalidInput, NumericalFailure
from .spaceform import SpaceForm, cylinder_residuals, robin_coefficient
from .spectral import (RadialFunction, SturmLiouvilleProblem, discretize,
                       harmonic_multiplicity, resolvent_minus_one, sphere_area,
                       sturm_count, tube_mode_eigenvalue)
from .symfunc import CurvatureVector, Definiteness, batch_spectra, definiteness, profile


class Label(enum.Enum):
    STRONGLY_STABLE = "StronglyStable"
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class StabilityVerdict:
    label: Label
    margin: float
    witness: str
    witness_value: float | None = None
    case: str | None = None


def _kv(kv) -> CurvatureVector:
    return kv if isinstance(kv, CurvatureVector) else CurvatureVector(kv)


def stability_potential(kv, r: int, c: float) -> float:
    """``q_r = S_1 S_{r+1} - (r+2) S_{r+2} + c (n - r) S_r``, traces taken from the profile."""
    kv = _kv(kv)
    if int(r) != r or not 0 <= r <= kv.n - 1:
        raise InvalidInput(f"r must lie in 0..{kv.n - 1}, got {r!r}")
    prof = profile(kv)
    r = int(r)
    return float(prof.traces[r, 2] + c * (kv.n - r) * prof.S[r])


def _umbilic_factor(kv: CurvatureVector, r: int) -> float:
    if not kv.is_umbilic():
        raise InvalidInput("index forms are only available for umbilic models")
    return float(profile(kv).newton[r, 0])


def index_form_value(kv, c: float, f, alpha: float = 0.0, r: int = 0, l: int = 0) -> float:
    """Index form ``I_{r,theta}(f, f)`` on an umbilic model.

    ``kv`` are the principal curvatures and ``c`` the ambient curvature; the
    model is intrinsically a space form of curvature ``kappa^2 + c``.

    If ``f`` is a :class:`RadialFunction`, the model is the geodesic ball of
    radius ``f.grid[-1]`` and ``f`` is a radial profile times an L2-normalized
    harmonic of degree ``l``. The boundary term is ``+alpha f(rho0)^2``, i.e.
    the Robin condition ``df/dnu + alpha f = 0``.

    If ``f`` is a mapping ``{degree: coefficient}``, the model is the closed
    round sphere and ``f`` is expanded in orthonormal harmonics.
    """
    kv = _kv(kv)
    if int(r) != r or not 0 <= r <= kv.n - 1:
        raise InvalidInput(f"r must lie in 0..{kv.n - 1}, got {r!r}")
    r = int(r)
    p = _umbilic_factor(kv, r)
    q = stability_potential(kv, r, c)
    dim = kv.n
    K = kv.kappa[0] ** 2 + c
    if isinstance(f, Mapping):
        if K <= 0:
            raise InvalidInput("closed sphere models need positive intrinsic curvature")
        total = 0.0
        for j, a in f.items():
            if int(j) != j or j < 0:
                raise InvalidInput(f"harmonic degree must be nonnegative, got {j!r}")
            total += a * a * (p * j * (j + dim - 1) * K - q)
        return total
    if not isinstance(f, RadialFunction):
        raise InvalidInput("f must be a RadialFunction or a mapping of harmonic coefficients")
    if dim < 2:
        raise InvalidInput("ball models need dimension >= 2")
    N = f.grid.size
    rho0 = float(f.grid[-1])
    disc = discretize(SturmLiouvilleProblem(dim, K, l, rho0, "robin", -alpha, shift=0.0), N)
    if np.max(np.abs(disc.grid - f.grid)) > 1e-9 * rho0:
        raise InvalidInput("function grid does not match the model's radial grid")
    return disc.quadratic_form(f.values, potential_scale=p, shift=q)


def _check_tube(n, r, R, l, c):
    if int(n) != n or n < 2:
        raise InvalidInput(f"n must be an integer >= 2, got {n!r}")
    if int(r) != r or not 0 <= r <= n - 2:
        raise InvalidInput(f"r must lie in 0..{n - 2}, got {r!r}")
    sf = SpaceForm(c)
    sf.check_radius(R)
    if not (l > 0 and math.isfinite(l)):
        raise InvalidInput(f"height must be positive, got {l}")
    return sf


@dataclass(frozen=True)
class TubeSpec:
    """Tube ``dB_R x [0, l]`` inside ``M^n(c) x [0, l]``."""

    n: int
    r: int
    R: float
    l: float
    c: float = 0.0

    def __post_init__(self):
        _check_tube(self.n, self.r, self.R, self.l, self.c)


def tube_verdict(t: TubeSpec, tol: float = 1e-9) -> StabilityVerdict:
    """Symmetric r-stability of a free-boundary tube.

    Stable iff ``pi sn_c(R) >= l sqrt(n - r - 1)``, cross-checked against the
    sign of the lowest mean-zero mode ``(j, m) = (0, 1)``.
    """
    return tube_verdicts([t], tol)[0]


def tube_verdicts(specs: Sequence[TubeSpec], tol: float = 1e-9) -> list[StabilityVerdict]:
    """:func:`tube_verdict` for many tubes; cylinder profiles are built in one batch per n."""
    specs = list(specs)
    out: list = [None] * len(specs)
    groups: dict[int, list[int]] = {}
    for i, t in enumerate(specs):
        if not isinstance(t, TubeSpec):
            raise InvalidInput(f"expected a TubeSpec, got {t!r}")
        groups.setdefault(t.n, []).append(i)
    for n, idx in groups.items():
        forms = [SpaceForm(specs[i].c) for i in idx]
        sn = np.array([sf.sn(specs[i].R) for sf, i in zip(forms, idx)])
        cn = np.array([sf.cn(specs[i].R) for sf, i in zip(forms, idx)])
        k = cn / sn
        base = np.repeat(k[:, None], n - 1, axis=1)
        S0, _ = batch_spectra(base)
        S, newton = batch_spectra(np.concatenate([base, np.zeros((len(idx), 1))], axis=1))
        err = cylinder_residuals(S0, S, newton[:, :, -1])
        scale = 1e-12 * (1.0 + np.abs(k)) ** (n - 1)
        if np.any(err > scale):
            bad = int(np.argmax(err / scale))
            raise NumericalFailure("cylinder curvature data inconsistent with its base",
                                   {"spec": specs[idx[bad]], "residual": float(err[bad])})
        for j, i in enumerate(idx):
            t = specs[i]
            ptol = 1e-9 * (1.0 + abs(k[j])) ** t.r
            out[i] = _tube_decision(t, forms[j], float(sn[j]), newton[j, t.r], ptol, tol)
    return out


def _tube_decision(t, sf, sn, newton_row, ptol, tol) -> StabilityVerdict:
    if definiteness(newton_row, ptol) is not Definiteness.POSITIVE_DEFINITE:
        return StabilityVerdict(Label.INCONCLUSIVE, math.nan,
                                f"P_{t.r} of the tube is not positive definite", None, None)
    margin = math.pi * sn - t.l * math.sqrt(t.n - t.r - 1)
    eig = tube_mode_eigenvalue(t.n, t.r, sf, t.R, t.l, 0, 1)
    criterion_stable = margin >= 0
    if abs(margin) > tol and (eig >= 0) != criterion_stable:
        return StabilityVerdict(Label.INCONCLUSIVE, margin,
                                "threshold test and mode (0,1) eigenvalue disagree", eig)
    label = Label.STABLE if criterion_stable else Label.UNSTABLE
    return StabilityVerdict(label, margin, "mode (j,m)=(0,1)", eig)


@dataclass(frozen=True)
class Resolvent:
    """Solution data of ``T f = -1`` used by the Koiso-type criterion."""

    exists: bool
    integral: float
    in_e2_perp: bool = False


def koiso_classify(lambda1: float, lambda2: float, resolvent: Resolvent | None = None,
                   e2_means: Sequence[float] | None = None, tol: float | None = None,
                   mean_tol: float = 1e-10) -> StabilityVerdict:
    """Classify from the two lowest eigenvalues and the mean of the resolvent solution.

    Zero comparisons use ``tol`` (default ``max(1e-7, 1e-6 |lambda1|)``).
    Raises :class:`InsufficientInput` if the deciding branch lacks its data.
    """
    if lambda1 > lambda2:
        raise InvalidInput(f"need lambda1 <= lambda2, got {lambda1} > {lambda2}")
    if tol is None:
        tol = max(1e-7, 1e-6 * abs(lambda1))
    if lambda1 >= -tol:
        return StabilityVerdict(Label.STRONGLY_STABLE, lambda1, "lambda1 >= 0", lambda1, "i")
    if lambda2 < -tol:
        return StabilityVerdict(Label.UNSTABLE, lambda2, "lambda2 < 0", lambda2, "v")
    if lambda2 > tol:
        if resolvent is None or not resolvent.exists:
            raise InsufficientInput("case (ii) needs the solution of T f = -1")
        return _resolvent_verdict(resolvent, "ii")
    if e2_means is None:
        raise InsufficientInput("lambda2 = 0 needs the means of its eigenfunctions")
    worst = max((abs(m) for m in e2_means), default=0.0)
    if worst > mean_tol:
        return StabilityVerdict(Label.UNSTABLE, -worst,
                                "E_lambda2 element with nonzero mean", lambda1, "iii")
    if resolvent is None or not resolvent.exists or not resolvent.in_e2_perp:
        raise InsufficientInput("case (iv) needs the solution of T f = -1 orthogonal to E_lambda2")
    return _resolvent_verdict(resolvent, "iv")


def _resolvent_verdict(res: Resolvent, case: str) -> StabilityVerdict:
    if res.integral >= 0:
        return StabilityVerdict(Label.STABLE, res.integral, "integral of f >= 0",
                                res.integral, case)
    return StabilityVerdict(Label.UNSTABLE, res.integral, "integral of f < 0",
                            res.integral, case)


@dataclass(frozen=True)
class CapSpec:
    """Geodesic cap, intrinsically the ball ``B_rho0`` of ``M^n(c)``.

    The boundary coefficient ``beta`` of ``f'(rho0) = beta f(rho0)`` defaults
    to ``robin_coefficient(cn/sn(rho0), 0, theta)``, which is ``cn/sn(rho0)``
    for the free-boundary angle; ``robin`` overrides it.
    """

    n: int
    c: float
    rho0: float
    theta: float = math.pi / 2
    robin: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInput(f"n must be an integer >= 2, got {self.n!r}")
        SpaceForm(self.c).check_radius(self.rho0, "rho0")
        if not (0 < self.theta < math.pi):
            raise InvalidInput(f"contact angle must lie in (0, pi), got {self.theta}")

    @property
    def beta(self) -> float:
        if self.robin is not None:
            return float(self.robin)
        return robin_coefficient(SpaceForm(self.c).cot(self.rho0), 0.0, self.theta)


class Subspace(enum.Enum):
    FULL = "Full"
    MEAN_ZERO = "MeanZero"


@dataclass(frozen=True)
class CapIndex:
    index: int
    lambda1: float
    lambda2: float
    lambda2_multiplicity: int
    resolvent_integral: float
    zero_tol: float
    counts: dict = field(default_factory=dict)
    resolvent_integral_closed: float | None = None
    lambda2_modes: tuple = ()
    lambda2_means: tuple = ()
    table: tuple = ()


def cap_zero_tolerance(rho0: float, N: int) -> float:
    """Discretization-aware zero threshold ``max(1e-7, 100 / (N rho0)^2)``."""
    return max(1e-7, 100.0 / (N * min(rho0, 1.0)) ** 2)


def cap_morse_index(cs: CapSpec, subspace: Subspace = Subspace.FULL, N: int = 2048,
                    l_max: int = 3, r: int = 0, kappa: float = 1.0,
                    zero_tol: float | None = None, count: int = 2) -> CapIndex:
    """Morse index of the r-index form of an umbilic cap.

    The cap has umbilicity factor ``kappa`` and sits in the ambient of
    curvature ``cs.c - kappa^2``; for r > 0 the form is assembled from the
    Newton eigenvalue and ``q_r`` of that geometry. Negative eigenvalues
    below ``-zero_tol`` are counted per angular mode with harmonic
    multiplicity. ``MeanZero`` restricts the radial (l = 0) block to
    functions of zero mean; higher harmonics already have zero mean.
    The lowest ``count`` radial eigenvalues of every mode are kept in ``table``
    as ``(l, k, eigenvalue, multiplicity)`` rows.
    """
    if int(count) != count or count < 2:
        raise InvalidInput(f"count must be an integer >= 2, got {count!r}")
    subspace = Subspace(subspace)
    if int(l_max) != l_max or l_max < 2:
        raise InvalidInput(f"l_max must be an integer >= 2, got {l_max!r}")
    n = cs.n
    if int(r) != r or not 0 <= r <= n - 1:
        raise InvalidInput(f"r must lie in 0..{n - 1}, got {r!r}")
    if r > 0 and kappa <= 0:
        raise InvalidInput("r > 0 needs a positive umbilicity factor")
    kv = CurvatureVector.umbilic(n, kappa)
    c_amb = cs.c - kappa * kappa
    p = _umbilic_factor(kv, r)
    q = stability_potential(kv, r, c_amb)
    if zero_tol is None:
        zero_tol = cap_zero_tolerance(cs.rho0, N) * p

    counts, lowest = {}, []
    index = 0
    resolvent_integral = math.nan
    for l in range(int(l_max) + 1):
        prob = SturmLiouvilleProblem(n, cs.c, l, cs.rho0, "robin", cs.beta)
        disc = discretize(prob, N)
        diag, off = disc.symmetric(potential_scale=p, shift=q)
        low = scipy.linalg.eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                                            select_range=(0, int(count) - 1),
                                            lapack_driver="stebz")
        lowest.append((l, low))
        mult = harmonic_multiplicity(n, l)
        neg = sturm_count(diag, off, -zero_tol)
        if l == 0:
            radial = (disc, diag, off)
            # T g = -1 has no solution when 0 is a radial eigenvalue
            if sturm_count(diag, off, zero_tol) == neg:
                sol = _radial_resolvent(disc, p, q)
                resolvent_integral = sphere_area(n - 1) * float(np.sum(disc.masses * sol))
            if subspace is Subspace.MEAN_ZERO:
                neg = _constrained_count(diag, off, disc.sqrt_masses(), zero_tol)
        counts[l] = neg
        index += neg * mult
    if lowest[-1][1][0] < -zero_tol:
        raise InvalidInput(f"l_max = {l_max} is too small: mode {l_max} is still negative")

    groups = []
    for value, mult, mode in sorted((float(v), harmonic_multiplicity(n, l), (l, k + 1))
                                    for l, low in lowest for k, v in enumerate(low)):
        if groups and abs(value - groups[-1][0]) <= zero_tol:
            groups[-1][1] += mult
            groups[-1][2].append(mode)
        else:
            groups.append([value, mult, [mode]])
    lam1 = groups[0][0]
    lam2, mult2, modes2 = groups[1]
    # harmonics of degree l >= 1 integrate to zero; radial members need their mean
    means = []
    for l, k in modes2:
        if l == 0:
            disc, diag, off = radial
            _, vec = scipy.linalg.eigh_tridiagonal(diag, off, select="i",
                                                   select_range=(k - 1, k - 1),
                                                   lapack_driver="stebz")
            f = vec[:, 0] / disc.sqrt_masses()
            means.append(float(np.sum(disc.masses[disc.unknowns] * f)))
        else:
            means.append(0.0)
    closed = None
    if abs(cs.beta - SpaceForm(cs.c).cot(cs.rho0)) < 1e-14 * max(1.0, abs(cs.beta)):
        # -f of the closed-form profile solves T g = -1 for r = 0; scale by 1/p for r > 0
        closed = -resolvent_minus_one(n, SpaceForm(cs.c), cs.rho0, N).integral / p
    table = tuple((l, k + 1, float(v), harmonic_multiplicity(n, l))
                  for l, low in lowest for k, v in enumerate(low))
    return CapIndex(index, lam1, lam2, mult2, resolvent_integral, zero_tol, counts, closed,
                    tuple(modes2), tuple(means), table)


def cap_verdict(idx: CapIndex, mean_tol: float = 1e-8) -> StabilityVerdict:
    """Koiso-type verdict from a :class:`CapIndex`.

    The radial resolvent is orthogonal to every non-radial mode, so it lies
    in ``E_lambda2^perp`` whenever ``lambda2`` has no radial member.
    """
    radial_in_e2 = any(l == 0 for l, _ in idx.lambda2_modes)
    res = Resolvent(math.isfinite(idx.resolvent_integral), idx.resolvent_integral,
                    in_e2_perp=not radial_in_e2)
    return koiso_classify(idx.lambda1, idx.lambda2, res, idx.lambda2_means,
                          tol=idx.zero_tol, mean_tol=mean_tol)


def _radial_resolvent(disc, p, q) -> np.ndarray:
    # Solve K g = -M 1 on the radial block, i.e. T g = -1 in the weak sense.
    diag, off = disc.operator(potential_scale=p, shift=q)
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return scipy.linalg.solve_banded((1, 1), ab, -disc.masses[disc.unknowns])


def _constrained_count(diag, off, w, zero_tol) -> int:
    """Eigenvalues below ``-zero_tol`` of the tridiagonal form restricted to ``w``-perp.

    Inertia of the bordered matrix ``[[A + tol, w], [w^T, 0]]`` equals that of
    the restricted form plus one positive and one negative direction; the
    Schur complement ``-w^T (A + tol)^{-1} w`` supplies the border's share.
    """
    d = diag + zero_tol
    ab = np.zeros((3, d.size))
    ab[0, 1:] = off
    ab[1] = d
    ab[2, :-1] = off
    z = scipy.linalg.solve_banded((1, 1), ab, w)
    schur = -float(w @ z)
    return sturm_count(diag, off, -zero_tol) + (1 if schur < 0 else 0) - 1
