"""Radial Sturm-Liouville eigensolvers on geodesic balls and closed-form spectra.

The radial operator for angular mode ``l`` on ``B_rho0`` inside ``M^n(c)`` is

    -(w f')'/w + (l(l+n-2)/sn^2 - shift) f,     w = sn^(n-1),

discretized by finite volumes on the staggered grid ``rho_i = (i - 1/2) h``,
``i = 1..N``, with ``h = rho0/(N - 1/2)`` so that the last node sits on the
boundary and owns a half cell. Cell volumes are integrated exactly (Gauss-Legendre
per cell); face fluxes use centred differences. The pole needs no special
row: the flux through ``rho = 0`` vanishes with the weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NumericalFailure
from .spaceform import SpaceForm

MIN_GRID = 64
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


def merge_tolerance(value: float) -> float:
    return max(1e-7, 1e-6 * abs(value))


def sphere_area(dim: int) -> float:
    """Area of the unit sphere ``S^dim``."""
    return 2.0 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)


def harmonic_multiplicity(n: int, l: int) -> int:
    """Dimension of degree-``l`` spherical harmonics on ``S^(n-1)``."""
    if n < 2 or l < 0:
        raise InvalidInput(f"need n >= 2 and l >= 0, got n={n}, l={l}")
    if n == 2:
        return 1 if l == 0 else 2
    return math.comb(l + n - 1, n - 1) - (math.comb(l + n - 3, n - 1) if l >= 2 else 0)


@dataclass(frozen=True)
class RadialFunction:
    """Samples of a radial profile on a uniform grid in ``(0, rho0]``."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise InvalidInput("grid and values must be matching 1-D arrays")
        steps = np.diff(grid)
        if np.any(steps <= 0) or grid[0] <= 0:
            raise InvalidInput("grid must be strictly increasing inside (0, rho0]")
        if np.ptp(steps) > 1e-9 * steps.mean():
            raise InvalidInput("grid spacing must be uniform")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])


def radial_grid(rho0: float, N: int) -> np.ndarray:
    h = rho0 / (N - 0.5)
    grid = (np.arange(1, N + 1) - 0.5) * h
    grid[-1] = rho0
    return grid


@dataclass(frozen=True)
class SturmLiouvilleProblem:
    """Radial eigenproblem of angular mode ``l`` on ``(0, rho0]`` in ``M^n(c)``.

    ``bc`` is ``"robin"`` (``f'(rho0) = beta f(rho0)``) or ``"dirichlet"``.
    ``shift`` defaults to ``n c``, the constant subtracted from the potential.
    """

    n: int
    c: float
    l: int
    rho0: float
    bc: str = "robin"
    beta: float = 0.0
    shift: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInput(f"dimension n must be an integer >= 2, got {self.n!r}")
        if int(self.l) != self.l or self.l < 0:
            raise InvalidInput(f"angular mode must be a nonnegative integer, got {self.l!r}")
        SpaceForm(self.c).check_radius(self.rho0, "rho0")
        if self.bc not in ("robin", "dirichlet"):
            raise InvalidInput(f"unknown boundary condition {self.bc!r}")
        if not math.isfinite(self.beta):
            raise InvalidInput("Robin coefficient must be finite")
        if self.shift is None:
            object.__setattr__(self, "shift", self.n * self.c)

    @classmethod
    def ball_robin(cls, n: int, c: float, rho0: float, l: int) -> "SturmLiouvilleProblem":
        """Mode ``l`` of ``-Delta - nc`` with ``f' = (cn/sn)(rho0) f`` on the boundary."""
        return cls(n, c, l, rho0, "robin", SpaceForm(c).cot(rho0))

    @property
    def space(self) -> SpaceForm:
        return SpaceForm(self.c)

    @property
    def regularity(self) -> str:
        return "even" if self.l == 0 else "vanishing"


@dataclass(frozen=True)
class RadialDiscretization:
    """Finite-volume pieces of one radial problem; all operators act on full-grid samples.

    The discrete quadratic form is
    ``sum w_face (df/h)^2 + sum m_i V_i f_i^2 - w(rho0) beta f_N^2``
    and the mass form is ``sum m_i f_i^2``.
    """

    problem: SturmLiouvilleProblem
    grid: np.ndarray
    h: float
    masses: np.ndarray
    face_weights: np.ndarray
    centrifugal: np.ndarray
    boundary_weight: float

    @property
    def N(self) -> int:
        return self.grid.size

    @property
    def unknowns(self) -> slice:
        return slice(0, self.N - 1) if self.problem.bc == "dirichlet" else slice(0, self.N)

    def gradient_tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.face_weights / self.h
        diag = np.zeros(self.N)
        diag[:-1] += g
        diag[1:] += g
        return diag, -g

    def operator(self, potential_scale=1.0, shift=None, boundary_coefficient=None):
        """Tridiagonal stiffness ``(diag, off)`` of the full Robin/Dirichlet form.

        ``potential_scale`` multiplies the gradient and centrifugal parts (the
        Newton eigenvalue of an umbilic model), ``shift`` replaces the constant
        potential and ``boundary_coefficient`` replaces ``beta``.
        """
        p = self.problem
        shift = p.shift if shift is None else shift
        beta = p.beta if boundary_coefficient is None else boundary_coefficient
        diag, off = self.gradient_tridiagonal()
        diag = potential_scale * (diag + self.centrifugal) - shift * self.masses
        off = potential_scale * off
        if p.bc == "robin":
            diag[-1] -= potential_scale * self.boundary_weight * beta
        u = self.unknowns
        return diag[u].copy(), off[: diag[u].size - 1].copy()

    def apply(self, values, **kw) -> np.ndarray:
        diag, off = self.operator(**kw)
        f = np.asarray(values, dtype=float)[self.unknowns]
        out = diag * f
        out[:-1] += off * f[1:]
        out[1:] += off * f[:-1]
        return out

    def quadratic_form(self, values, **kw) -> float:
        f = np.asarray(values, dtype=float)[self.unknowns]
        return float(f @ self.apply(values, **kw))

    def mass_norm2(self, values) -> float:
        f = np.asarray(values, dtype=float)
        return float(np.sum(self.masses * f * f))

    def symmetric(self, **kw) -> tuple[np.ndarray, np.ndarray]:
        """``M^(-1/2) K M^(-1/2)`` as a symmetric tridiagonal ``(diag, off)``."""
        diag, off = self.operator(**kw)
        s = 1.0 / np.sqrt(self.masses[self.unknowns])
        return diag * s * s, off * s[:-1] * s[1:]

    def sqrt_masses(self) -> np.ndarray:
        return np.sqrt(self.masses[self.unknowns])


def _cell_integral(fun, lo, hi):
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    return (fun(pts) * _GAUSS_W).sum(axis=1) * half


def discretize(p: SturmLiouvilleProblem, N: int) -> RadialDiscretization:
    if int(N) != N or N < MIN_GRID:
        raise InvalidInput(f"grid size must be an integer >= {MIN_GRID}, got {N!r}")
    N = int(N)
    sf = p.space
    grid = radial_grid(p.rho0, N)
    h = p.rho0 / (N - 0.5)
    lo = np.arange(N) * h
    hi = np.minimum(np.arange(1, N + 1) * h, p.rho0)
    hi[-1] = p.rho0

    def weight(r):
        return np.asarray(sf.sn(r)) ** (p.n - 1)

    masses = _cell_integral(weight, lo, hi)
    faces = np.arange(1, N) * h
    face_weights = weight(faces)
    centrifugal = p.l * (p.l + p.n - 2) * masses / np.asarray(sf.sn(grid)) ** 2
    return RadialDiscretization(p, grid, h, masses, face_weights, centrifugal,
                                float(weight(p.rho0)))


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with multiplicities.

    ``modes[k]`` lists the ``(l, index)`` radial modes merged into eigenvalue
    ``k``. ``eigenfunctions`` is filled only by single-mode solves.
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    modes: tuple = ()
    eigenfunctions: tuple[RadialFunction, ...] | None = None
    table: tuple = field(default=(), repr=False)

    def __len__(self):
        return self.eigenvalues.size


def eigen_tridiagonal(diag, off, count, vectors=False):
    """Lowest ``count`` eigenpairs of a symmetric tridiagonal matrix by bisection."""
    count = min(int(count), diag.size)
    try:
        res = scipy.linalg.eigh_tridiagonal(
            diag, off, eigvals_only=not vectors, select="i",
            select_range=(0, count - 1), lapack_driver="stebz")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure("tridiagonal bisection failed", {"size": diag.size}) from exc
    if not vectors:
        return np.asarray(res), None
    vals, vecs = res
    scale = max(1.0, float(np.abs(diag).max()) + 2.0 * float(np.abs(off).max(initial=0.0)))
    r = diag[:, None] * vecs - vals[None, :] * vecs
    r[:-1] += off[:, None] * vecs[1:]
    r[1:] += off[:, None] * vecs[:-1]
    resid = np.linalg.norm(r, axis=0)
    if np.any(resid > 1e-9 * scale):
        raise NumericalFailure("eigenvector residual above tolerance",
                               {"residuals": resid, "scale": scale})
    return vals, vecs


def sturm_count(diag, off, x: float) -> int:
    """Number of eigenvalues strictly below ``x`` (Sylvester inertia of ``T - x I``)."""
    diag = np.asarray(diag, dtype=float)
    off2 = np.asarray(off, dtype=float) ** 2
    # pivot floor as in LAPACK's dstebz, keeps off2 / q finite
    pivmin = np.finfo(float).tiny * max(1.0, float(off2.max(initial=0.0)))
    count = 0
    q = diag[0] - x
    for i in range(diag.size):
        if i:
            q = diag[i] - x - off2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def radial_eigen(p: SturmLiouvilleProblem, count: int, N: int,
                 vectors: bool = True) -> Spectrum:
    if int(count) != count or count < 1:
        raise InvalidInput(f"count must be a positive integer, got {count!r}")
    disc = discretize(p, N)
    diag, off = disc.symmetric()
    vals, vecs = eigen_tridiagonal(diag, off, count, vectors)
    funcs = None
    if vectors:
        funcs = []
        s = disc.sqrt_masses()
        for k in range(vals.size):
            f = np.zeros(disc.N)
            f[disc.unknowns] = vecs[:, k] / s
            if f[0] < 0:
                f = -f
            funcs.append(RadialFunction(disc.grid, f))
        funcs = tuple(funcs)
    modes = tuple(((p.l, k),) for k in range(vals.size))
    return Spectrum(np.asarray(vals), np.ones(vals.size, dtype=int), modes, funcs)


def merge_eigenvalues(entries):
    """Group ``(value, multiplicity, label)`` triples closer than the merge tolerance."""
    entries = sorted(entries, key=lambda e: e[0])
    values, mults, labels = [], [], []
    for value, mult, label in entries:
        if values and abs(value - values[-1]) < merge_tolerance(values[-1]):
            mults[-1] += mult
            labels[-1] = labels[-1] + (label,)
        else:
            values.append(value)
            mults.append(mult)
            labels.append((label,))
    return np.array(values), np.array(mults, dtype=int), tuple(labels)


def ball_robin_spectrum(n: int, c: float, rho0: float, l_max: int, count: int,
                        N: int) -> Spectrum:
    """Spectrum of ``-Delta - nc`` on ``B_rho0`` with Robin coefficient ``cn/sn(rho0)``.

    Collects the lowest ``count`` radial eigenvalues of every angular mode
    ``l <= l_max`` and weights them by the spherical-harmonic multiplicity.
    """
    if int(l_max) != l_max or l_max < 2:
        raise InvalidInput(f"l_max must be an integer >= 2, got {l_max!r}")
    entries, table = [], []
    for l in range(int(l_max) + 1):
        spec = radial_eigen(SturmLiouvilleProblem.ball_robin(n, c, rho0, l), count, N,
                            vectors=False)
        mult = harmonic_multiplicity(n, l)
        for k, value in enumerate(spec.eigenvalues):
            entries.append((float(value), mult, (l, k + 1)))
            table.append((l, k + 1, float(value), mult))
    values, mults, labels = merge_eigenvalues(entries)
    return Spectrum(values, mults, labels, None, tuple(table))


def _check_sphere_args(n, r, sf, R):
    if int(n) != n or n < 2:
        raise InvalidInput(f"n must be an integer >= 2, got {n!r}")
    if int(r) != r or not 0 <= r <= n - 2:
        raise InvalidInput(f"r must lie in 0..{n - 2}, got {r!r}")
    return sf.check_radius(R)


def sphere_mode_eigenvalue(n: int, r: int, sf: SpaceForm, R: float, j: int) -> float:
    """Eigenvalue of the r-stability operator of ``dB_R`` in ``M^n(c)`` on harmonics of degree j."""
    R = _check_sphere_args(n, r, sf, R)
    if int(j) != j or j < 0:
        raise InvalidInput(f"harmonic degree must be a nonnegative integer, got {j!r}")
    sn, k = sf.sn(R), sf.cot(R)
    factor = (n - 1 - r) / (n - 1) * math.comb(n - 1, r) * k**r
    return factor * (j * (j + n - 2) / sn**2 - (n - 1) * (k * k + sf.c))


def tube_mode_eigenvalue(n: int, r: int, sf: SpaceForm, R: float, l: float, j: int,
                         m: int) -> float:
    """Tube eigenvalue: sphere band ``j`` plus the Neumann axial mode ``cos(m pi t / l)``."""
    if not (l > 0 and math.isfinite(l)):
        raise InvalidInput(f"height must be positive, got {l}")
    if int(m) != m or m < 0:
        raise InvalidInput(f"axial mode must be a nonnegative integer, got {m!r}")
    base = sphere_mode_eigenvalue(n, r, sf, R, j)
    axial = math.comb(n - 1, r) * sf.cot(R) ** r
    return base + axial * (m * math.pi / l) ** 2


@dataclass(frozen=True)
class ResolventResult:
    """Closed-form solution of ``Delta f + n c f = -1`` with the ball's Robin condition."""

    f: RadialFunction
    integral: float
    interior_residual: float
    boundary_residual: float


def resolvent_profile(n: int, sf: SpaceForm, rho0: float, rho):
    """``(cn(rho0) cn(rho) - 1)/(n c)``, written without the 0/0 at ``c = 0``.

    Uses ``1 - cn(x) = 2 c sn(x/2)^2``; at ``c = 0`` this is ``-(rho^2 + rho0^2)/(2n)``.
    """
    half = np.asarray(sf.sn(np.asarray(rho) / 2.0))
    return -2.0 * (sf.cn(rho0) * half**2 + sf.sn(rho0 / 2.0) ** 2) / n


def resolvent_minus_one(n: int, sf: SpaceForm, rho0: float, N: int) -> ResolventResult:
    p = SturmLiouvilleProblem.ball_robin(n, sf.c, rho0, 0)
    disc = discretize(p, N)
    x = disc.grid
    f = resolvent_profile(n, sf, rho0, x)
    # rows 0..N-2 are full cells: K f = m (-Delta f - n c f)
    Kf = disc.apply(f)
    interior = np.abs(1.0 - Kf[:-1] / disc.masses[:-1])
    h = disc.h
    tail = f[-1:-6:-1]
    deriv = (25 * tail[0] - 48 * tail[1] + 36 * tail[2] - 16 * tail[3] + 3 * tail[4]) / (12 * h)
    boundary = abs(deriv - p.beta * f[-1])
    gx, gw = np.polynomial.legendre.leggauss(64)
    nodes = 0.5 * rho0 * (gx + 1.0)
    integral = 0.5 * rho0 * float(np.sum(gw * resolvent_profile(n, sf, rho0, nodes)
                                         * np.asarray(sf.sn(nodes)) ** (n - 1)))
    return ResolventResult(RadialFunction(x, f), integral * sphere_area(n - 1),
                           float(interior.max()), float(boundary))
