"""Acceptance suite: ten numbered checks against closed forms and independent oracles.

Each check returns a :class:`CriterionResult`; ``run_all`` runs them in
order. Reference values are computed here from elementary formulas
(``math.sin``, brute-force subset sums, explicit case tables), never by
calling back into the routine under test.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InsufficientInput
from .spaceform import SpaceForm
from .spectral import (SturmLiouvilleProblem, ball_robin_spectrum, radial_eigen,
                       resolvent_minus_one, sphere_mode_eigenvalue)
from .stability import (CapSpec, Label, Resolvent, Subspace, TubeSpec, cap_morse_index,
                        cap_verdict, koiso_classify, tube_verdict, tube_verdicts)
from .symfunc import (CurvatureVector, Definiteness, maclaurin_report, newton_recurrence,
                      positivity_check, profile)

SEED = 20240917
BALL_CASES = [(n, c, rho0) for n in (2, 3, 4) for c in (-1.0, 0.0, 1.0) for rho0 in (0.5, 1.0)]
CAP_CASES = [(n, c, rho0) for n in (2, 3) for c in (-1.0, 0.0, 1.0) for rho0 in (0.6, 1.0)]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.number:2d}] {self.title}: {self.detail} ({self.seconds:.2f} s)"


def _corpus(size=1000, seed=SEED):
    rng = np.random.default_rng(seed)
    return [CurvatureVector(rng.uniform(-3.0, 3.0, size=int(rng.integers(2, 9))))
            for _ in range(size)]


def _subset_sum(values, r):
    # brute force: sum over all r-subsets
    return math.fsum(math.prod(s) for s in itertools.combinations(values, r))


def check_traces() -> tuple[bool, str]:
    corpus = _corpus()
    worst = max(float(profile(kv).trace_residuals().max()) for kv in corpus)
    # spot-check the symmetric functions themselves against subset sums
    spot = 0.0
    for kv in corpus[:50]:
        S = profile(kv).S
        for r in range(kv.n + 1):
            ref = _subset_sum(kv.kappa, r)
            spot = max(spot, abs(S[r] - ref) / max(1.0, abs(ref)))
    ok = worst < 1e-10 and spot < 1e-10
    return ok, f"max relative residual {worst:.2e}, subset-sum spot check {spot:.2e}"


def check_cayley_hamilton() -> tuple[bool, str]:
    worst = 0.0
    for kv in _corpus():
        bound = 1e-9 * (1.0 + max(abs(k) for k in kv.kappa)) ** kv.n
        worst = max(worst, float(np.abs(newton_recurrence(kv, kv.n)).max()) / bound)
    return worst < 1.0, f"max |P_n| / bound = {worst:.2e}"


def check_maclaurin() -> tuple[bool, str]:
    problems = []
    min_margin = math.inf
    for kv in _corpus():
        nonneg = CurvatureVector(np.abs(kv.array))
        rep = maclaurin_report(nonneg)
        min_margin = min(min_margin, float(rep.margins().min()))
        if rep.all_equalities():
            problems.append(f"non-umbilic {nonneg.kappa} reported all equalities")
        prof = profile(kv)
        for k in range(kv.n):
            if positivity_check(kv, k) is Definiteness.POSITIVE_DEFINITE and prof.tau[k] > 1e-10:
                problems.append(f"tau_{k}={prof.tau[k]:.3e} for {kv.kappa}")
    rng = np.random.default_rng(SEED + 1)
    worst_tau = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        kv = CurvatureVector.umbilic(n, float(rng.uniform(0.0, 3.0)))
        if not maclaurin_report(kv).all_equalities():
            problems.append(f"umbilic {kv.kappa} missed an equality")
        scale = (1.0 + kv.kappa[0]) ** (2 * n)
        worst_tau = max(worst_tau, float(np.abs(profile(kv).tau).max()) / scale)
    if min_margin < -1e-12:
        problems.append(f"margin {min_margin:.3e}")
    if worst_tau > 1e-12:
        problems.append(f"umbilic tau {worst_tau:.3e}")
    detail = (f"min margin {min_margin:.2e}, umbilic |tau| {worst_tau:.1e}"
              if not problems else "; ".join(problems[:3]))
    return not problems, detail


def _sphere_reference(n, r, c, R):
    if c > 0:
        sn, cn = math.sin(math.sqrt(c) * R) / math.sqrt(c), math.cos(math.sqrt(c) * R)
    elif c < 0:
        sn, cn = math.sinh(math.sqrt(-c) * R) / math.sqrt(-c), math.cosh(math.sqrt(-c) * R)
    else:
        sn, cn = R, 1.0
    return -(n - r - 1) * math.comb(n - 1, r) / sn**2 * (cn / sn) ** r


def check_sphere_eigenvalue() -> tuple[bool, str]:
    rng = np.random.default_rng(SEED + 2)
    triples = []
    for i in range(50):
        n = int(rng.integers(2, 7))
        r = int(rng.integers(0, n - 1))
        c = (-1.0, -0.3, 0.0, 0.7, 1.0)[i % 5]
        hi = 0.45 * math.pi / math.sqrt(c) if c > 0 else 3.0
        triples.append((n, r, c, float(rng.uniform(0.1, hi))))
    t0 = time.perf_counter()
    worst = 0.0
    for n, r, c, R in triples:
        got = sphere_mode_eigenvalue(n, r, SpaceForm(c), R, 0)
        ref = _sphere_reference(n, r, c, R)
        worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300) if ref else abs(got))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 0.1
    return ok, f"max relative error {worst:.2e} over 50 triples in {elapsed * 1e3:.1f} ms"


def check_ball_spectrum(N=4096) -> tuple[bool, str]:
    t0 = time.perf_counter()
    bad, worst = [], 0.0
    for n, c, rho0 in BALL_CASES:
        spec = ball_robin_spectrum(n, c, rho0, 2, 2, N)
        lam2, mult = float(spec.eigenvalues[1]), int(spec.multiplicities[1])
        worst = max(worst, abs(lam2) * N * N)
        if spec.eigenvalues[0] >= 0 or abs(lam2) > 50.0 / N**2 or mult != n:
            bad.append(f"(n={n}, c={c}, rho0={rho0}): lambda2={lam2:.2e}, mult={mult}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 10.0:
        bad.append(f"runtime {elapsed:.1f} s")
    detail = f"max |lambda2| N^2 = {worst:.2f} (bound 50), multiplicities n"
    return not bad, detail if not bad else "; ".join(bad[:3])


def check_ground_mode(N=4096) -> tuple[bool, str]:
    worst = 0.0
    for n, c, rho0 in BALL_CASES:
        spec = radial_eigen(SturmLiouvilleProblem.ball_robin(n, c, rho0, 1), 1, N)
        f = spec.eigenfunctions[0]
        ref = np.array([_sn(c, x) for x in f.grid])
        got = f.values / np.abs(f.values).max()
        worst = max(worst, float(np.abs(got - ref / np.abs(ref).max()).max()))
    return worst < 1e-4, f"max sup-normalized deviation from sn_c {worst:.2e}"


def _sn(c, x):
    if c > 0:
        return math.sin(math.sqrt(c) * x) / math.sqrt(c)
    if c < 0:
        return math.sinh(math.sqrt(-c) * x) / math.sqrt(-c)
    return x


def check_resolvent(N=4096) -> tuple[bool, str]:
    interior = boundary = 0.0
    for n, c, rho0 in BALL_CASES:
        res = resolvent_minus_one(n, SpaceForm(c), rho0, N)
        interior = max(interior, res.interior_residual)
        boundary = max(boundary, res.boundary_residual)
    ok = interior < 1e-6 and boundary < 1e-6
    return ok, f"interior residual {interior:.2e}, boundary residual {boundary:.2e}"


def random_tube_specs(count: int, seed: int = SEED + 3) -> list[TubeSpec]:
    """Random tubes whose Newton tensor is positive definite.

    For ``c > 0`` and ``r >= 1`` the radius stays below ``0.45 R_c`` so that
    ``cn_c(R)`` is bounded away from zero; otherwise any admissible radius
    up to 4 is drawn.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        n = int(rng.integers(2, 9))
        r = int(rng.integers(0, n - 1))
        c = float(rng.uniform(-2.0, 2.0))
        hi = 4.0
        if c > 0:
            hi = min(hi, math.pi / math.sqrt(c) * (0.45 if r >= 1 else 1.0))
        R = float(rng.uniform(0.0, hi))
        while R <= 0.0 or R >= hi:
            R = float(rng.uniform(0.0, hi))
        specs.append(TubeSpec(n, r, R, float(rng.uniform(0.05, 10.0)), c))
    return specs


def _tube_reference(t: TubeSpec):
    sn, k = _sn(t.c, t.R), None
    if t.c > 0:
        k = math.cos(math.sqrt(t.c) * t.R) / sn
    elif t.c < 0:
        k = math.cosh(math.sqrt(-t.c) * t.R) / sn
    else:
        k = 1.0 / t.R
    margin = math.pi * sn - t.l * math.sqrt(t.n - t.r - 1)
    binom = math.comb(t.n - 1, t.r)
    lam = -(t.n - t.r - 1) * binom / sn**2 * k**t.r + binom * k**t.r * math.pi**2 / t.l**2
    return margin, lam


def check_tube() -> tuple[bool, str]:
    specs = random_tube_specs(10_000)
    t0 = time.perf_counter()
    verdicts = tube_verdicts(specs)
    elapsed = time.perf_counter() - t0
    bad = []
    for t, v in zip(specs, verdicts):
        margin, lam = _tube_reference(t)
        expected = Label.STABLE if margin >= 0 else Label.UNSTABLE
        if v.label is not expected:
            bad.append(f"{t}: {v.label} vs {expected}")
        elif abs(margin) > 1e-9 and (lam >= 0) != (expected is Label.STABLE):
            bad.append(f"{t}: eigenvalue sign {lam:.3e} disagrees")
    worked = [(TubeSpec(3, 0, 1.0, 2.0), Label.STABLE),
              (TubeSpec(3, 0, 1.0, 3.0), Label.UNSTABLE),
              (TubeSpec(3, 1, 1.0, math.pi), Label.STABLE)]
    for t, expected in worked:
        v = tube_verdict(t)
        if v.label is not expected:
            bad.append(f"worked example {t}: {v.label}")
    if tube_verdict(worked[2][0]).margin != 0.0:
        bad.append("threshold example margin is not exactly 0")
    if elapsed >= 2.0:
        bad.append(f"runtime {elapsed:.2f} s")
    detail = f"10000 specs and 3 worked examples agree, {elapsed:.2f} s for the verdicts"
    return not bad, detail if not bad else "; ".join(bad[:3])


def check_caps(N=2048) -> tuple[bool, str]:
    bad = []
    for n, c, rho0 in CAP_CASES:
        cs = CapSpec(n, c, rho0)
        labels, indices = [], []
        for r in (0, 1):
            full = cap_morse_index(cs, Subspace.FULL, N, r=r)
            mean_zero = cap_morse_index(cs, Subspace.MEAN_ZERO, N, r=r)
            indices.append((full.index, mean_zero.index))
            labels.append(cap_verdict(full).label)
        if indices[0] != (1, 0):
            bad.append(f"(n={n}, c={c}, rho0={rho0}): indices {indices[0]}")
        if indices[1] != indices[0] or labels[1] is not labels[0]:
            bad.append(f"(n={n}, c={c}, rho0={rho0}): r=1 gives {indices[1]}, {labels[1]}")
    detail = f"{len(CAP_CASES)} caps: Full=1, MeanZero=0, r=0 and r=1 agree"
    return not bad, detail if not bad else "; ".join(bad[:3])


# The Koiso-type classification written out as one rule per case.
# Each rule: (case, applies(l1, l2, means, tol), outcome(integral)).
def _koiso_rules(mean_tol):
    def zero(x, tol):
        return abs(x) <= tol

    return [
        ("i", lambda l1, l2, m, tol: l1 > 0 or zero(l1, tol),
         lambda integral: Label.STRONGLY_STABLE),
        ("v", lambda l1, l2, m, tol: l1 < -tol and l2 < -tol,
         lambda integral: Label.UNSTABLE),
        ("ii", lambda l1, l2, m, tol: l1 < -tol and l2 > tol,
         lambda integral: Label.STABLE if integral >= 0 else Label.UNSTABLE),
        ("iii", lambda l1, l2, m, tol: l1 < -tol and zero(l2, tol) and m is not None
         and any(abs(x) > mean_tol for x in m),
         lambda integral: Label.UNSTABLE),
        ("iv", lambda l1, l2, m, tol: l1 < -tol and zero(l2, tol) and m is not None
         and all(abs(x) <= mean_tol for x in m),
         lambda integral: Label.STABLE if integral >= 0 else Label.UNSTABLE),
    ]


def koiso_cases(tol=1e-3):
    """Synthetic classifier inputs, including values just inside and outside ``tol``."""
    levels = [-2.0, -1.5 * tol, -tol, -0.5 * tol, 0.0, 0.5 * tol, tol, 1.5 * tol, 2.0]
    integrals = [-1.0, -1e-14, 0.0, 1e-14, 1.0]
    means = [None, (), (0.0, 0.0), (0.0, 0.25), (1e-12,)]
    out = []
    for l1, l2 in itertools.combinations_with_replacement(levels, 2):
        for integral, m, perp in itertools.product(integrals, means, (True, False)):
            out.append((l1, l2, integral, m, perp))
    return out


def check_koiso() -> tuple[bool, str]:
    mean_tol = 1e-10
    bad, seen, total = [], set(), 0
    for tol in (1e-3, None):
        eff = 1e-3 if tol is not None else None
        for l1, l2, integral, m, perp in koiso_cases(1e-3):
            t = eff if eff is not None else max(1e-7, 1e-6 * abs(l1))
            rules = [(case, out) for case, applies, out in _koiso_rules(mean_tol)
                     if applies(l1, l2, m, t)]
            needs_perp = rules and rules[0][0] == "iv"
            total += 1
            try:
                v = koiso_classify(l1, l2, Resolvent(True, integral, perp), m, tol=tol,
                                   mean_tol=mean_tol)
            except InsufficientInput:
                if rules and not (needs_perp and not perp):
                    bad.append(f"unexpected InsufficientInput for {(l1, l2, m, perp)}")
                continue
            if len(rules) != 1:
                bad.append(f"{(l1, l2, m)} matches {len(rules)} rules but classified {v.case}")
                continue
            case, outcome = rules[0]
            if needs_perp and not perp:
                bad.append(f"case iv accepted a resolvent not orthogonal to E_lambda2")
            seen.add(case)
            if v.case != case or v.label is not outcome(integral):
                bad.append(f"{(l1, l2, integral, m)}: got {v.case}/{v.label}, "
                           f"expected {case}/{outcome(integral)}")
    # the deciding branch must refuse to guess when its data is missing
    for args in [(-1.0, 1.0, None, None), (-1.0, 0.0, None, None), (-1.0, 0.0, None, (0.0,))]:
        try:
            koiso_classify(args[0], args[1], args[2], args[3])
            bad.append(f"{args} did not raise InsufficientInput")
        except InsufficientInput:
            pass
    if seen != {"i", "ii", "iii", "iv", "v"}:
        bad.append(f"cases covered: {sorted(seen)}")
    detail = f"{total} synthetic tuples, all five cases agree"
    return not bad, detail if not bad else "; ".join(bad[:3])


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "trace identities", check_traces),
    (2, "Cayley-Hamilton P_n = 0", check_cayley_hamilton),
    (3, "Maclaurin inequalities and umbilicity coefficient", check_maclaurin),
    (4, "geodesic sphere radial eigenvalue", check_sphere_eigenvalue),
    (5, "Robin ball spectrum lambda2 = 0 with multiplicity n", check_ball_spectrum),
    (6, "l=1 ground mode equals sn_c", check_ground_mode),
    (7, "resolvent residuals", check_resolvent),
    (8, "tube stability threshold", check_tube),
    (9, "cap Morse indices", check_caps),
    (10, "Koiso classifier branches", check_koiso),
]

RUNTIME_LIMITS = {1: 1.0}


def run_criterion(number: int) -> CriterionResult:
    for num, title, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failure, reported not raised
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            elapsed = time.perf_counter() - t0
            limit = RUNTIME_LIMITS.get(num)
            if limit is not None and elapsed >= limit:
                ok, detail = False, f"{detail}; runtime {elapsed:.2f} s exceeds {limit} s"
            return CriterionResult(num, title, ok, detail, elapsed)
    raise KeyError(number)


def run_all(numbers=None) -> list[CriterionResult]:
    numbers = [n for n, _, _ in CRITERIA] if numbers is None else list(numbers)
    return [run_criterion(n) for n in numbers]
