"""Log-concavity analysis for positive densities.

Two complementary routes:

* a discrete midpoint test on uniformly gridded samples, using the
  multiplicative inequality f(s)^2 >= f(s-h) f(s+h) (exact for log-affine
  functions, no transcendental evaluation needed), and
* an exact route for positive polynomial densities via the concavity
  discriminant g = f*f'' - (f')^2, which has the sign of (log f)''
  wherever f > 0.

Both produce a :class:`ViolationReport`; a density is log-concave exactly
when the report carries no violation intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exterior import DimensionError, Poly


class DomainError(ValueError):
    """Raised when a density is not strictly positive where it must be."""


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of a log-concavity test.

    ``log_concave`` holds exactly when ``violation_intervals`` is empty.
    Each witness is an (s, g) pair with g > 0: the local certificate that
    log-concavity fails near s (g is the concavity discriminant for the
    analytic test and the midpoint surplus f(s-h)f(s+h) - f(s)^2 for the
    discrete one).  ``trimmed`` counts zero-volume bins dropped from the
    ends of a sampled profile before testing.
    """

    log_concave: bool
    violation_intervals: tuple[tuple[float, float], ...]
    witness_points: tuple[tuple[float, float], ...]
    trimmed: tuple[int, int] = (0, 0)

    def to_json_dict(self) -> dict:
        return {
            "log_concave": self.log_concave,
            "intervals": [list(iv) for iv in self.violation_intervals],
            "witnesses": [list(w) for w in self.witness_points],
            "trimmed_bins": list(self.trimmed),
        }


def concavity_discriminant(f: Poly) -> Poly:
    """g = f*f'' - (f')^2 for a univariate polynomial f.

    sign(g) = sign((log f)'') wherever f > 0, so g > 0 marks exactly the
    log-convexity violations of a positive f.
    """
    if f.nvars != 1:
        raise DimensionError("concavity discriminant needs a univariate polynomial")
    d1 = f.partial(0)
    return f * d1.partial(0) - d1 * d1


def isolate_roots(p: Poly, interval: tuple[float, float], tol: float = 1e-9,
                  grid_points: int = 10_000) -> list[float]:
    """Real roots of a univariate polynomial in a closed interval.

    Sign-scan on a uniform grid followed by bisection of each sign change
    down to width ``tol``.  Root pairs closer than the scan pitch can be
    missed; that is acceptable for the low-degree polynomials handled here.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.nvars != 1:
        raise DimensionError("root isolation needs a univariate polynomial")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    coeffs = _float_coeffs(p)
    xs = np.linspace(lo, hi, grid_points)
    vals = np.polynomial.polynomial.polyval(xs, coeffs)

    roots: list[float] = []

    def push(r: float):
        if not roots or abs(r - roots[-1]) > tol:
            roots.append(r)

    for k in range(grid_points):
        if vals[k] == 0.0:
            push(float(xs[k]))
        elif k + 1 < grid_points and vals[k] * vals[k + 1] < 0.0:
            push(_bisect(coeffs, float(xs[k]), float(xs[k + 1]), tol))
    return roots


def discrete_logconcavity(samples: Sequence[tuple[float, float]],
                          tol: float) -> ViolationReport:
    """Midpoint log-concavity test on a uniform grid of (s, f(s)) samples.

    Index i is flagged when f(s_i)^2 < f(s_{i-1}) f(s_{i+1}) (1 - tol); runs
    of adjacent flagged indices merge into violation intervals.  ``tol`` is
    a relative (multiplicative) slack, so the verdict is invariant under
    positive rescaling of f.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    pts = [(float(s), float(v)) for s, v in samples]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 samples, got {len(pts)}")
    s = np.array([p[0] for p in pts])
    f = np.array([p[1] for p in pts])
    if np.any(f <= 0):
        bad = float(s[int(np.argmax(f <= 0))])
        raise DomainError(f"nonpositive sample at s={bad}; log undefined")
    gaps = np.diff(s)
    h = gaps[0]
    if h <= 0 or np.any(np.abs(gaps - h) > 1e-9 * max(abs(h), 1.0)):
        raise ValueError("samples must sit on an ascending uniform grid")

    surplus = f[:-2] * f[2:] * (1.0 - tol) - f[1:-1] ** 2
    flagged = np.flatnonzero(surplus > 0) + 1

    intervals: list[tuple[float, float]] = []
    witnesses: list[tuple[float, float]] = []
    for run in _runs(flagged):
        intervals.append((float(s[run[0]]), float(s[run[-1]])))
        # strongest violation in the run, on the scale-free surplus
        ratios = [(f[i - 1] * f[i + 1] - f[i] ** 2) / f[i] ** 2 for i in run]
        i = run[int(np.argmax(ratios))]
        witnesses.append((float(s[i]), float(f[i - 1] * f[i + 1] - f[i] ** 2)))
    return ViolationReport(not intervals, tuple(intervals), tuple(witnesses))


def analytic_logconcavity(f: Poly, interval: tuple[float, float]) -> ViolationReport:
    """Exact log-concavity analysis of a positive polynomial density.

    Computes the concavity discriminant g exactly, isolates its real roots
    in the interval, and reports the maximal subintervals where g > 0 with
    endpoints refined to width <= 1e-9.  Signs between roots are decided by
    exact rational evaluation, never by floating point.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    if f.nvars != 1:
        raise DimensionError("analytic log-concavity needs a univariate polynomial")
    if not _strictly_positive(f, lo, hi):
        raise DomainError(f"density is not strictly positive on [{lo}, {hi}]")

    g = concavity_discriminant(f)
    if not g:
        return ViolationReport(True, (), ())

    cuts = [lo, *isolate_roots(g, (lo, hi), tol=1e-9), hi]
    pieces: list[tuple[float, float, float, Fraction]] = []  # (a, b, mid, g(mid))
    for a, b in zip(cuts, cuts[1:]):
        if b <= a:
            continue
        mid = (a + b) / 2.0
        gmid = g.evaluate_exact((Fraction(mid),))
        if gmid > 0:
            pieces.append((a, b, mid, gmid))

    intervals: list[tuple[float, float]] = []
    witnesses: list[tuple[float, float]] = []
    best: tuple[float, Fraction] | None = None
    for a, b, mid, gmid in pieces:
        if intervals and a <= intervals[-1][1]:
            intervals[-1] = (intervals[-1][0], b)
            if gmid > best[1]:
                best = (mid, gmid)
            witnesses[-1] = (best[0], float(best[1]))
        else:
            intervals.append((a, b))
            best = (mid, gmid)
            witnesses.append((mid, float(gmid)))
    return ViolationReport(not intervals, tuple(intervals), tuple(witnesses))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _float_coeffs(p: Poly) -> np.ndarray:
    out = np.zeros(p.degree_in(0) + 1)
    for (e,), c in p.terms.items():
        out[e] = float(c)
    return out


def _bisect(coeffs: np.ndarray, a: float, b: float, tol: float) -> float:
    fa = float(np.polynomial.polynomial.polyval(a, coeffs))
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:  # interval below float resolution
            break
        fm = float(np.polynomial.polynomial.polyval(m, coeffs))
        if fm == 0.0:
            return m
        if (fa < 0) != (fm < 0):
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _strictly_positive(f: Poly, lo: float, hi: float) -> bool:
    if f.evaluate_exact((Fraction(lo),)) <= 0:
        return False
    if f.evaluate_exact((Fraction(hi),)) <= 0:
        return False
    return not isolate_roots(f, (lo, hi), tol=1e-12)


def _runs(indices: np.ndarray) -> list[list[int]]:
    runs: list[list[int]] = []
    for i in indices:
        if runs and i == runs[-1][-1] + 1:
            runs[-1].append(int(i))
        else:
            runs.append([int(i)])
    return runs
