"""Monte-Carlo estimation of the moment-map pushforward of Liouville measure.

The sampler draws chart points uniformly from [0,1)^4 x [A,B] x [0,1),
weights each by the Liouville density (the verified top-power coefficient,
evaluated at the full 6-dimensional point, so nothing here assumes the
density depends on t alone) and bins by the moment-map value t.

Reproducibility contract
------------------------
The random stream is Philox (counter-based), indexed per sample: sample s
owns the 8 consecutive 64-bit draws starting at counter block 2*s (six are
used for the coordinates, two are discarded to keep blocks aligned).  A
chunk covering samples [s0, s1) therefore regenerates exactly the draws a
single-shot run would produce, so the merged histogram is bit-identical for
any chunk size and any worker count; per-bin accumulation across chunks is
compensated (Kahan), keeping totals reproducible to well below 1e-10
relative even though chunk boundaries regroup the floating-point sums.

Set DH_LAB_THREADS to parallelize chunks; results do not depend on it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .construction import CutWindow, DegenerateWindowError
from .exterior import Poly

GENERATOR_NAME = "philox4x64-10(8 words/sample)"
_WORDS_PER_SAMPLE = 8
_TICKS_PER_SAMPLE = 2  # 8 words = 2 philox counter blocks of 4


class EmptyMeasureError(ValueError):
    """Raised when a histogram carries no positive weight to normalize."""


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling plan: size, binning, window and the seed of the Philox key.

    ``chunk_size`` only affects scheduling granularity; the sample stream is
    indexed per sample, so estimates agree across chunk sizes to rounding.
    """

    sample_count: int
    bins: int
    window: CutWindow
    seed: int
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError(f"need at least 2 bins, got {self.bins}")
        if self.sample_count < self.bins:
            raise ValueError(
                f"sample_count {self.sample_count} must be >= bins {self.bins}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")


@dataclass(frozen=True, eq=False)
class Histogram:
    """Binned pushforward weights over [A, B] with per-bin second moments."""

    bin_edges: np.ndarray
    weight_sums: np.ndarray
    weight_sq_sums: np.ndarray
    total_weight: float
    sample_count: int
    window: CutWindow
    seed: int
    generator: str = GENERATOR_NAME

    @property
    def bins(self) -> int:
        return len(self.weight_sums)

    @property
    def bin_width(self) -> float:
        return (self.window.hi - self.window.lo) / self.bins

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return (np.array_equal(self.bin_edges, other.bin_edges)
                and np.array_equal(self.weight_sums, other.weight_sums)
                and np.array_equal(self.weight_sq_sums, other.weight_sq_sums)
                and self.total_weight == other.total_weight
                and self.sample_count == other.sample_count
                and self.window == other.window
                and self.seed == other.seed
                and self.generator == other.generator)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Normalized per-bin density (integrates to 1 over the window) with
    standard errors from the per-bin weight variance."""

    bin_centers: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    window: CutWindow


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Per-bin agreement of an estimate with an exactly normalized analytic
    density; ``worst_bin`` is the bin of largest absolute deviation."""

    max_rel_error: float
    per_bin_z: np.ndarray
    worst_bin: int


def liouville_weight(top_poly: Poly, point: Sequence[float]) -> float:
    """The Liouville density at a chart point (positive on a verified window)."""
    return top_poly.evaluate(point)


def sample_pushforward(top_poly: Poly, cfg: SamplerConfig,
                       threads: int | None = None) -> Histogram:
    """Weighted uniform sampling of the moment-map pushforward.

    Deterministic for fixed (top_poly, cfg): see the module docstring for
    the stream-splitting rule.  Bins are half-open [edge, next_edge) with
    the last bin closed.  Refuses on a negative weight, which signals an
    unverified or degenerate construction.
    """
    lo, hi = cfg.window.lo, cfg.window.hi
    starts = list(range(0, cfg.sample_count, cfg.chunk_size))
    key = _philox_key(cfg.seed)

    def one_chunk(start: int):
        pts, w = _chunk_points(top_poly, cfg, key, start)
        if np.any(w < 0):
            bad = pts[int(np.argmin(w))]
            raise DegenerateWindowError(
                f"negative Liouville weight at t={bad[4]:.6g}; verify the construction "
                "and window before sampling")
        idx = ((pts[:, 4] - lo) * (cfg.bins / (hi - lo))).astype(np.int64)
        np.clip(idx, 0, cfg.bins - 1, out=idx)
        ws = np.bincount(idx, weights=w, minlength=cfg.bins)
        w2 = np.bincount(idx, weights=w * w, minlength=cfg.bins)
        return ws, w2

    if threads is None:
        threads = int(os.environ.get("DH_LAB_THREADS", "1") or "1")
    threads = max(1, min(threads, len(starts)))
    if threads == 1:
        partials = [one_chunk(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(one_chunk, starts))

    # merge in ascending chunk order, compensated per bin
    sums = np.zeros(cfg.bins)
    sums_c = np.zeros(cfg.bins)
    sq = np.zeros(cfg.bins)
    sq_c = np.zeros(cfg.bins)
    for ws, w2 in partials:
        _kahan_add(sums, sums_c, ws)
        _kahan_add(sq, sq_c, w2)

    edges = np.linspace(lo, hi, cfg.bins + 1)
    return Histogram(edges, sums, sq, float(np.sum(sums)), cfg.sample_count,
                     cfg.window, cfg.seed)


def normalize(h: Histogram) -> DensityEstimate:
    """Normalize a histogram so the density integrates to 1 over the window.

    Standard errors use the usual weighted-histogram estimator: the variance
    of each bin's weight sum is sum(w^2) - (sum w)^2 / N, scaled down by the
    total weight times the bin width.
    """
    if not h.total_weight > 0:
        raise EmptyMeasureError("histogram has no positive weight")
    if h.sample_count <= 0:
        raise EmptyMeasureError("histogram has no samples")
    scale = h.total_weight * h.bin_width
    density = h.weight_sums / scale
    var = np.maximum(h.weight_sq_sums - h.weight_sums ** 2 / h.sample_count, 0.0)
    stderr = np.sqrt(var) / scale
    centers = 0.5 * (h.bin_edges[:-1] + h.bin_edges[1:])
    return DensityEstimate(centers, density, stderr, h.window)


def compare(est: DensityEstimate, analytic: Poly, window: CutWindow) -> ComparisonReport:
    """Compare an estimate against an analytic density normalized exactly.

    The analytic polynomial is normalized by its exact rational integral
    over the window and evaluated at the bin centers; reported are the
    maximum relative error, per-bin z-scores, and the bin with the largest
    absolute deviation.
    """
    if analytic.nvars != 1:
        raise ValueError("analytic density must be univariate in the moment value")
    mass = analytic.integrate(Fraction(window.lo), Fraction(window.hi))
    if mass <= 0:
        raise ValueError("analytic density must have positive mass on the window")
    ref = np.array([
        float(analytic.evaluate_exact((Fraction(float(c)),)) / mass)
        for c in est.bin_centers
    ])
    if np.any(ref <= 0):
        raise ValueError("analytic density must be strictly positive on the window")
    diff = est.density - ref
    max_rel = float(np.max(np.abs(diff) / ref))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(diff == 0, 0.0, diff / est.stderr)
    return ComparisonReport(max_rel, z, int(np.argmax(np.abs(diff))))


# ---------------------------------------------------------------------------
# sampling internals (shared with the conditioning property tests)
# ---------------------------------------------------------------------------

def _philox_key(seed: int) -> np.ndarray:
    return SeedSequence(int(seed)).generate_state(2, np.uint64)


def _chunk_points(top_poly: Poly, cfg: SamplerConfig, key: np.ndarray,
                  start: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights for the chunk of samples [start, start+chunk)."""
    n = min(cfg.chunk_size, cfg.sample_count - start)
    bg = Philox(key=key, counter=_TICKS_PER_SAMPLE * start)
    u = Generator(bg).random((n, _WORDS_PER_SAMPLE))
    pts = np.ascontiguousarray(u[:, :6])
    pts[:, 4] = cfg.window.lo + (cfg.window.hi - cfg.window.lo) * pts[:, 4]
    return pts, _eval_on_points(top_poly, pts)


def iter_sample_chunks(top_poly: Poly, cfg: SamplerConfig) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (points, weights) chunk by chunk, exactly as the sampler sees them."""
    key = _philox_key(cfg.seed)
    for start in range(0, cfg.sample_count, cfg.chunk_size):
        yield _chunk_points(top_poly, cfg, key, start)


def _eval_on_points(p: Poly, pts: np.ndarray) -> np.ndarray:
    """Vectorized polynomial evaluation at rows of a point matrix."""
    out = np.zeros(len(pts))
    for exps, c in p.terms.items():
        term = np.full(len(pts), float(c))
        for ax, e in enumerate(exps):
            if e == 1:
                term *= pts[:, ax]
            elif e > 1:
                term *= pts[:, ax] ** e
        out += term
    return out


def _kahan_add(acc: np.ndarray, comp: np.ndarray, values: np.ndarray) -> None:
    y = values - comp
    t = acc + y
    comp[:] = (t - acc) - y
    acc[:] = t
