"""Shared generators for randomized tests (seeded, deterministic)."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import numpy as np

from dhlab import Chart, CutWindow, Form, HPolytope, Poly, canonical_chart

WINDOW = CutWindow(0.5, 4.5)


def chart6() -> Chart:
    return canonical_chart(WINDOW)


def random_rational(rng: random.Random, span: int = 9) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, 4))


def random_poly(rng: random.Random, nvars: int, max_degree: int = 2,
                max_terms: int = 3) -> Poly:
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        exps = [0] * nvars
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(nvars)] += 1
        terms[tuple(exps)] = random_rational(rng)
    return Poly(nvars, terms)


def random_form(rng: random.Random, chart: Chart, degree: int | None = None,
                max_degree: int = 3) -> Form:
    if degree is None:
        degree = rng.randint(0, max_degree)
    tuples = list(combinations(range(chart.dim), degree))
    terms = {}
    for idx in rng.sample(tuples, k=min(len(tuples), rng.randint(1, 3))):
        terms[idx] = random_poly(rng, chart.dim)
    return Form(chart, degree, terms)


def abs_eval(p: Poly, point) -> float:
    """sum |c| * prod |x|^e: a rigorous magnitude bound for evaluate()."""
    total = 0.0
    for exps, c in p.terms.items():
        term = abs(float(c))
        for x, e in zip(point, exps):
            term *= abs(float(x)) ** e
        total += term
    return total


def random_polytope(rng: np.random.Generator, dim: int) -> HPolytope:
    """A bounded polytope with nonempty interior: an axis box plus a few
    oblique cuts, every half-space kept a fixed margin away from a center."""
    center = rng.uniform(-1.0, 1.0, size=dim)
    half = rng.uniform(0.6, 1.5, size=dim)
    halfspaces = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        halfspaces.append((tuple(e), float(center[i] + half[i])))
        halfspaces.append((tuple(-e), float(-(center[i] - half[i]))))
    margin = 0.4
    for _ in range(int(rng.integers(0, 12 - 2 * dim + 1))):
        a = rng.normal(size=dim)
        norm = float(np.linalg.norm(a))
        if norm < 1e-9:
            continue
        halfspaces.append((tuple(a), float(a @ center + margin * norm)))
    return HPolytope(dim, tuple(halfspaces))
