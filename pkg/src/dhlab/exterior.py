"""Exact symbolic exterior calculus on a single coordinate chart.

Coefficients live in the rational numbers (``fractions.Fraction``), so wedge
products, exterior derivatives and interior products are computed without any
rounding; floating point enters only when a polynomial is evaluated at a
numeric point.  Differential forms are stored in the canonical basis: a
k-form is a map from strictly ascending k-tuples of variable indices to
polynomial coefficients, with permutation signs normalized away at
construction time.

All objects here are immutable values after construction and all operations
are pure functions, so they are safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction]


class ChartMismatchError(ValueError):
    """Raised when combining forms that live on different charts."""


class DimensionError(ValueError):
    """Raised when a point or exponent vector has the wrong length."""


class UnsupportedIntegrandError(ValueError):
    """Raised when a face integral is requested for a non-constant coefficient."""


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    """A chart variable: its name, periodicity flag and sampling interval."""

    name: str
    periodic: bool
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty sample interval for {self.name!r}: [{self.lo}, {self.hi})")


@dataclass(frozen=True)
class Chart:
    """An ordered list of variables fixing the coordinate conventions.

    The sampling intervals are only used by Monte-Carlo consumers; the
    symbolic operators treat every variable as a formal symbol (in
    particular, d of a periodic coordinate is a perfectly good 1-form on
    the chart).
    """

    variables: tuple[Variable, ...]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in chart: {names}")

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def axis(self, name: str) -> int:
        return self.names.index(name)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Multivariate polynomial with exact rational coefficients.

    Terms are a map from exponent vectors (one nonnegative integer per chart
    variable) to nonzero ``Fraction`` coefficients; the zero polynomial is
    the empty map.  For example, with three variables::

        {(2, 0, 1): Fraction(1), (0, 0, 0): Fraction(-5, 2)}

    is  x0^2 * x2 - 5/2.  Instances are immutable: attribute assignment is
    blocked and no method mutates ``terms`` after construction.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | Iterable | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        acc: dict[tuple[int, ...], Fraction] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for exps, coeff in items:
                exps = tuple(int(e) for e in exps)
                if len(exps) != nvars:
                    raise DimensionError(f"exponent vector {exps} has length != {nvars}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                coeff = Fraction(coeff)
                if coeff:
                    s = acc.get(exps, _ZERO) + coeff
                    if s:
                        acc[exps] = s
                    else:
                        acc.pop(exps, None)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", acc)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly(nvars)

    @staticmethod
    def constant(nvars: int, value: Scalar) -> "Poly":
        return Poly(nvars, {(0,) * nvars: Fraction(value)})

    @staticmethod
    def variable(nvars: int, axis: int) -> "Poly":
        if not 0 <= axis < nvars:
            raise DimensionError(f"axis {axis} out of range for {nvars} variables")
        exps = tuple(1 if i == axis else 0 for i in range(nvars))
        return Poly(nvars, {exps: Fraction(1)})

    # -- ring structure ------------------------------------------------------

    def _coerce(self, other) -> "Poly | None":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise DimensionError("polynomials over different variable counts")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(self.nvars, other)
        return None

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps, _ZERO) + c
            if s:
                terms[exps] = s
            else:
                terms.pop(exps, None)
        return _raw_poly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return _raw_poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            if not isinstance(other, (int, Fraction)):
                return NotImplemented
            c = Fraction(other)
            if not c:
                return Poly(self.nvars)
            return _raw_poly(self.nvars, {e: k * c for e, k in self.terms.items()})
        if other.nvars != self.nvars:
            raise DimensionError("polynomials over different variable counts")
        acc: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = acc.get(e, _ZERO) + c1 * c2
                if s:
                    acc[e] = s
                else:
                    acc.pop(e, None)
        return _raw_poly(self.nvars, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = Poly.constant(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction)):
                other = Poly.constant(self.nvars, other)
            else:
                return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- calculus and queries --------------------------------------------------

    def partial(self, axis: int) -> "Poly":
        """Exact partial derivative with respect to the given variable."""
        if not 0 <= axis < self.nvars:
            raise DimensionError(f"axis {axis} out of range")
        acc: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            e = exps[axis]
            if e:
                ne = exps[:axis] + (e - 1,) + exps[axis + 1:]
                s = acc.get(ne, _ZERO) + c * e
                if s:
                    acc[ne] = s
                else:
                    acc.pop(ne, None)
        return _raw_poly(self.nvars, acc)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, axis: int) -> int:
        return max((e[axis] for e in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), _ZERO)

    def uses_only(self, axes: Iterable[int]) -> bool:
        allowed = set(axes)
        return all(
            all(e == 0 or i in allowed for i, e in enumerate(exps))
            for exps in self.terms
        )

    def univariate(self, axis: int) -> "Poly":
        """Reinterpret as a one-variable polynomial in the given axis.

        Fails unless every term depends on that axis alone.
        """
        if not self.uses_only([axis]):
            raise ValueError(f"polynomial involves variables other than axis {axis}")
        return Poly(1, {(exps[axis],): c for exps, c in self.terms.items()})

    def content(self) -> Fraction:
        """The positive rational c such that self / c has coprime integer coefficients."""
        if not self.terms:
            return Fraction(1)
        nums = [abs(c.numerator) for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        return Fraction(math.gcd(*nums), math.lcm(*dens))

    def primitive(self) -> "Poly":
        """Divide out the content; the sign of the polynomial is preserved."""
        return self * (1 / self.content())

    def evaluate(self, point: Sequence[float]) -> float:
        """Horner-style evaluation in floating point (coefficients stay exact)."""
        if len(point) != self.nvars:
            raise DimensionError(f"point of length {len(point)}, expected {self.nvars}")
        if not self.terms:
            return 0.0
        return _horner(list(self.terms.items()), tuple(float(x) for x in point),
                       self.nvars, float)

    def evaluate_exact(self, point: Sequence) -> Fraction:
        """Evaluate with exact rational arithmetic (floats convert exactly)."""
        if len(point) != self.nvars:
            raise DimensionError(f"point of length {len(point)}, expected {self.nvars}")
        if not self.terms:
            return Fraction(0)
        return _horner(list(self.terms.items()), tuple(Fraction(x) for x in point),
                       self.nvars, Fraction)

    def integrate(self, lo, hi) -> Fraction:
        """Exact definite integral of a univariate polynomial over [lo, hi]."""
        if self.nvars != 1:
            raise DimensionError("definite integration requires a univariate polynomial")
        lo, hi = Fraction(lo), Fraction(hi)
        total = Fraction(0)
        for (e,), c in self.terms.items():
            total += c * (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
        return total

    # -- serialization and display ----------------------------------------------

    def to_json(self) -> list[dict]:
        return [
            {"exps": list(exps), "num": c.numerator, "den": c.denominator}
            for exps, c in sorted(self.terms.items())
        ]

    @staticmethod
    def from_json(nvars: int, data: Iterable[Mapping]) -> "Poly":
        return Poly(nvars, {tuple(d["exps"]): Fraction(d["num"], d["den"]) for d in data})

    def __repr__(self):
        return f"Poly({self.nvars}, {poly_str(self)!r})"

    def __str__(self):
        return poly_str(self)


_ZERO = Fraction(0)


def _raw_poly(nvars: int, terms: dict) -> Poly:
    """Internal constructor bypassing re-validation of already-clean term maps."""
    p = object.__new__(Poly)
    object.__setattr__(p, "nvars", nvars)
    object.__setattr__(p, "terms", terms)
    return p


def _horner(items, point, nv, cast):
    # Recursive Horner scheme: group on the last variable, recurse on the rest.
    if nv == 0:
        return cast(items[0][1]) if items else cast(0)
    ax = nv - 1
    groups: dict[int, list] = {}
    for exps, c in items:
        groups.setdefault(exps[ax], []).append((exps, c))
    x = point[ax]
    acc = None
    prev = 0
    for e in sorted(groups, reverse=True):
        val = _horner(groups[e], point, nv - 1, cast)
        acc = val if acc is None else acc * x ** (prev - e) + val
        prev = e
    return acc * x ** prev


def poly_str(p: Poly, names: Sequence[str] | None = None) -> str:
    """Human-readable rendering, e.g. ``6*t^2 - 30*t + 42``."""
    if not p.terms:
        return "0"
    if names is None:
        names = [f"x{i}" for i in range(p.nvars)]
    pieces = []
    for exps, c in sorted(p.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
        factors = [
            names[i] if e == 1 else f"{names[i]}^{e}"
            for i, e in enumerate(exps) if e
        ]
        if not factors:
            body = str(abs(c))
        elif abs(c) == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(abs(c))] + factors)
        pieces.append(("- " if c < 0 else "+ ") + body)
    out = " ".join(pieces)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]


# ---------------------------------------------------------------------------
# Differential forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordVectorField:
    """The coordinate vector field along one chart axis."""

    axis: int


class Form:
    """A degree-graded differential form on a chart.

    ``terms`` maps strictly ascending index tuples of length ``degree`` to
    ``Poly`` coefficients; entries with zero coefficient are never stored.
    Equality is structural equality of the normalized term maps, which is
    exact because the canonical representation is unique.
    """

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int,
                 terms: Mapping | Iterable | None = None):
        if degree < 0:
            raise ValueError("form degree must be nonnegative")
        acc: dict[tuple[int, ...], Poly] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for idx, coeff in items:
                idx = tuple(int(i) for i in idx)
                if len(idx) != degree:
                    raise ValueError(f"index tuple {idx} has length != degree {degree}")
                if any(i < 0 or i >= chart.dim for i in idx):
                    raise DimensionError(f"index tuple {idx} out of range for chart dim {chart.dim}")
                norm = _normalize_indices(idx)
                if norm is None:
                    continue  # repeated index annihilates
                sign, key = norm
                if not isinstance(coeff, Poly):
                    coeff = Poly.constant(chart.dim, coeff)
                elif coeff.nvars != chart.dim:
                    raise DimensionError("coefficient polynomial has wrong variable count")
                term = acc.get(key, Poly.zero(chart.dim)) + coeff * sign
                if term:
                    acc[key] = term
                else:
                    acc.pop(key, None)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", acc)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(chart: Chart, degree: int) -> "Form":
        return Form(chart, degree)

    @staticmethod
    def scalar(chart: Chart, value) -> "Form":
        """A 0-form from a Poly or a rational constant."""
        coeff = value if isinstance(value, Poly) else Poly.constant(chart.dim, value)
        return Form(chart, 0, {(): coeff})

    @staticmethod
    def basis(chart: Chart, *indices: int, coeff=1) -> "Form":
        """The basis form  coeff * dx_{i1} ^ ... ^ dx_{ik}  (indices in any order)."""
        return Form(chart, len(indices), {tuple(indices): coeff})

    # -- vector space structure ------------------------------------------------

    def _check_chart(self, other: "Form"):
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")

    def __add__(self, other: "Form") -> "Form":
        self._check_chart(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        terms = dict(self.terms)
        for idx, p in other.terms.items():
            s = terms.get(idx, Poly.zero(self.chart.dim)) + p
            if s:
                terms[idx] = s
            else:
                terms.pop(idx, None)
        return _raw_form(self.chart, self.degree, terms)

    def __neg__(self) -> "Form":
        return _raw_form(self.chart, self.degree,
                         {i: -p for i, p in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, scalar) -> "Form":
        """Multiplication by a Poly or rational scalar (degree unchanged)."""
        if isinstance(scalar, Form):
            raise TypeError("use wedge() for products of forms")
        if not isinstance(scalar, Poly):
            scalar = Poly.constant(self.chart.dim, scalar)
        terms = {}
        for idx, p in self.terms.items():
            q = p * scalar
            if q:
                terms[idx] = q
        return _raw_form(self.chart, self.degree, terms)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return (self.chart == other.chart and self.degree == other.degree
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.chart, self.degree, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- exterior algebra ------------------------------------------------------

    def wedge(self, other: "Form") -> "Form":
        return wedge(self, other)

    def d(self) -> "Form":
        return exterior_derivative(self)

    def coefficient(self, *indices: int) -> Poly:
        """The Poly coefficient of an ascending index tuple (zero if absent)."""
        return self.terms.get(tuple(indices), Poly.zero(self.chart.dim))

    # -- serialization -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "terms": [
                {"indices": list(idx), "poly": p.to_json()}
                for idx, p in sorted(self.terms.items())
            ],
        }

    @staticmethod
    def from_json(chart: Chart, data: Mapping) -> "Form":
        return Form(chart, data["degree"], {
            tuple(t["indices"]): Poly.from_json(chart.dim, t["poly"])
            for t in data["terms"]
        })

    def __repr__(self):
        if not self.terms:
            return f"Form(degree={self.degree}, 0)"
        names = self.chart.names
        pieces = []
        for idx, p in sorted(self.terms.items()):
            basis = "^".join(f"d{names[i]}" for i in idx) or "1"
            pieces.append(f"({poly_str(p, names)})*{basis}")
        return " + ".join(pieces)


def _raw_form(chart: Chart, degree: int, terms: dict) -> Form:
    f = object.__new__(Form)
    object.__setattr__(f, "chart", chart)
    object.__setattr__(f, "degree", degree)
    object.__setattr__(f, "terms", terms)
    return f


def _normalize_indices(idx: tuple[int, ...]):
    """Sort an index tuple, tracking the permutation sign.

    Returns (sign, ascending tuple), or None if an index repeats.
    """
    lst = list(idx)
    sign = 1
    for i in range(1, len(lst)):  # insertion sort; tuples are tiny
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(lst, lst[1:]):
        if a == b:
            return None
    return sign, tuple(lst)


def _merge_ascending(a: tuple[int, ...], b: tuple[int, ...]):
    """Merge two ascending tuples with the wedge permutation sign.

    Returns (sign, merged) or None if the tuples share an index.
    """
    i = j = 0
    sign = 1
    out = []
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            if (len(a) - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def wedge(a: Form, b: Form) -> Form:
    """Exterior product.  Bilinear, associative, graded-commutative."""
    a._check_chart(b)
    degree = a.degree + b.degree
    acc: dict[tuple[int, ...], Poly] = {}
    zero = Poly.zero(a.chart.dim)
    for ia, pa in a.terms.items():
        for ib, pb in b.terms.items():
            merged = _merge_ascending(ia, ib)
            if merged is None:
                continue
            sign, key = merged
            term = acc.get(key, zero) + pa * pb * sign
            if term:
                acc[key] = term
            else:
                acc.pop(key, None)
    return _raw_form(a.chart, degree, acc)


def exterior_derivative(a: Form) -> Form:
    """Exterior derivative, raising the degree by one.

    Computed term-wise via exact partial differentiation of the coefficient
    polynomials; the derivative of a top-degree form is the zero form.
    """
    dim = a.chart.dim
    acc: dict[tuple[int, ...], Poly] = {}
    zero = Poly.zero(dim)
    for idx, p in a.terms.items():
        for v in range(dim):
            dp = p.partial(v)
            if not dp:
                continue
            merged = _merge_ascending((v,), idx)
            if merged is None:
                continue
            sign, key = merged
            term = acc.get(key, zero) + dp * sign
            if term:
                acc[key] = term
            else:
                acc.pop(key, None)
    return _raw_form(a.chart, a.degree + 1, acc)


def interior_product(a: Form, v: CoordVectorField | int) -> Form:
    """Contraction with a coordinate vector field, lowering the degree by one.

    Sign convention: contracting the j-th index of an ascending tuple
    contributes (-1)^j, j counted from zero.  A 0-form contracts to the
    zero form (not an error).
    """
    axis = v.axis if isinstance(v, CoordVectorField) else int(v)
    if not 0 <= axis < a.chart.dim:
        raise DimensionError(f"axis {axis} out of range for chart dim {a.chart.dim}")
    if a.degree == 0:
        return Form.zero(a.chart, 0)
    acc: dict[tuple[int, ...], Poly] = {}
    zero = Poly.zero(a.chart.dim)
    for idx, p in a.terms.items():
        if axis not in idx:
            continue
        j = idx.index(axis)
        key = idx[:j] + idx[j + 1:]
        term = acc.get(key, zero) + (p if j % 2 == 0 else -p)
        if term:
            acc[key] = term
        else:
            acc.pop(key, None)
    return _raw_form(a.chart, a.degree - 1, acc)


def evaluate_poly(p: Poly, point: Sequence[float]) -> float:
    """Evaluate a coefficient polynomial at a numeric chart point."""
    return p.evaluate(point)


def integrate_over_face(a: Form, axes: tuple[int, int]) -> Fraction:
    """Integrate a constant-coefficient 2-form over an oriented coordinate 2-face.

    Both face axes must be periodic variables (the face is a 2-torus of unit
    area in normalized coordinates), so the integral is the matching
    coefficient with the orientation sign of the requested axis order.
    """
    i, j = axes
    if i == j:
        raise ValueError("a face needs two distinct axes")
    if a.degree != 2:
        raise ValueError(f"face integration expects a 2-form, got degree {a.degree}")
    for ax in (i, j):
        if not 0 <= ax < a.chart.dim:
            raise DimensionError(f"axis {ax} out of range")
        if not a.chart.variables[ax].periodic:
            raise ValueError(f"axis {a.chart.names[ax]} is not periodic; not a closed face")
    key = (min(i, j), max(i, j))
    sign = 1 if i < j else -1
    coeff = a.terms.get(key)
    if coeff is None:
        return Fraction(0)
    if not coeff.is_constant():
        raise UnsupportedIntegrandError(
            f"coefficient of face {a.chart.names[i]}^{a.chart.names[j]} is not constant: {coeff}")
    return sign * coeff.constant_value()
