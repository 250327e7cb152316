"""Exact algebra of fuzzy processes over a finite execution universe.

A process is a pair of total membership maps (delta, gamma) from the
universe into the rational interval [0, 1].  ``delta`` is the degree to
which an execution is accessible to the environment, ``gamma`` the degree
to which the device accepts it.  All arithmetic is done with
:class:`fractions.Fraction`; there is no floating point anywhere in here.

Operations are pure and results of the binary operations are memoized,
which keeps the exhaustive law sweeps cheap.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import functools
import warnings
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

ZERO = Fraction(0)
ONE = Fraction(1)

Membership = Fraction
Rational = Union[Fraction, int, str]


class AlgebraError(ValueError):
    """Base class for validation errors raised by the algebra."""


class UnknownLabelError(AlgebraError):
    def __init__(self, label: str):
        super().__init__(f"unknown execution label {label!r}")
        self.label = label


class MembershipRangeError(AlgebraError):
    def __init__(self, value, label: str | None = None):
        where = f" for label {label!r}" if label is not None else ""
        super().__init__(f"membership value {value} out of range [0, 1]{where}")
        self.value = value
        self.label = label


class UniverseMismatchError(AlgebraError):
    pass


class NonTotalWarning(UserWarning):
    """Issued when a result's guarantee needs a process without rejections."""


def membership(value: Rational) -> Fraction:
    """Coerce ``value`` to an exact membership degree in [0, 1].

    Strings may be ``"n"``, ``"n/d"`` or a finite decimal such as ``"0.25"``;
    floats are refused because they are not exact.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"membership must be exact, got {type(value).__name__}")
    try:
        frac = Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise AlgebraError(f"not a rational: {value!r}") from exc
    if frac < 0 or frac > 1:
        raise MembershipRangeError(frac)
    return frac


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class ExecutionUniverse:
    """Ordered finite set of execution labels.

    The construction order is the canonical order used for all output.
    """

    __slots__ = ("labels", "_index", "_hash")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        if not labels:
            raise AlgebraError("universe must contain at least one execution")
        index: dict[str, int] = {}
        for i, label in enumerate(labels):
            if not isinstance(label, str) or not label:
                raise AlgebraError(f"invalid execution label {label!r}")
            if label in index:
                raise AlgebraError(f"duplicate execution label {label!r}")
            index[label] = i
        self.labels = labels
        self._index = index
        self._hash = hash(labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabelError(label) from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, ExecutionUniverse):
            return NotImplemented
        return self.labels == other.labels

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ExecutionUniverse({list(self.labels)!r})"


class Shadow(enum.Enum):
    """Crisp state of one execution: membership in the two supports."""

    B = (False, False)
    X = (True, False)
    Y = (False, True)
    XY = (True, True)

    @property
    def in_x(self) -> bool:
        return self.value[0]

    @property
    def in_y(self) -> bool:
        return self.value[1]


# Equal process values share one instance, so equality and memo lookups on
# hot paths short-circuit on identity.
_INTERNED: dict = {}
_INTERN_LIMIT = 1 << 20


class FuzzyProcess:
    """Immutable process ``(delta, gamma)`` over an :class:`ExecutionUniverse`.

    ``dvals`` and ``gvals`` hold the memberships aligned with
    ``universe.labels``.  Use :func:`make_process` for validated
    construction from label maps.
    """

    __slots__ = ("universe", "dvals", "gvals", "_hash")

    def __new__(cls, universe: ExecutionUniverse, dvals: tuple, gvals: tuple):
        key = (universe, dvals, gvals)
        self = _INTERNED.get(key)
        if self is not None:
            return self
        if len(_INTERNED) >= _INTERN_LIMIT:
            _INTERNED.clear()
        self = object.__new__(cls)
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "dvals", dvals)
        object.__setattr__(self, "gvals", gvals)
        object.__setattr__(self, "_hash", hash(key))
        _INTERNED[key] = self
        return self

    def __reduce__(self):
        return (FuzzyProcess, (self.universe, self.dvals, self.gvals))

    @property
    def delta(self) -> dict[str, Fraction]:
        return dict(zip(self.universe.labels, self.dvals))

    @property
    def gamma(self) -> dict[str, Fraction]:
        return dict(zip(self.universe.labels, self.gvals))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if other.__class__ is not FuzzyProcess:
            return NotImplemented
        return (
            self._hash == other._hash
            and self.dvals == other.dvals
            and self.gvals == other.gvals
            and self.universe == other.universe
        )

    def __hash__(self) -> int:
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError("FuzzyProcess is immutable")

    def __repr__(self) -> str:
        def fmt(vals):
            return ", ".join(
                f"{label}: {v}" for label, v in zip(self.universe.labels, vals) if v
            )

        return f"FuzzyProcess(delta={{{fmt(self.dvals)}}}, gamma={{{fmt(self.gvals)}}})"


def make_process(
    universe: ExecutionUniverse,
    delta: Mapping[str, Rational] | None = None,
    gamma: Mapping[str, Rational] | None = None,
) -> FuzzyProcess:
    """Build a validated process; labels missing from a map get membership 0."""
    dvals = [ZERO] * len(universe)
    gvals = [ZERO] * len(universe)
    for target, mapping in ((dvals, delta), (gvals, gamma)):
        for label, value in (mapping or {}).items():
            i = universe.index(label)
            try:
                target[i] = membership(value)
            except MembershipRangeError as exc:
                raise MembershipRangeError(exc.value, label) from None
    return FuzzyProcess(universe, tuple(dvals), tuple(gvals))


def constant_process(universe: ExecutionUniverse, delta: Rational, gamma: Rational) -> FuzzyProcess:
    d, g = membership(delta), membership(gamma)
    n = len(universe)
    return FuzzyProcess(universe, (d,) * n, (g,) * n)


def omega(universe: ExecutionUniverse) -> FuzzyProcess:
    """The all-ones process: unit of the product."""
    return constant_process(universe, ONE, ONE)


class Supports(NamedTuple):
    X: frozenset
    Y: frozenset
    B: frozenset


def supports(p: FuzzyProcess) -> Supports:
    labels = p.universe.labels
    xs = frozenset(l for l, d in zip(labels, p.dvals) if d)
    ys = frozenset(l for l, g in zip(labels, p.gvals) if g)
    return Supports(xs, ys, frozenset(labels) - xs - ys)


def shadow(p: FuzzyProcess) -> tuple[Shadow, ...]:
    return tuple(Shadow((bool(d), bool(g))) for d, g in zip(p.dvals, p.gvals))


def rejections(p: FuzzyProcess) -> list[str]:
    """Labels in B, in canonical order."""
    return [l for l, d, g in zip(p.universe.labels, p.dvals, p.gvals) if not d and not g]


@functools.lru_cache(maxsize=1 << 17)
def is_total(p: FuzzyProcess) -> bool:
    return all(d or g for d, g in zip(p.dvals, p.gvals))


def _same_universe(p: FuzzyProcess, q: FuzzyProcess) -> None:
    if p.universe is not q.universe and p.universe != q.universe:
        raise UniverseMismatchError(
            f"processes live on different universes: {list(p.universe)} vs {list(q.universe)}"
        )


@functools.lru_cache(maxsize=1 << 17)
def fuzzy_refines(p: FuzzyProcess, q: FuzzyProcess) -> bool:
    """Pointwise refinement ``p ⊑ q``: delta_p >= delta_q and gamma_p <= gamma_q."""
    _same_universe(p, q)
    return all(a >= b for a, b in zip(p.dvals, q.dvals)) and all(
        a <= b for a, b in zip(p.gvals, q.gvals)
    )


@functools.lru_cache(maxsize=1 << 17)
def support_refines(p: FuzzyProcess, q: FuzzyProcess) -> bool:
    """Crisp refinement: X_p contains X_q and Y_p is contained in Y_q."""
    _same_universe(p, q)
    return all(a or not b for a, b in zip(p.dvals, q.dvals)) and all(
        b or not a for a, b in zip(p.gvals, q.gvals)
    )


def refinement_witness(p: FuzzyProcess, q: FuzzyProcess, *, support: bool = False) -> str | None:
    """First label (canonical order) where ``p ⊑ q`` breaks, or None."""
    _same_universe(p, q)
    for label, dp, gp, dq, gq in zip(p.universe.labels, p.dvals, p.gvals, q.dvals, q.gvals):
        if support:
            bad = (dq and not dp) or (gp and not gq)
        else:
            bad = dp < dq or gp > gq
        if bad:
            return label
    return None


# Membership assigned on the product's vacuous clauses.  Exposed as a hook so
# alternative constants can be explored by the law harness.
_VACUOUS: contextvars.ContextVar[Fraction] = contextvars.ContextVar("vacuous", default=ONE)


def vacuous_value() -> Fraction:
    return _VACUOUS.get()


@contextlib.contextmanager
def vacuous_constant(value: Rational):
    token = _VACUOUS.set(membership(value))
    try:
        yield
    finally:
        _VACUOUS.reset(token)


@functools.lru_cache(maxsize=1 << 17)
def _product(p: FuzzyProcess, q: FuzzyProcess, vac: Fraction) -> FuzzyProcess:
    _same_universe(p, q)
    dvals = []
    gvals = []
    for dp, gp, dq, gq in zip(p.dvals, p.gvals, q.dvals, q.gvals):
        dvals.append(dp if dp <= dq else dq)
        if gp and gq:
            gvals.append(gp if gp <= gq else gq)
        elif (not dp and not gq) or (not gp and not dq):
            gvals.append(vac)
        else:
            gvals.append(ZERO)
    return FuzzyProcess(p.universe, tuple(dvals), tuple(gvals))


def product(p: FuzzyProcess, q: FuzzyProcess) -> FuzzyProcess:
    """Parallel composition ``p ⊗ q``.

    delta is the pointwise min.  gamma is the min where both accept, the
    vacuous constant (1 by default) where one side is neither accessible
    to the other nor accepted by it, and 0 elsewhere.
    """
    _same_universe(p, q)
    return _product(p, q, _VACUOUS.get())


@functools.lru_cache(maxsize=1 << 17)
def _sum(p: FuzzyProcess, q: FuzzyProcess, vac: Fraction) -> FuzzyProcess:
    _same_universe(p, q)
    dvals = []
    gvals = []
    for dp, gp, dq, gq in zip(p.dvals, p.gvals, q.dvals, q.gvals):
        gvals.append(gp if gp <= gq else gq)
        if dp and dq:
            dvals.append(dp if dp <= dq else dq)
        elif (not gp and not dq) or (not dp and not gq):
            dvals.append(vac)
        else:
            dvals.append(ZERO)
    return FuzzyProcess(p.universe, tuple(dvals), tuple(gvals))


def sum(p: FuzzyProcess, q: FuzzyProcess) -> FuzzyProcess:  # noqa: A001
    """``p ⊕ q``, the dual of the product under reflection (closed form)."""
    return _sum(p, q, _VACUOUS.get())


def sum_by_duality(p: FuzzyProcess, q: FuzzyProcess) -> FuzzyProcess:
    return reflect(product(reflect(p), reflect(q)))


def reflect(p: FuzzyProcess) -> FuzzyProcess:
    """``-p``: swap device and environment roles."""
    return FuzzyProcess(p.universe, p.gvals, p.dvals)


@functools.lru_cache(maxsize=1 << 17)
def join(p: FuzzyProcess, q: FuzzyProcess) -> FuzzyProcess:
    """Least upper bound under :func:`fuzzy_refines` (pointwise min delta, max gamma)."""
    _same_universe(p, q)
    return FuzzyProcess(
        p.universe,
        tuple(a if a <= b else b for a, b in zip(p.dvals, q.dvals)),
        tuple(b if a <= b else a for a, b in zip(p.gvals, q.gvals)),
    )


@functools.lru_cache(maxsize=1 << 17)
def meet(p: FuzzyProcess, q: FuzzyProcess) -> FuzzyProcess:
    """Greatest lower bound under :func:`fuzzy_refines`."""
    _same_universe(p, q)
    return FuzzyProcess(
        p.universe,
        tuple(b if a <= b else a for a, b in zip(p.dvals, q.dvals)),
        tuple(a if a <= b else b for a, b in zip(p.gvals, q.gvals)),
    )


@functools.lru_cache(maxsize=1 << 17)
def is_robust(p: FuzzyProcess) -> bool:
    return all(g == ONE for g in p.gvals)


@functools.lru_cache(maxsize=1 << 17)
def is_chaotic(p: FuzzyProcess) -> bool:
    return all(d == ONE for d in p.dvals)


@functools.lru_cache(maxsize=1 << 17)
def is_robust_support(p: FuzzyProcess) -> bool:
    return all(p.gvals)


@functools.lru_cache(maxsize=1 << 17)
def is_chaotic_support(p: FuzzyProcess) -> bool:
    return all(p.dvals)


def factor(p: FuzzyProcess) -> tuple[FuzzyProcess, FuzzyProcess]:
    """Split ``p`` into a robust and a chaotic factor.

    Returns ``(p ⊔ Ω, p ⊓ Ω)``.  Their product is ``p`` exactly when ``p``
    has no rejections; otherwise a :class:`NonTotalWarning` is issued.
    """
    w = omega(p.universe)
    if not is_total(p):
        warnings.warn(
            NonTotalWarning(
                f"process has rejections {rejections(p)}; factors need not reconstruct it"
            ),
            stacklevel=2,
        )
    return join(p, w), meet(p, w)


def process_to_json(p: FuzzyProcess) -> dict:
    labels = p.universe.labels
    return {
        "universe": list(labels),
        "delta": {l: format_rational(v) for l, v in zip(labels, p.dvals) if v},
        "gamma": {l: format_rational(v) for l, v in zip(labels, p.gvals) if v},
    }


def process_from_json(obj: Mapping, universe: ExecutionUniverse | None = None) -> FuzzyProcess:
    u = ExecutionUniverse(obj["universe"])
    if universe is not None:
        if u != universe:
            raise UniverseMismatchError("serialized universe differs from the expected one")
        u = universe
    for key in ("delta", "gamma"):
        for value in obj.get(key, {}).values():
            if not isinstance(value, str):
                raise AlgebraError(f"{key} values must be rational strings, got {value!r}")
    return make_process(u, obj.get("delta"), obj.get("gamma"))


def clear_caches() -> None:
    """Drop memoized results and interned processes (used for cold timings)."""
    for fn in (_product, _sum, join, meet, fuzzy_refines, support_refines,
               is_robust, is_chaotic, is_robust_support, is_chaotic_support, is_total):
        fn.cache_clear()
    _INTERNED.clear()
