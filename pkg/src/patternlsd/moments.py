"""Limiting moments beta_k of S = X X^T / n and of patterned analogues.

For S the moment is a sum over special symmetric words of y^r times an integral
of the variance functions g over the generating vertices; for the patterned
matrices it is a sum over the link's admissible words of y^r times the
f-weighted word limit from :mod:`patternlsd.limits`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .circuits import LinkKind
from .combinatorics import (
    CumulantSequence,
    Word,
    bell,
    classify,
    enumerate_even_words,
    generating_profile,
    multiplicative_extension,
    narayana,
    q1_moment,
    q2_moment,
    special_symmetric_words,
)
from .limits import MCConfig, combined_limits, s_link_vertex_map, uniform_columns, _mean_se

GFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]
DEFAULT_K_CAP = 5  # 2k <= 10


def _as_fraction(y) -> Fraction:
    if isinstance(y, Fraction):
        return y
    if isinstance(y, float):
        return Fraction(repr(y))
    return Fraction(y)


def mp_moment(k: int, y) -> Fraction:
    """k-th moment of the Marchenko-Pastur law with ratio y, as an exact rational."""
    if k < 1:
        raise ValueError("k must be at least 1")
    y = _as_fraction(y)
    if y <= 0:
        raise ValueError("y must be positive")
    return sum((narayana(k, r) * y**r for r in range(k)), Fraction(0))


# ---- entry models ---------------------------------------------------------


@dataclass(frozen=True)
class MPModel:
    """Unit variance, no higher cumulants."""

    def cumulants(self) -> Optional[CumulantSequence]:
        return CumulantSequence.pairs_only(1)

    def g(self, order: int):
        return 1.0 if order == 2 else 0.0


@dataclass(frozen=True)
class CumulantModel:
    C: CumulantSequence

    def cumulants(self) -> Optional[CumulantSequence]:
        return self.C

    def g(self, order: int):
        return float(self.C[order])


@dataclass(frozen=True)
class SparseModel:
    """Bernoulli(lam / n) entries: every cumulant equals lam."""

    lam: float

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError("lam must be positive")

    def cumulants(self) -> Optional[CumulantSequence]:
        return CumulantSequence.constant(self.lam)

    def g(self, order: int):
        return float(self.lam)


@dataclass(frozen=True)
class ProfileModel:
    """g_{2k}(x, y) = sigma(x, y)^{2k} C_{2k}; the first argument is the row coordinate."""

    sigma: GFunc
    C: CumulantSequence = field(default_factory=lambda: CumulantSequence.pairs_only(1))

    def cumulants(self) -> Optional[CumulantSequence]:
        return None

    def g(self, order: int):
        c = float(self.C[order])
        if c == 0.0:
            return 0.0
        sigma = self.sigma
        return lambda x, y: c * np.asarray(sigma(x, y), dtype=float) ** order


@dataclass(frozen=True)
class GeneralGModel:
    """Arbitrary nonnegative bounded g_{2k}; missing orders are 0."""

    gfuncs: Mapping[int, Union[float, GFunc]]

    def cumulants(self) -> Optional[CumulantSequence]:
        if all(not callable(v) for v in self.gfuncs.values()):
            return CumulantSequence(dict(self.gfuncs), higher=0)
        return None

    def g(self, order: int):
        return self.gfuncs.get(order, 0.0)


EntryModel = Union[MPModel, CumulantModel, SparseModel, ProfileModel, GeneralGModel]


@dataclass(frozen=True)
class MomentResult:
    k: int
    value: float
    std_error: float = 0.0
    word_breakdown: Optional[dict] = None


@dataclass(frozen=True)
class PatternModel:
    """Patterned matrix with input-sequence functions f_{2k} of (link value / n)."""

    pattern: LinkKind
    f: Union[CumulantSequence, Mapping[int, Union[float, Callable[[np.ndarray], np.ndarray]]]]
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "pattern", LinkKind.parse(self.pattern))
        if not self.pattern.patterned:
            raise ValueError("PatternModel needs one of the eight patterned links")
        if self.y <= 0:
            raise ValueError("y must be positive")


# ---- profiles --------------------------------------------------------------


def upper_triangular(x, y):
    return (np.asarray(x) <= np.asarray(y)).astype(float)


def band(alpha: float) -> GFunc:
    """Indicator of |x - y| <= alpha."""
    return lambda x, y: (np.abs(np.asarray(x) - np.asarray(y)) <= alpha).astype(float)


def band2(alpha: float) -> GFunc:
    """Periodic band: distance on the unit circle at most alpha."""

    def sigma(x, y):
        d = np.abs(np.asarray(x) - np.asarray(y))
        return (np.minimum(d, 1.0 - d) <= alpha).astype(float)

    return sigma


_SAFE_NAMES = {name: getattr(np, name) for name in ("abs", "exp", "sqrt", "minimum", "maximum", "where", "sin", "cos", "pi")}


def expression_profile(expr: str) -> GFunc:
    """sigma from a numpy expression in x and y, e.g. ``"1 + x*y"``."""
    code = compile(expr, "<profile>", "eval")
    for name in code.co_names:
        if name not in _SAFE_NAMES and name not in ("x", "y"):
            raise ValueError(f"name {name!r} is not allowed in a profile expression")

    def sigma(x, y):
        out = eval(code, {"__builtins__": {}}, {**_SAFE_NAMES, "x": np.asarray(x), "y": np.asarray(y)})
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x, y).shape)

    return sigma


def named_profile(spec: str) -> GFunc:
    """``upper_triangular``, ``band:alpha``, ``band2:alpha`` or an expression in x, y."""
    if spec == "upper_triangular":
        return upper_triangular
    if spec.startswith("band:"):
        return band(float(spec.split(":", 1)[1]))
    if spec.startswith("band2:"):
        return band2(float(spec.split(":", 1)[1]))
    return expression_profile(spec)


# ---- S moments -------------------------------------------------------------


def _letter_pairs(w: Word) -> list[tuple[int, int]]:
    """(row variable, column variable) carried by each letter of a special symmetric word."""
    ids = s_link_vertex_map(w)
    if ids is None:
        raise ValueError(f"{w} is not special symmetric")
    pairs = []
    for pos in generating_profile(w).first_positions:
        a, b = ids[pos - 1], ids[pos]
        pairs.append((a, b) if pos % 2 else (b, a))
    return pairs


def _check_k(k: int, cap: int) -> None:
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > cap:
        raise ValueError(f"k={k} exceeds the enumeration cap {cap}")


def s_moment(
    k: int,
    y,
    model: EntryModel,
    mc: Optional[MCConfig] = None,
    k_cap: int = DEFAULT_K_CAP,
    force_mc: bool = False,
) -> MomentResult:
    """beta_k of the limiting spectral distribution of X X^T / n under an entry model."""
    _check_k(k, k_cap)
    if isinstance(model, MPModel) and not force_mc:
        return MomentResult(k, float(mp_moment(k, y)), 0.0, None)
    y = float(y)
    words = special_symmetric_words(2 * k, cap=2 * k_cap)
    C = model.cumulants()
    if C is not None and not force_mc:
        breakdown = {}
        total = 0.0
        for w in words:
            val = y ** generating_profile(w).r * float(multiplicative_extension(C, w))
            breakdown[str(w)] = val
            total += val
        return MomentResult(k, total, 0.0, breakdown)
    return _s_moment_mc(k, y, model, words, mc or MCConfig())


def _s_moment_mc(k, y, model, words, mc) -> MomentResult:
    plans = []
    breakdown: dict[str, float] = {}
    for w in words:
        gs = [model.g(o) for o in w.block_sizes()]
        if any((not callable(g)) and float(g) == 0.0 for g in gs):
            breakdown[str(w)] = 0.0
            continue
        plans.append((str(w), y ** generating_profile(w).r, _letter_pairs(w), gs, w.b + 1))
    if not plans:
        return MomentResult(k, 0.0, 0.0, breakdown)
    width = max(p[4] for p in plans)
    s = s2 = 0.0
    sums = {p[0]: 0.0 for p in plans}
    used = 0
    for shard, size in mc.shards():
        U = uniform_columns(mc, shard, size, width)
        tot = np.zeros(size)
        for name, coef, pairs, gs, _ in plans:
            val = np.full(size, coef)
            for (ri, ci), g in zip(pairs, gs):
                if callable(g):
                    val = val * np.asarray(g(U[:, ri], U[:, ci]), dtype=float)
                else:
                    val = val * float(g)
            sums[name] += float(np.sum(val))
            tot += val
        s += float(np.sum(tot))
        s2 += float(np.sum(tot * tot))
        used += size
    mean, se = _mean_se(s, s2, used)
    for name, v in sums.items():
        breakdown[name] = v / used
    return MomentResult(k, mean, se, breakdown)


def variance_profile_s_moment(k: int, y, sigma: GFunc, C: CumulantSequence, mc: Optional[MCConfig] = None) -> MomentResult:
    return s_moment(k, y, ProfileModel(sigma, C), mc)


def sparse_bounds(k: int, y, lam) -> tuple[float, float]:
    """Free-Poisson-type bounds on beta_k for Bernoulli(lam / n) entries."""
    if lam <= 0 or y <= 0:
        raise ValueError("lam and y must be positive")
    if y <= 1:
        return float(q1_moment(lam * y, 2 * k)), float(q2_moment(lam, 2 * k))
    return float(q1_moment(lam, 2 * k)), float(q2_moment(lam * y, 2 * k))


def constant_moment_bound(k: int, y, C: CumulantSequence) -> float:
    """c^k * sum over all partitions of 2k of prod |C_block|, c = max(y, 1)."""
    from .combinatorics import enumerate_words

    total = 0.0
    for w in enumerate_words(2 * k):
        total += abs(float(multiplicative_extension(C, w)))
    return max(float(y), 1.0) ** k * total


def unbounded_support_lowerbound(m: int, t: int, f_2m, nodes: int = 64) -> float:
    """((mt)! / t!) * integral over [0, 1] of (f_2m(x) / m!)^t."""
    if m < 1 or t < 1:
        raise ValueError("m and t must be positive")
    lead = Fraction(math.factorial(m * t), math.factorial(t))
    if not callable(f_2m):
        return float(lead * (_as_fraction(f_2m) / math.factorial(m)) ** t)
    x, wq = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    vals = (np.asarray(f_2m(x), dtype=float) / math.factorial(m)) ** t
    return float(lead) * 0.5 * float(np.dot(wq, vals))


# ---- patterned moments -----------------------------------------------------


def admissible_words(link: LinkKind, k: int, k_cap: int = DEFAULT_K_CAP) -> list[Word]:
    _check_k(k, k_cap)
    words = list(enumerate_even_words(2 * k, cap=2 * k_cap))
    if link in (LinkKind.T_SYM, LinkKind.C_SYM):
        return words
    return [w for w in words if classify(w).symmetric]


def sa_moment(k: int, model: PatternModel, mc: Optional[MCConfig] = None, k_cap: int = DEFAULT_K_CAP) -> MomentResult:
    """beta_k of the limit of A A^T / n for the patterned p x n matrix A."""
    link = model.pattern
    f = model.f
    weighted = []
    for w in admissible_words(link, k, k_cap):
        orders = w.block_sizes()
        if any((not callable(f[o])) and float(f[o]) == 0.0 for o in orders):
            continue
        weighted.append((w, float(model.y) ** generating_profile(w).r))
    if not weighted:
        return MomentResult(k, 0.0, 0.0, {})
    res = combined_limits(link, weighted, model.y, mc, fvals=f)
    return MomentResult(k, res.value, res.std_error, res.contributions)


__all__ = [
    "CumulantModel",
    "EntryModel",
    "GeneralGModel",
    "MPModel",
    "MomentResult",
    "PatternModel",
    "ProfileModel",
    "SparseModel",
    "admissible_words",
    "band",
    "band2",
    "bell",
    "constant_moment_bound",
    "expression_profile",
    "mp_moment",
    "named_profile",
    "s_moment",
    "sa_moment",
    "sparse_bounds",
    "unbounded_support_lowerbound",
    "upper_triangular",
    "variance_profile_s_moment",
]
