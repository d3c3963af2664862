"""Word limits lim |Pi(w)| / (p^(r+1) n^(b-r)) as p/n -> y.

Vertex values are measured in units of n, so rows live in [0, y) and columns in
[0, 1).  Every vertex of a circuit is an integer linear form in the generating
vertices (pi(0) and the first-occurrence vertices) once the branch at each
repeated position is fixed:

* difference links (Toeplitz, circulant): pi(i) = pi(i-1) + e_i * s_j, where s_j
  is the step at letter j's first occurrence and e_i = +-1;
* sum links (Hankel, reverse circulant): pi(i) = t_j - pi(i-1), t_j the sum at
  letter j's first occurrence.

Whether a branch closes the circuit (pi(2k) = pi(0)) is decided symbolically, so
inadmissible words give exactly 0.  The remaining volume is a Monte Carlo
average over uniformly sampled generating vertices.  For modular links only the
residues mod 1 are determined; a repeated row vertex then has floor(y) or
floor(y) + 1 representatives in [0, y) and the weight is their product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .circuits import LinkKind
from .combinatorics import Word, a_omega, as_word, classify, generating_profile

SIGN_CHOICE_CAP = 10**4
SUBSET_CAP = 2**12
_SNAP = 1e-9

FValues = Mapping[int, "float | Callable[[np.ndarray], np.ndarray]"]


@dataclass(frozen=True)
class MCConfig:
    samples: int = 10**6
    seed: int = 20240501
    antithetic: bool = False
    shard_size: int = 2**16

    def __post_init__(self) -> None:
        if self.samples < 1 or self.shard_size < 1:
            raise ValueError("samples and shard_size must be positive")

    def shards(self):
        """(shard index, shard length) pairs covering exactly ``samples`` draws."""
        full, rest = divmod(self.samples, self.shard_size)
        for s in range(full):
            yield s, self.shard_size
        if rest:
            yield full, rest


def uniform_columns(mc: MCConfig, shard: int, size: int, width: int) -> np.ndarray:
    """Uniforms for one shard; column c depends only on (seed, shard, c).

    Every word therefore sees the same draws in its first columns, which gives
    common random numbers across words and moment orders.
    """
    out = np.empty((size, width))
    for c in range(width):
        rng = np.random.default_rng(np.random.SeedSequence([mc.seed, shard, c]))
        if mc.antithetic:
            half = (size + 1) // 2
            u = rng.random(half)
            out[:, c] = np.concatenate([u, 1.0 - u])[:size]
        else:
            out[:, c] = rng.random(size)
    return out


@dataclass(frozen=True)
class LimitResult:
    value: float
    std_error: float = 0.0
    terms: Optional[dict] = None
    samples: int = 0


@dataclass(frozen=True)
class LinearForm:
    """An integer combination of generating vertices (units of n).

    ``coefficients[j]`` multiplies generating vertex j (0 is pi(0)); ``scale`` is
    "row" or "col" and records which range the vertex lives in; ``modular`` marks
    forms that are only determined mod 1.
    """

    coefficients: Mapping[int, Fraction]
    constant: Fraction = Fraction(0)
    scale: str = "row"
    modular: bool = False

    def __call__(self, g: np.ndarray) -> np.ndarray:
        out = np.full(g.shape[0], float(self.constant))
        for j, c in self.coefficients.items():
            out += float(c) * g[:, j]
        return out


@dataclass(frozen=True)
class SignChoice:
    """Branch sign e_i for positions 1..2k (first occurrences carry +1)."""

    signs: tuple[int, ...]


_DIFFERENCE = (LinkKind.T_SYM, LinkKind.T_ASYM, LinkKind.C_SYM, LinkKind.C_ASYM)
_FREE_SIGNS = (LinkKind.T_SYM, LinkKind.C_SYM)


def snap_y(y) -> float:
    y = float(y)
    if y <= 0:
        raise ValueError("y must be positive")
    r = round(y)
    return float(r) if r >= 1 and abs(y - r) < _SNAP else y


def _first_positions(w: Word) -> list[int]:
    return list(generating_profile(w).first_positions)


def _gen_index(w: Word) -> dict[int, int]:
    """Map position (0 or a first occurrence) to its generating-variable index."""
    out = {0: 0}
    for j, pos in enumerate(_first_positions(w), start=1):
        out[pos] = j
    return out


def admissible(link: LinkKind | str, w: Word | str) -> bool:
    link = LinkKind.parse(link)
    c = classify(as_word(w))
    if link is LinkKind.S:
        return c.special_symmetric
    if link in _FREE_SIGNS:
        return c.even
    return c.symmetric


def sign_choices(link: LinkKind | str, w: Word | str, cap: int = SIGN_CHOICE_CAP) -> list[SignChoice]:
    """Branch signs that close the circuit identically.

    Free-sign links take every per-letter balanced assignment (a_w of them).
    Parity-forced links have the single choice e_i = (-1)^(i - i_j); sum links use
    no signs and get the all-(+1) placeholder.
    """
    link = LinkKind.parse(link)
    w = as_word(w)
    m = len(w)
    if not admissible(link, w):
        return []
    first = _first_positions(w)
    if link in _FREE_SIGNS:
        total = a_omega(w)
        if total > cap:
            raise OverflowError(f"{total} sign choices exceed the cap {cap}")
        per_letter = []
        for j, positions in enumerate(w.blocks()):
            rest = positions[1:]
            half = len(positions) // 2
            options = []
            for minus in combinations(rest, half):
                options.append({i: (-1 if i in minus else 1) for i in rest})
            per_letter.append(options)
        out = []
        for combo in product(*per_letter):
            signs = [1] * m
            for d in combo:
                for i, e in d.items():
                    signs[i - 1] = e
            out.append(SignChoice(tuple(signs)))
        return out
    if link in _DIFFERENCE:
        signs = [1] * m
        for i, x in enumerate(w.letters, start=1):
            signs[i - 1] = 1 if (i - first[x - 1]) % 2 == 0 else -1
        return [SignChoice(tuple(signs))]
    return [SignChoice(tuple([1] * m))]


def vertex_forms(link: LinkKind | str, w: Word | str, sign: SignChoice) -> Optional[np.ndarray]:
    """Integer coefficients of pi(0..2k) in the generating vertices, or None if the branch does not close."""
    link = LinkKind.parse(link)
    w = as_word(w)
    m, b = len(w), w.b
    gen = _gen_index(w)
    first = _first_positions(w)
    C = np.zeros((m + 1, b + 1), dtype=np.int64)
    C[0, 0] = 1
    difference = link in _DIFFERENCE
    for i in range(1, m + 1):
        x = w.letters[i - 1]
        if i in gen:
            C[i, gen[i]] = 1
            continue
        f = first[x - 1]
        if difference:
            C[i] = C[i - 1] + sign.signs[i - 1] * (C[f] - C[f - 1])
        else:
            C[i] = (C[f] + C[f - 1]) - C[i - 1]
    # a letter first seen at position 2k makes pi(2k) generating; it must still equal pi(0)
    if not np.array_equal(C[m], C[0]):
        return None
    return C


def build_linear_forms(link: LinkKind | str, w: Word | str, sign: SignChoice) -> list[LinearForm]:
    """One form per non-generating position 1..2k-1, in position order."""
    link = LinkKind.parse(link)
    w = as_word(w)
    C = vertex_forms(link, w, sign)
    if C is None:
        raise ValueError(f"sign choice does not close the circuit for {w} under {link.value}")
    gen = _gen_index(w)
    out = []
    for i in range(1, len(w)):
        if i in gen:
            continue
        coeffs = {j: Fraction(int(c)) for j, c in enumerate(C[i]) if c}
        out.append(LinearForm(coeffs, Fraction(0), "row" if i % 2 == 0 else "col", link.modular))
    return out


def s_minus(w: Word | str) -> list[int]:
    """Even non-generating positions strictly before 2k."""
    w = as_word(w)
    gen = _gen_index(w)
    return [i for i in range(2, len(w), 2) if i not in gen]


def s_link_vertex_map(w: Word | str) -> Optional[list[int]]:
    """Generating index of every vertex pi(0..2k) for a generic S-circuit of w.

    Returns None when some repeated position forces two distinct generating
    vertices to coincide, i.e. when the generating vertices cannot all be free.
    """
    w = as_word(w)
    gen = _gen_index(w)
    ids = [0] * (len(w) + 1)
    entry: dict[int, tuple[int, int]] = {}
    for i in range(1, len(w) + 1):
        x = w.letters[i - 1]
        if i in gen:
            ids[i] = gen[i]
            a, b = ids[i - 1], ids[i]
            entry[x] = (a, b) if i % 2 else (b, a)
            continue
        row, col = entry[x]
        if i % 2:
            if ids[i - 1] != row:
                return None
            ids[i] = col
        else:
            if ids[i - 1] != col:
                return None
            ids[i] = row
    if ids[-1] != ids[0]:
        return None
    return ids


def s_link_limit(w: Word | str, y=1.0) -> LimitResult:
    w = as_word(w)
    snap_y(y)
    return LimitResult(1.0 if classify(w).special_symmetric else 0.0)


def _fvalue(fvals: Optional[FValues], order: int, arg: np.ndarray) -> np.ndarray | float:
    if fvals is None:
        return 1.0
    f = fvals[order]
    if callable(f):
        return np.asarray(f(arg), dtype=float)
    return float(f)


def _constant_f(fvals: Optional[FValues], orders) -> Optional[float]:
    """Product of the f's when they are all constants, else None."""
    if fvals is None:
        return 1.0
    out = 1.0
    for o in orders:
        f = fvals[o]
        if callable(f):
            return None
        out *= float(f)
    return out


class WordPlan:
    """Everything needed to evaluate one word's limit integrand on a batch of samples."""

    def __init__(self, link: LinkKind | str, w: Word | str, y, parameterization: str = "x"):
        self.link = LinkKind.parse(link)
        if self.link is LinkKind.S:
            raise ValueError("the S link has a closed form; use s_link_limit")
        if parameterization not in ("x", "u"):
            raise ValueError("parameterization must be 'x' or 'u'")
        if parameterization == "u" and self.link is not LinkKind.T_SYM:
            raise ValueError("the step parameterization is implemented for t_sym only")
        self.param = parameterization
        self.w = as_word(w)
        self.y = snap_y(y)
        self.m = len(self.w)
        self.b = self.w.b
        self.first = _first_positions(self.w)
        self.gen = _gen_index(self.w)
        self.orders = self.w.block_sizes()
        self.choices = sign_choices(self.link, self.w)
        self.forms = []
        for sc in self.choices:
            C = vertex_forms(self.link, self.w, sc)
            if C is None:
                raise AssertionError("admissible sign choice failed to close")
            self.forms.append((sc, C))
        self.checked = [i for i in range(1, self.m) if i not in self.gen]
        self.s_minus = s_minus(self.w)
        self.floor_y = math.floor(self.y)
        self.frac_y = self.y - self.floor_y
        self.integer_y = self.frac_y == 0.0

    @property
    def dim(self) -> int:
        return self.b + 1

    @property
    def zero(self) -> bool:
        return not self.forms

    def _is_row(self, j: int) -> bool:
        return j == 0 or self.first[j - 1] % 2 == 0

    def scale_uniforms(self, U: np.ndarray) -> np.ndarray:
        """Generating vertices from uniforms: rows on [0, y), columns on [0, 1)."""
        g = U[:, : self.dim].copy()
        for j in range(self.dim):
            if self._is_row(j):
                g[:, j] *= self.y
        return g

    def exact_value(self, fvals: Optional[FValues]) -> Optional[float]:
        """Closed-form value when no sampling is needed, else None."""
        if self.zero:
            return 0.0
        fconst = _constant_f(fvals, self.orders)
        if fconst is None:
            return None
        if self.link in (LinkKind.R_SYM, LinkKind.C_SYM, LinkKind.C_ASYM):
            if self.integer_y:
                return fconst * len(self.forms) * self.floor_y ** len(self.s_minus)
            return None
        if self.link in (LinkKind.H_ASYM, LinkKind.R_ASYM):
            return None
        if not self.checked:
            return fconst * len(self.forms)
        return None

    # ---- integrands -------------------------------------------------------

    def weights(self, U: np.ndarray, fvals: Optional[FValues] = None, with_terms: bool = False):
        """Per-sample integrand summed over sign choices (and S0 terms when requested)."""
        N = U.shape[0]
        total = np.zeros(N)
        terms: dict[str, np.ndarray] = {}
        if self.zero:
            return (total, terms) if with_terms else total
        if self.param == "u":
            total = self._weights_steps(U, fvals)
            return (total, terms) if with_terms else total
        g = self.scale_uniforms(U)
        for sc, C in self.forms:
            V = g @ C.T.astype(float)
            if self.link.modular:
                wgt = self._weights_modular(g, V, fvals, terms if with_terms else None)
            else:
                wgt = self._weights_plain(V, fvals)
            total += wgt
        return (total, terms) if with_terms else total

    def _entry(self, V: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = V[:, i - 1], V[:, i]
        return (a, b) if i % 2 else (b, a)

    def _letter_values(self, V: np.ndarray) -> list[np.ndarray]:
        """Link value (units of n) of each letter, read at its first occurrence."""
        out = []
        for pos in self.first:
            r, c = self._entry(V, pos)
            out.append(_continuum_link(self.link, r, c))
        return out

    def _fproduct(self, L: Sequence[np.ndarray], fvals: Optional[FValues]):
        out = 1.0
        if fvals is None:
            return out
        for j, order in enumerate(self.orders):
            out = out * _fvalue(fvals, order, L[j])
        return out

    def _in_range(self, V: np.ndarray) -> np.ndarray:
        ok = np.ones(V.shape[0], dtype=bool)
        for i in self.checked:
            v = V[:, i]
            top = self.y if i % 2 == 0 else 1.0
            ok &= (v >= 0.0) & (v < top)
        return ok

    def _weights_plain(self, V: np.ndarray, fvals: Optional[FValues]) -> np.ndarray:
        ok = self._in_range(V)
        if self.link is LinkKind.H_ASYM:
            ok &= self._orientation_consistent(V)
        L = self._letter_values(V)
        return ok * self._fproduct(L, fvals)

    def _orientation_consistent(self, V: np.ndarray) -> np.ndarray:
        """Every position of a letter has the same sign of row - col as its first occurrence."""
        ok = np.ones(V.shape[0], dtype=bool)
        ref = {}
        for i in range(1, self.m + 1):
            r, c = self._entry(V, i)
            o = r >= c
            x = self.w.letters[i - 1]
            if x not in ref:
                ref[x] = o
            else:
                ok &= o == ref[x]
        return ok

    def _weights_modular(self, g, V, fvals, terms) -> np.ndarray:
        R = V - np.floor(V)  # residues; generating vertices keep their sampled value
        for i in self.gen:
            if i < self.m:
                R[:, i] = V[:, i]
        R[:, self.m] = R[:, 0]
        L = self._letter_values(R)
        if self.link is LinkKind.R_ASYM:
            return self._weights_orientations(R, L, fvals)
        fprod = self._fproduct(L, fvals)
        below = {i: R[:, i] < self.frac_y for i in self.s_minus}
        if self.y < 1.0:
            # only m = 0 can fit, and only when the residue is below y
            count = np.ones(V.shape[0])
            for i in self.s_minus:
                count = count * below[i]
        else:
            count = np.ones(V.shape[0])
            for i in self.s_minus:
                count = count * (self.floor_y + below[i])
        if terms is not None:
            self._accumulate_terms(terms, below, fprod, V.shape[0])
        return count * fprod

    def _accumulate_terms(self, terms, below, fprod, N) -> None:
        sm = self.s_minus
        if 2 ** len(sm) > SUBSET_CAP:
            raise OverflowError(f"{2 ** len(sm)} subsets exceed the cap {SUBSET_CAP}")
        key = "floor_power"
        base = np.full(N, float(self.floor_y ** len(sm))) * fprod
        terms[key] = terms.get(key, 0.0) + base
        for size in range(1, len(sm) + 1):
            for S0 in combinations(sm, size):
                coef = self.floor_y ** (len(sm) - size)
                name = "S0=" + ",".join(map(str, S0))
                if self.integer_y or coef == 0:
                    val = np.zeros(N)
                else:
                    ind = np.ones(N, dtype=bool)
                    for i in S0:
                        ind &= below[i]
                    val = coef * ind * fprod
                terms[name] = terms.get(name, 0.0) + val

    def _weights_orientations(self, R, L, fvals) -> np.ndarray:
        """Reverse circulant with signs: sum over per-letter orientation assignments."""
        N = R.shape[0]
        m = self.m
        letters = self.w.letters
        rows = list(range(0, m, 2))
        total = np.zeros(N)
        for o in product((True, False), repeat=self.b):
            prod_ = np.ones(N)
            for t in rows:
                left = m if t == 0 else t  # edge before this row vertex
                right = t + 1
                ol, orr = o[letters[left - 1] - 1], o[letters[right - 1] - 1]
                cl = R[:, left - 1] if t else R[:, m - 1]
                cr = R[:, right]
                val = R[:, t]
                fixed = t in self.gen
                pos0 = ((val <= cl) == ol) & ((val <= cr) == orr)
                if fixed:
                    prod_ = prod_ * pos0
                else:
                    fits = val < self.y
                    reps = np.floor(self.y - val) + (np.ceil(self.y - val) > np.floor(self.y - val))
                    reps = np.where(fits, reps, 0.0)  # representatives val + j < y
                    extra = np.maximum(reps - 1, 0) * ((not ol) and (not orr))
                    prod_ = prod_ * (fits * pos0 + extra)
            if fvals is not None:
                fprod = 1.0
                for j, order in enumerate(self.orders):
                    sign = 1.0 if o[j] else -1.0
                    fprod = fprod * _fvalue(fvals, order, sign * L[j])
                prod_ = prod_ * fprod
            total += prod_
        return total

    def _weights_steps(self, U: np.ndarray, fvals: Optional[FValues]) -> np.ndarray:
        """Symmetric Toeplitz in step variables: pi(0) on [0, y), steps on [-1, y] or [-y, 1]."""
        N = U.shape[0]
        x0 = U[:, 0] * self.y
        steps = np.empty((N, self.b))
        box = self.y
        for j, pos in enumerate(self.first):
            if pos % 2 == 0:
                steps[:, j] = -1.0 + (1.0 + self.y) * U[:, j + 1]
            else:
                steps[:, j] = -self.y + (1.0 + self.y) * U[:, j + 1]
            box *= 1.0 + self.y
        norm = box / self.y ** generating_profile(self.w).even_gen
        total = np.zeros(N)
        for sc, _ in self.forms:
            v = x0.copy()
            ok = np.ones(N, dtype=bool)
            for i in range(1, self.m):
                x = self.w.letters[i - 1]
                v = v + sc.signs[i - 1] * steps[:, x - 1]
                top = self.y if i % 2 == 0 else 1.0
                ok &= (v >= 0.0) & (v < top)
            L = [np.abs(steps[:, j]) for j in range(self.b)]
            total += ok * self._fproduct(L, fvals)
        return total * norm


def _continuum_link(link: LinkKind, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Link value divided by n in the limit (index offsets vanish)."""
    if link is LinkKind.T_SYM:
        return np.abs(r - c)
    if link is LinkKind.T_ASYM:
        return r - c
    if link is LinkKind.H_SYM:
        return r + c
    if link is LinkKind.H_ASYM:
        return np.where(r >= c, r + c, -(r + c))
    if link is LinkKind.R_SYM:
        s = r + c
        return s - np.floor(s)
    if link is LinkKind.R_ASYM:
        s = r + c
        return s - np.floor(s)  # sign handled by the orientation sum
    if link is LinkKind.C_SYM:
        d = (r - c) - np.floor(r - c)
        return np.minimum(d, 1.0 - d)
    d = c - r
    return d - np.floor(d)


def _mean_se(total: float, total_sq: float, N: int) -> tuple[float, float]:
    mean = total / N
    if N < 2:
        return mean, float("nan")
    var = max(total_sq / N - mean * mean, 0.0) * N / (N - 1)
    return mean, math.sqrt(var / N)


def word_limit(
    link: LinkKind | str,
    w: Word | str,
    y,
    mc: Optional[MCConfig] = None,
    fvals: Optional[FValues] = None,
    parameterization: str = "x",
    with_terms: bool = True,
) -> LimitResult:
    """Limit of the normalized circuit count of w under the link, optionally f-weighted."""
    link = LinkKind.parse(link)
    w = as_word(w)
    if link is LinkKind.S:
        return s_link_limit(w, y)
    mc = mc or MCConfig()
    plan = WordPlan(link, w, y, parameterization)
    exact = plan.exact_value(fvals) if parameterization == "x" else (0.0 if plan.zero else None)
    if exact is not None:
        terms = None
        if link.modular and not plan.zero and link is not LinkKind.R_ASYM:
            terms = {"floor_power": exact}
            for size in range(1, len(plan.s_minus) + 1):
                for S0 in combinations(plan.s_minus, size):
                    terms["S0=" + ",".join(map(str, S0))] = 0.0
        return LimitResult(float(exact), 0.0, terms, 0)
    want_terms = with_terms and link.modular and link is not LinkKind.R_ASYM
    s = s2 = 0.0
    term_sums: dict[str, float] = {}
    used = 0
    for shard, size in mc.shards():
        U = uniform_columns(mc, shard, size, plan.dim)
        if want_terms:
            wts, terms = plan.weights(U, fvals, with_terms=True)
            for key, val in terms.items():
                term_sums[key] = term_sums.get(key, 0.0) + float(np.sum(val))
        else:
            wts = plan.weights(U, fvals)
        s += float(np.sum(wts))
        s2 += float(np.sum(wts * wts))
        used += size
    mean, se = _mean_se(s, s2, used)
    terms_out = {k: v / used for k, v in term_sums.items()} if want_terms else None
    return LimitResult(mean, se, terms_out, used)


def toeplitz_sym_limit(w, y, mc: Optional[MCConfig] = None, parameterization: str = "x") -> LimitResult:
    return word_limit(LinkKind.T_SYM, w, y, mc, parameterization=parameterization)


def toeplitz_asym_limit(w, y, mc: Optional[MCConfig] = None) -> LimitResult:
    return word_limit(LinkKind.T_ASYM, w, y, mc)


def hankel_sym_limit(w, y, mc: Optional[MCConfig] = None) -> LimitResult:
    return word_limit(LinkKind.H_SYM, w, y, mc)


def hankel_asym_limit(w, y, mc: Optional[MCConfig] = None) -> LimitResult:
    return word_limit(LinkKind.H_ASYM, w, y, mc)


def revcirc_limit(w, y, mc: Optional[MCConfig] = None, variant: str = "sym") -> LimitResult:
    return word_limit(_variant(LinkKind.R_SYM, LinkKind.R_ASYM, variant), w, y, mc)


def circ_limit(w, y, mc: Optional[MCConfig] = None, variant: str = "sym") -> LimitResult:
    return word_limit(_variant(LinkKind.C_SYM, LinkKind.C_ASYM, variant), w, y, mc)


def _variant(sym: LinkKind, asym: LinkKind, variant: str) -> LinkKind:
    if variant == "sym":
        return sym
    if variant == "asym":
        return asym
    raise ValueError("variant must be 'sym' or 'asym'")


@dataclass(frozen=True)
class CombinedResult:
    value: float
    std_error: float
    contributions: dict
    samples: int


def combined_limits(
    link: LinkKind | str,
    weighted_words: Sequence[tuple[Word, float]],
    y,
    mc: Optional[MCConfig] = None,
    fvals: Optional[FValues] = None,
) -> CombinedResult:
    """Sum of coef * f-weighted word limits, sampled jointly so the error bar is for the sum.

    All words share the same uniforms (common random numbers), so the standard
    error comes from per-sample totals rather than adding word variances.
    """
    link = LinkKind.parse(link)
    mc = mc or MCConfig()
    exact_total = 0.0
    contributions: dict[str, float] = {}
    sampled: list[tuple[str, float, WordPlan]] = []
    for w, coef in weighted_words:
        w = as_word(w)
        if link is LinkKind.S:
            val = coef * s_link_limit(w, y).value
            exact_total += val
            contributions[str(w)] = val
            continue
        plan = WordPlan(link, w, y)
        exact = plan.exact_value(fvals)
        if exact is not None:
            exact_total += coef * exact
            contributions[str(w)] = coef * exact
        else:
            sampled.append((str(w), coef, plan))
    if not sampled:
        return CombinedResult(exact_total, 0.0, contributions, 0)
    width = max(plan.dim for _, _, plan in sampled)
    s = s2 = 0.0
    word_sums = {name: 0.0 for name, _, _ in sampled}
    used = 0
    for shard, size in mc.shards():
        U = uniform_columns(mc, shard, size, width)
        tot = np.zeros(size)
        for name, coef, plan in sampled:
            wts = coef * plan.weights(U, fvals)
            word_sums[name] += float(np.sum(wts))
            tot += wts
        s += float(np.sum(tot))
        s2 += float(np.sum(tot * tot))
        used += size
    mean, se = _mean_se(s, s2, used)
    for name, val in word_sums.items():
        contributions[name] = val / used
    return CombinedResult(exact_total + mean, se, contributions, used)
