"""Words (set partitions of [m] in restricted-growth form) and their combinatorics.

A word of length m lists, for each position, the block its position belongs to.
Letters are numbered 1..b in order of first appearance, so every partition has
exactly one canonical word.  Everything here is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import groupby
from math import comb
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

DEFAULT_CAP = 12

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class EnumerationCapError(ValueError):
    """Raised when an enumeration would exceed its configured size cap."""


@dataclass(frozen=True, order=True)
class Word:
    """A canonical word: restricted-growth letters 1..b."""

    letters: tuple[int, ...]

    def __post_init__(self) -> None:
        letters = tuple(int(x) for x in self.letters)
        object.__setattr__(self, "letters", letters)
        if not letters:
            raise ValueError("a word must be nonempty")
        top = 0
        for x in letters:
            if x < 1 or x > top + 1:
                raise ValueError(f"{letters} is not in restricted-growth form")
            top = max(top, x)

    @classmethod
    def _trusted(cls, letters: tuple[int, ...]) -> "Word":
        w = object.__new__(cls)
        object.__setattr__(w, "letters", letters)
        return w

    @classmethod
    def parse(cls, text: str | Sequence[Hashable]) -> "Word":
        return canonicalize(text)

    @property
    def b(self) -> int:
        return max(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __str__(self) -> str:
        if self.b <= len(_ALPHABET):
            return "".join(_ALPHABET[x - 1] for x in self.letters)
        return "-".join(str(x) for x in self.letters)

    def blocks(self) -> list[list[int]]:
        """Blocks as lists of 1-based positions, ordered by letter."""
        out: list[list[int]] = [[] for _ in range(self.b)]
        for pos, x in enumerate(self.letters, start=1):
            out[x - 1].append(pos)
        return out

    def block_sizes(self) -> tuple[int, ...]:
        counts = [0] * (self.b + 1)
        for x in self.letters:
            counts[x] += 1
        return tuple(counts[1:])


def as_word(w: Word | str | Sequence[Hashable]) -> Word:
    return w if isinstance(w, Word) else canonicalize(w)


def canonicalize(seq: str | Sequence[Hashable]) -> Word:
    """Relabel symbols by order of first occurrence."""
    if len(seq) == 0:
        raise ValueError("cannot canonicalize an empty sequence")
    labels: dict[Hashable, int] = {}
    out = []
    for s in seq:
        if s not in labels:
            labels[s] = len(labels) + 1
        out.append(labels[s])
    return Word._trusted(tuple(out))


@dataclass(frozen=True)
class WordClass:
    matched: bool
    pair_matched: bool
    even: bool
    symmetric: bool
    special_symmetric: bool
    noncrossing_pair: bool
    even_blocks: bool
    noncrossing: bool = False


@dataclass(frozen=True)
class GeneratingProfile:
    length_m: int
    b: int
    first_positions: tuple[int, ...]
    even_gen: int
    odd_gen: int
    block_sizes: tuple[int, ...]

    @property
    def r(self) -> int:
        return self.even_gen - 1


def _is_noncrossing(letters: Sequence[int], last: Mapping[int, int]) -> bool:
    # a letter that reappears must be the innermost open block
    stack: list[int] = []
    opened: set[int] = set()
    for pos, x in enumerate(letters):
        if x not in opened:
            opened.add(x)
            stack.append(x)
        elif stack[-1] != x:
            return False
        if last[x] == pos:
            stack.pop()
    return True


def _gaps_even(letters: Sequence[int]) -> bool:
    """Between successive occurrences of a letter, every other letter occurs an even number of times."""
    previous: dict[int, int] = {}
    # parity vector of letter counts in each prefix, as a bitmask
    prefix = [0]
    for x in letters:
        prefix.append(prefix[-1] ^ (1 << x))
    for pos, x in enumerate(letters):
        if x in previous:
            between = prefix[pos] ^ prefix[previous[x] + 1]
            if between:
                return False
        previous[x] = pos
    return True


def classify(w: Word | str) -> WordClass:
    w = as_word(w)
    letters = w.letters
    b = max(letters)
    sizes = [0] * (b + 1)
    odd_pos = [0] * (b + 1)
    last = [0] * (b + 1)
    for pos, x in enumerate(letters):
        sizes[x] += 1
        if not pos & 1:  # 1-based odd position
            odd_pos[x] += 1
        last[x] = pos
    sizes = sizes[1:]
    matched = min(sizes) >= 2
    pair = max(sizes) == 2 and matched
    even = not len(letters) & 1 and not any(s & 1 for s in sizes)
    symmetric = all(2 * odd_pos[j + 1] == sizes[j] for j in range(b))
    ss = even and _gaps_even(letters)
    noncrossing = _is_noncrossing(letters, last)
    return WordClass(
        matched=matched,
        pair_matched=pair,
        even=even,
        symmetric=symmetric,
        special_symmetric=ss,
        noncrossing_pair=pair and noncrossing,
        even_blocks=even,
        noncrossing=noncrossing,
    )


def generating_profile(w: Word | str) -> GeneratingProfile:
    w = as_word(w)
    first: list[int] = []
    seen: set[int] = set()
    for pos, x in enumerate(w.letters, start=1):
        if x not in seen:
            seen.add(x)
            first.append(pos)
    even_first = sum(1 for i in first if i % 2 == 0)
    return GeneratingProfile(
        length_m=len(w),
        b=w.b,
        first_positions=tuple(first),
        even_gen=1 + even_first,
        odd_gen=len(first) - even_first,
        block_sizes=w.block_sizes(),
    )


def _check_cap(m: int, cap: int) -> None:
    if m < 1:
        raise ValueError("word length must be positive")
    if m > cap:
        raise EnumerationCapError(f"length {m} exceeds the enumeration cap {cap}")


def enumerate_words(
    m: int,
    filter: Optional[Callable[[WordClass], bool]] = None,
    cap: int = DEFAULT_CAP,
) -> Iterator[Word]:
    """Every partition of [m] once, in lexicographic restricted-growth order."""
    _check_cap(m, cap)
    letters = [1] * m
    top = [1] * m  # running max of letters[0..i]
    while True:
        w = Word._trusted(tuple(letters))
        if filter is None or filter(classify(w)):
            yield w
        # next restricted-growth string
        i = m - 1
        while i > 0 and letters[i] > top[i - 1]:
            i -= 1
        if i == 0:
            return
        letters[i] += 1
        top[i] = max(top[i - 1], letters[i])
        for j in range(i + 1, m):
            letters[j] = 1
            top[j] = top[i]


def enumerate_even_words(m: int, cap: int = DEFAULT_CAP, pair_only: bool = False) -> Iterator[Word]:
    """Partitions of [m] whose blocks all have even size (pruned search)."""
    _check_cap(m, cap)
    if m % 2:
        return
    letters: list[int] = []
    counts: list[int] = [0]

    def rec(odd: int) -> Iterator[Word]:
        remaining = m - len(letters)
        if odd > remaining:
            return
        if remaining == 0:
            yield Word._trusted(tuple(letters))
            return
        b = len(counts) - 1
        for x in range(1, b + 2):
            if x == b + 1:
                counts.append(0)
            if pair_only and counts[x] == 2:
                continue
            counts[x] += 1
            letters.append(x)
            yield from rec(odd + (1 if counts[x] % 2 else -1))
            letters.pop()
            counts[x] -= 1
            if x == b + 1:
                counts.pop()

    yield from rec(0)


def special_symmetric_words(m: int, cap: int = DEFAULT_CAP) -> list[Word]:
    return [w for w in enumerate_even_words(m, cap) if classify(w).special_symmetric]


def bell(m: int) -> int:
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def narayana(k: int, r: int) -> int:
    if k < 1 or not 0 <= r <= k - 1:
        raise ValueError(f"narayana needs k >= 1 and 0 <= r <= k-1, got k={k}, r={r}")
    num = comb(k, r) * comb(k - 1, r)
    assert num % (r + 1) == 0
    return num // (r + 1)


@dataclass(frozen=True)
class CumulantSequence:
    """Constants c_j indexed by order.

    Orders missing from ``values`` fall back to ``higher`` when set; otherwise odd
    orders are 0 and a missing even order is an error.  With ``lam`` set every
    order equals lam (the sparse case).
    """

    values: Mapping[int, float] = field(default_factory=dict)
    lam: Optional[float] = None
    higher: Optional[float] = None

    def __getitem__(self, order: int):
        if self.lam is not None:
            return self.lam
        if order in self.values:
            return self.values[order]
        if self.higher is not None:
            return self.higher
        if order % 2:
            return 0
        raise KeyError(f"cumulant of order {order} is not defined")

    def get(self, order: int, default=None):
        try:
            return self[order]
        except KeyError:
            return default

    @classmethod
    def pairs_only(cls, c2: float = 1) -> "CumulantSequence":
        return cls({2: c2}, higher=0)

    @classmethod
    def constant(cls, lam: float) -> "CumulantSequence":
        return cls(lam=lam)


def multiplicative_extension(c: CumulantSequence | Mapping[int, float], w: Word | str):
    w = as_word(w)
    out = 1
    for size in w.block_sizes():
        try:
            out *= c[size]
        except KeyError:
            raise KeyError(f"sequence has no value for order {size}") from None
    return out


def a_omega(w: Word | str) -> int:
    """Balanced sign-choice multiplicity: product over blocks of C(k_i - 1, k_i/2)."""
    out = 1
    for size in as_word(w).block_sizes():
        if size % 2:
            return 0
        out *= comb(size - 1, size // 2)
    return out


@lru_cache(maxsize=None)
def _even_block_counts(m: int, noncrossing: bool) -> tuple[int, ...]:
    counts = [0] * (m // 2 + 1)
    for w in enumerate_even_words(m, cap=max(m, DEFAULT_CAP)):
        if noncrossing and not classify(w).noncrossing:
            continue
        counts[w.b] += 1
    return tuple(counts)


def _poly(coeffs: Sequence[int], gamma):
    total = 0 * gamma
    for blocks, c in enumerate(coeffs):
        if c:
            total += c * gamma**blocks
    return total


def _check_even(m: int) -> None:
    if m < 2 or m % 2:
        raise ValueError(f"moment order must be an even positive integer, got {m}")


def q1_moment(gamma, m: int):
    """Sum over noncrossing even-block partitions of gamma^|blocks|."""
    _check_even(m)
    return _poly(_even_block_counts(m, True), gamma)


def q2_moment(gamma, m: int):
    """Sum over all even-block partitions of gamma^|blocks|."""
    _check_even(m)
    return _poly(_even_block_counts(m, False), gamma)


def _hypergraph_edges(sigma: Sequence[int], tau: Sequence[int]) -> set[tuple[int, int]]:
    """Distinct (sigma-block, tau-block) pairs traversed by the closed walk.

    Odd vertex i (1..k) sits between even vertices i and i+1, the last wrapping to 1.
    """
    k = len(sigma)
    edges = set()
    for i in range(k):
        edges.add((sigma[i], tau[i]))
        edges.add((sigma[(i + 1) % k], tau[i]))
    return edges


def hypergraph_is_acyclic(sigma: Word, tau: Word) -> bool:
    edges = _hypergraph_edges(sigma.letters, tau.letters)
    hyper: dict[int, set[int]] = {}
    for s, t in edges:
        hyper.setdefault(t, set()).add(s)
    groups = list(hyper.values())
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            if len(groups[i] & groups[j]) >= 2:
                return False
    # the walk is connected, so it is a forest exactly when it is a tree
    return len(edges) == sigma.b + tau.b - 1


def hypergraph_word(sigma: Word, tau: Word) -> Word:
    """The length-2k word whose letters are the walk edges of H(sigma, tau)."""
    k = len(sigma)
    seq = []
    for i in range(k):
        seq.append((sigma[i], tau[i]))
        seq.append((sigma[(i + 1) % k], tau[i]))
    return canonicalize(seq)


def enumerate_acyclic_hypergraphs(k: int, b: int, cap: int = DEFAULT_CAP) -> Iterator[tuple[Word, Word]]:
    """Pairs (sigma, tau) of partitions of [k] with |sigma|+|tau| = b+1 and an acyclic hypergraph."""
    _check_cap(k, cap)
    parts = list(enumerate_words(k, cap=cap))
    for sigma in parts:
        for tau in parts:
            if sigma.b + tau.b == b + 1 and hypergraph_is_acyclic(sigma, tau):
                yield sigma, tau


def count_ss_profile(m: int, a: int, l: int, block_sizes: Iterable[int], cap: int = DEFAULT_CAP) -> int:
    """Special symmetric words with a letters, l odd generating vertices and these block sizes."""
    target = sorted(block_sizes)
    if sum(target) != m or len(target) != a or any(s < 2 for s in target):
        raise ValueError(f"inconsistent profile: m={m}, a={a}, block_sizes={target}")
    total = 0
    for w in enumerate_even_words(m, cap):
        if w.b != a or sorted(w.block_sizes()) != target:
            continue
        if generating_profile(w).odd_gen == l and classify(w).special_symmetric:
            total += 1
    return total


def pure_blocks(w: Word) -> list[tuple[int, int]]:
    """Maximal runs (letter, length) of a word."""
    return [(x, len(list(g))) for x, g in groupby(w.letters)]
