"""Link functions, circuits and exact circuit counting at finite (p, n).

A circuit is a closed path pi(0..2k) alternating rows (even positions, 1..p) and
columns (odd positions, 1..n).  Position i traverses matrix entry (row, col) with
row = pi(i-1), col = pi(i) for odd i and row = pi(i), col = pi(i-1) for even i.
Two positions match when their link values agree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .combinatorics import Word, as_word, canonicalize, generating_profile

DEFAULT_COUNT_CAP = 5 * 10**9


class LinkKind(str, enum.Enum):
    S = "s"
    T_SYM = "t_sym"
    T_ASYM = "t_asym"
    H_SYM = "h_sym"
    H_ASYM = "h_asym"
    R_SYM = "r_sym"
    R_ASYM = "r_asym"
    C_SYM = "c_sym"
    C_ASYM = "c_asym"

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def patterned(self) -> bool:
        return self is not LinkKind.S

    @property
    def modular(self) -> bool:
        return self in (LinkKind.R_SYM, LinkKind.R_ASYM, LinkKind.C_SYM, LinkKind.C_ASYM)

    @property
    def needs_symmetric_word(self) -> bool:
        """Whether only symmetric words survive in the limit (otherwise even words)."""
        return self not in (LinkKind.S, LinkKind.T_SYM, LinkKind.C_SYM)

    @classmethod
    def parse(cls, name: "str | LinkKind") -> "LinkKind":
        if isinstance(name, LinkKind):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"t": "t_asym", "h": "h_asym", "r": "r_asym", "c": "c_asym"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown link {name!r}; choose from {[k.value for k in cls]}") from None


_CODES = {kind: i for i, kind in enumerate(LinkKind)}
PATTERNED_LINKS = tuple(k for k in LinkKind if k.patterned)


def link_value(link: LinkKind | str, i: int, j: int, n: int):
    """L(i, j) for row i, column j (both 1-based).

    The S link returns the entry itself.  Signed links return plain integers, so a
    negated zero equals zero.  The symmetric circulant reduces |i - j| mod n before
    taking the circular distance; this agrees with n/2 - |n/2 - |i - j|| whenever
    |i - j| <= n, which covers every entry when p <= n.
    """
    link = LinkKind.parse(link)
    if link is LinkKind.S:
        return (i, j)
    if link is LinkKind.T_SYM:
        return abs(i - j)
    if link is LinkKind.T_ASYM:
        return i - j
    if link is LinkKind.H_SYM:
        return i + j
    if link is LinkKind.H_ASYM:
        return i + j if i >= j else -(i + j)
    if link is LinkKind.R_SYM:
        return (i + j - 2) % n
    if link is LinkKind.R_ASYM:
        v = (i + j - 2) % n
        return v if i <= j else -v
    if link is LinkKind.C_SYM:
        d = abs(i - j) % n
        return min(d, n - d)
    return (j - i) % n


@dataclass(frozen=True)
class Circuit:
    pi: tuple[int, ...]
    p: int
    n: int

    def __post_init__(self) -> None:
        pi = tuple(int(v) for v in self.pi)
        object.__setattr__(self, "pi", pi)
        if len(pi) < 3 or len(pi) % 2 == 0:
            raise ValueError("a circuit has odd length 2k+1 >= 3")
        if pi[0] != pi[-1]:
            raise ValueError("a circuit must close: pi(0) = pi(2k)")
        for i, v in enumerate(pi):
            top = self.p if i % 2 == 0 else self.n
            if not 1 <= v <= top:
                raise ValueError(f"pi({i}) = {v} outside 1..{top}")

    @property
    def k(self) -> int:
        return (len(self.pi) - 1) // 2

    def entry(self, position: int) -> tuple[int, int]:
        if not 1 <= position <= 2 * self.k:
            raise IndexError(f"position {position} outside 1..{2 * self.k}")
        a, b = self.pi[position - 1], self.pi[position]
        return (a, b) if position % 2 else (b, a)


def xi(link: LinkKind | str, circ: Circuit, position: int):
    row, col = circ.entry(position)
    return link_value(link, row, col, circ.n)


def word_of_circuit(link: LinkKind | str, circ: Circuit) -> Word:
    return canonicalize([xi(link, circ, i) for i in range(1, 2 * circ.k + 1)])


@njit(cache=True)
def _lval(code, r, c, n):
    if code == 0:
        return r * (n + 1) + c
    if code == 1:
        return abs(r - c)
    if code == 2:
        return r - c
    if code == 3:
        return r + c
    if code == 4:
        return r + c if r >= c else -(r + c)
    if code == 5:
        return (r + c - 2) % n
    if code == 6:
        v = (r + c - 2) % n
        return v if r <= c else -v
    if code == 7:
        d = abs(r - c) % n
        return min(d, n - d)
    return (c - r) % n


@njit(cache=True)
def _add_reps(buf, cnt, base, top, n):
    """Append every v in 1..top with v = base (mod n), skipping duplicates."""
    v = (base - 1) % n + 1
    while v <= top:
        dup = False
        for t in range(cnt):
            if buf[t] == v:
                dup = True
                break
        if not dup:
            buf[cnt] = v
            cnt += 1
        v += n
    return cnt


@njit(cache=True)
def _add_one(buf, cnt, v, top):
    if v < 1 or v > top:
        return cnt
    for t in range(cnt):
        if buf[t] == v:
            return cnt
    buf[cnt] = v
    return cnt + 1


@njit(cache=True)
def _candidates(code, i, u, target, n, top, buf):
    """Superset of values for pi(i) solving L(edge i) = target given pi(i-1) = u."""
    cnt = 0
    if code == 0:
        # target encodes (row, col); the new vertex is the column for odd i
        if i % 2 == 1:
            cnt = _add_one(buf, cnt, target % (n + 1), top)
        else:
            cnt = _add_one(buf, cnt, target // (n + 1), top)
    elif code == 1 or code == 2:
        cnt = _add_one(buf, cnt, u + target, top)
        cnt = _add_one(buf, cnt, u - target, top)
    elif code == 3 or code == 4:
        cnt = _add_one(buf, cnt, abs(target) - u, top)
    elif code == 5 or code == 6:
        cnt = _add_reps(buf, cnt, abs(target) + 2 - u, top, n)
    else:
        cnt = _add_reps(buf, cnt, u + target, top, n)
        cnt = _add_reps(buf, cnt, u - target, top, n)
    return cnt


@njit(cache=True)
def _count_kernel(code, letters, first, p, n, exact, fixed0):
    """Depth-first count of circuits respecting the word's matchings.

    letters: 0-based letter per position 1..2k; first[i] is True at first occurrences.
    fixed0 > 0 pins pi(0) to that value (used to split work by the first vertex).
    """
    m = letters.shape[0]
    b = 0
    for i in range(m):
        if letters[i] + 1 > b:
            b = letters[i] + 1
    maxc = 2 * ((max(p, n) // n) + 2) + 4
    if code == 1 or code == 2 or code == 3 or code == 4 or code == 0:
        maxc = 4
    pi = np.zeros(m + 1, np.int64)
    lv = np.zeros(b, np.int64)
    cand = np.zeros((m + 1, maxc), np.int64)
    ncand = np.zeros(m + 1, np.int64)
    idx = np.zeros(m + 1, np.int64)
    total = 0
    lo0 = 1 if fixed0 <= 0 else fixed0
    hi0 = p if fixed0 <= 0 else fixed0
    for v0 in range(lo0, hi0 + 1):
        pi[0] = v0
        depth = 1
        idx[1] = -1
        ncand[1] = -1  # -1 marks "not yet expanded"
        while depth >= 1:
            i = depth
            top = p if i % 2 == 0 else n
            isfirst = first[i - 1]
            if ncand[i] < 0:
                if i == m:
                    ncand[i] = 1
                    cand[i, 0] = pi[0]
                elif isfirst:
                    ncand[i] = top  # range mode: candidate t+1
                else:
                    ncand[i] = _candidates(code, i, pi[i - 1], lv[letters[i - 1]], n, top, cand[i])
                idx[i] = -1
            idx[i] += 1
            if idx[i] >= ncand[i]:
                ncand[i] = -1
                depth -= 1
                continue
            if isfirst and i != m:
                v = idx[i] + 1
            else:
                v = cand[i, idx[i]]
            if i % 2 == 1:
                val = _lval(code, pi[i - 1], v, n)
            else:
                val = _lval(code, v, pi[i - 1], n)
            let = letters[i - 1]
            if isfirst:
                if exact:
                    clash = False
                    for j in range(let):
                        if lv[j] == val:
                            clash = True
                            break
                    if clash:
                        continue
                lv[let] = val
            elif val != lv[let]:
                continue
            pi[i] = v
            if i == m:
                total += 1
                continue
            depth = i + 1
            ncand[depth] = -1
    return total


def _word_arrays(w: Word) -> tuple[np.ndarray, np.ndarray]:
    letters = np.array([x - 1 for x in w.letters], dtype=np.int64)
    seen: set[int] = set()
    first = np.zeros(len(w), dtype=np.bool_)
    for i, x in enumerate(w.letters):
        if x not in seen:
            seen.add(x)
            first[i] = True
    return letters, first


def search_size(w: Word, p: int, n: int) -> int:
    prof = generating_profile(w)
    return p**prof.even_gen * n**prof.odd_gen


def count_circuits(
    link: LinkKind | str,
    w: Word | str,
    p: int,
    n: int,
    exact_word: bool = False,
    cap: int = DEFAULT_COUNT_CAP,
) -> int:
    """Number of circuits whose positions match wherever the word's letters do.

    By default distinct letters may coincidentally share a link value; this is the
    convention under which special symmetric words have exactly p^(r+1) n^(b-r)
    S-circuits.  ``exact_word=True`` counts circuits whose word is exactly w.
    """
    link = LinkKind.parse(link)
    w = as_word(w)
    if len(w) % 2:
        raise ValueError("circuits have even length")
    if p < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    size = search_size(w, p, n)
    if size > cap:
        raise OverflowError(f"search space {size} exceeds the counting cap {cap}")
    rep = cheapest_equivalent(w, p, n)
    letters, first = _word_arrays(rep)
    if link in _RESIDUE_LINKS and p % n == 0:
        # Link values see rows only mod n, so each row vertex has p/n lifts; on
        # p = n, shifting every vertex (rows by c, columns by +-c) mod n is a
        # free action, so pinning pi(0) = 1 and multiplying by n is exact.
        base = int(_count_kernel(link.code, letters, first, n, n, exact_word, 1))
        return (p // n) ** (len(w) // 2) * n * base
    return int(_count_kernel(link.code, letters, first, p, n, exact_word, 0))


_RESIDUE_LINKS = (LinkKind.R_SYM, LinkKind.C_SYM, LinkKind.C_ASYM)


def equivalent_words(w: Word) -> list[Word]:
    """Words with the same circuit counts: rotations by an even shift and the reversal.

    Rotating a circuit by two steps, or reading it backwards, maps circuits of w
    bijectively onto circuits of the transformed word and keeps every traversed
    entry (row, col) unchanged.
    """
    m = len(w)
    out = set()
    for seq in (w.letters, w.letters[::-1]):
        for s in range(0, m, 2):
            out.add(canonicalize(seq[s:] + seq[:s]))
    return sorted(out)


def cheapest_equivalent(w: Word, p: int, n: int) -> Word:
    return min(equivalent_words(w), key=lambda v: (search_size(v, p, n), v))


def finite_ratio(link: LinkKind | str, w: Word | str, y: float, n_grid: Sequence[int], **kw) -> list[float]:
    """count / (p^(r+1) n^(b-r)) with p = round(y n) at each grid point."""
    w = as_word(w)
    prof = generating_profile(w)
    out = []
    for n in n_grid:
        p = max(1, int(round(y * n)))
        count = count_circuits(link, w, p, n, **kw)
        out.append(count / (p**prof.even_gen * n**prof.odd_gen))
    return out


def enumerate_circuits(k: int, p: int, n: int):
    """All circuits of length 2k (tiny dimensions only; used as a brute-force oracle)."""
    rows = range(1, p + 1)
    cols = range(1, n + 1)
    grids = []
    for i in range(2 * k):
        grids.append(rows if i % 2 == 0 else cols)
    for combo in np.ndindex(*[len(g) for g in grids]):
        pi = tuple(g[c] for g, c in zip(grids, combo))
        yield Circuit(pi + (pi[0],), p, n)
