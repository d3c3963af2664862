"""Random Gram matrices X X^T and A A^T, their eigenvalues and empirical moments."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .circuits import LinkKind

log = logging.getLogger(__name__)

ENTRY_KINDS = ("gaussian", "bernoulli", "stable")
MASKS = (None, "triangular", "band1", "band2")


@dataclass(frozen=True)
class MatrixSpec:
    """A p x n random matrix.

    ``target`` is "s" for independent entries or a patterned link name.  Entries
    are already scaled so that the Gram matrix is X X^T: gaussian draws are
    divided by sqrt(n), bernoulli entries are 0/1 with success lam / n, and
    stable entries are divided by p^(1/alpha).
    """

    p: int
    n: int
    entry: str = "gaussian"
    target: str = "s"
    lam: float = 1.0
    alpha: float = 1.5
    profile: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, compare=False)
    link_profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    mask: Optional[str] = None
    band_m: int = 0
    truncation: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 1 or self.n < 1:
            raise ValueError("p and n must be at least 1")
        if self.entry not in ENTRY_KINDS:
            raise ValueError(f"entry must be one of {ENTRY_KINDS}")
        if self.entry == "bernoulli" and not (0 < self.lam <= self.n):
            raise ValueError("bernoulli needs 0 < lam <= n")
        if self.entry == "stable" and not (0 < self.alpha < 2):
            raise ValueError("alpha must lie in (0, 2)")
        if self.mask not in MASKS:
            raise ValueError(f"mask must be one of {MASKS}")
        if self.mask in ("band1", "band2") and self.band_m < 0:
            raise ValueError("band_m must be nonnegative")
        if self.target != "s":
            link = LinkKind.parse(self.target)
            if not link.patterned:
                raise ValueError("target must be 's' or a patterned link")
        elif self.link_profile is not None:
            raise ValueError("link_profile applies to patterned targets only")

    def describe(self) -> dict:
        d = asdict(self)
        for key in ("profile", "link_profile"):
            fn = getattr(self, key)
            d[key] = None if fn is None else getattr(fn, "__name__", "custom")
        return d


def symmetric_stable(rng: np.random.Generator, alpha: float, size) -> np.ndarray:
    """Symmetric alpha-stable draws by the Chambers-Mallows-Stuck construction."""
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.exponential(1.0, size)
    if alpha == 1.0:
        return np.tan(v)
    return np.sin(alpha * v) / np.cos(v) ** (1 / alpha) * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha)


def _draw(rng: np.random.Generator, spec: MatrixSpec, size) -> np.ndarray:
    if spec.entry == "gaussian":
        x = rng.standard_normal(size)
    elif spec.entry == "bernoulli":
        x = (rng.random(size) < spec.lam / spec.n).astype(float)
    else:
        x = symmetric_stable(rng, spec.alpha, size)
    if spec.truncation is not None:
        x = np.where(np.abs(x) <= spec.truncation, x, 0.0)
    if spec.entry == "gaussian":
        return x / np.sqrt(spec.n)
    if spec.entry == "stable":
        return x / spec.p ** (1 / spec.alpha)
    return x


def _shape_factor(spec: MatrixSpec) -> Optional[np.ndarray]:
    """Profile times mask on the (i/p, j/n) grid, or None when trivial."""
    i = np.arange(1, spec.p + 1)[:, None]
    j = np.arange(1, spec.n + 1)[None, :]
    out = None
    if spec.profile is not None:
        out = np.asarray(spec.profile(i / spec.p, j / spec.n), dtype=float) * np.ones((spec.p, spec.n))
    if spec.mask is not None:
        if spec.mask == "triangular":
            m = (i <= j).astype(float)
        else:
            d = np.abs(i - j)
            if spec.mask == "band2":
                d = np.minimum(d, spec.n - d)
            m = (d <= spec.band_m).astype(float)
        out = m if out is None else out * m
    return out


def link_matrix(link: LinkKind | str, p: int, n: int) -> np.ndarray:
    """L(i, j) for 1 <= i <= p, 1 <= j <= n."""
    link = LinkKind.parse(link)
    i = np.arange(1, p + 1, dtype=np.int64)[:, None]
    j = np.arange(1, n + 1, dtype=np.int64)[None, :]
    if link is LinkKind.T_SYM:
        return np.abs(i - j)
    if link is LinkKind.T_ASYM:
        return np.broadcast_to(i - j, (p, n)).copy()
    if link is LinkKind.H_SYM:
        return np.broadcast_to(i + j, (p, n)).copy()
    if link is LinkKind.H_ASYM:
        return np.where(i >= j, i + j, -(i + j))
    if link is LinkKind.R_SYM:
        return np.broadcast_to((i + j - 2) % n, (p, n)).copy()
    if link is LinkKind.R_ASYM:
        r = (i + j - 2) % n
        return np.where(i <= j, r, -r)
    if link is LinkKind.C_SYM:
        d = np.abs(i - j) % n
        return np.minimum(d, n - d)
    if link is LinkKind.C_ASYM:
        return np.broadcast_to((j - i) % n, (p, n)).copy()
    raise ValueError("link must be patterned")


def generate_x(spec: MatrixSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """The p x n matrix described by spec (patterned targets share one draw per link value)."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    if spec.target == "s":
        x = _draw(rng, spec, (spec.p, spec.n))
    else:
        x = generate_patterned(spec.target, spec.p, spec.n, spec, rng)
    shape = _shape_factor(spec)
    return x if shape is None else x * shape


def generate_patterned(
    link: LinkKind | str,
    p: int,
    n: int,
    spec: Optional[MatrixSpec] = None,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
) -> np.ndarray:
    """A[i, j] = x_{L(i, j)} from a two-sided sequence x_{-(n+p)}, ..., x_{n+p}.

    With ``spec.link_profile`` set, x_l is multiplied by link_profile(l / n).
    """
    spec = spec or MatrixSpec(p, n, target=LinkKind.parse(link).value, seed=seed)
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    offset = n + p
    seq = _draw(rng, replace(spec, p=p, n=n), 2 * offset + 1)
    if spec.link_profile is not None:
        seq = seq * np.asarray(spec.link_profile(np.arange(-offset, offset + 1) / n), dtype=float)
    return seq[link_matrix(link, p, n) + offset]


@dataclass
class ESDResult:
    eigenvalues: np.ndarray
    empirical_moments: dict
    histogram: tuple
    meta: dict = field(default_factory=dict)


def _moments(eigs: np.ndarray, k_max: int) -> dict:
    return {k: float(np.mean(eigs**k)) for k in range(1, k_max + 1)}


def _histogram(eigs: np.ndarray, bins: int, quantile: bool = False) -> tuple:
    if quantile:
        edges = np.unique(np.quantile(eigs, np.linspace(0, 1, bins + 1)))
    else:
        top = float(eigs.max()) if eigs.size and eigs.max() > 0 else 1.0
        edges = np.linspace(0.0, top, bins + 1)
    counts, edges = np.histogram(eigs, bins=edges)
    return edges, counts


def esd(x: np.ndarray, k_max: int = 4, bins: int = 100, quantile_bins: bool = False, meta: Optional[dict] = None) -> ESDResult:
    """Eigenvalues of the Gram matrix x x^T with moments and a histogram."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    S = x @ x.T
    eigs = np.linalg.eigvalsh(S)
    floor = 1e-10 * max(float(np.abs(eigs).max()), 1.0) if eigs.size else 0.0
    if eigs.size and eigs.min() < -floor:
        raise np.linalg.LinAlgError(f"Gram eigenvalue {eigs.min()} is below the numerical floor")
    clamped = int(np.sum(eigs < 0))
    if clamped:
        log.debug("clamped %d tiny negative eigenvalues", clamped)
    eigs = np.sort(np.maximum(eigs, 0.0))
    m = dict(meta or {})
    m["clamped"] = clamped
    return ESDResult(eigs, _moments(eigs, k_max), _histogram(eigs, bins, quantile_bins), m)


def wigner_companion(n: int, spec: Optional[MatrixSpec] = None, seed: int = 0, k_max: int = 8, bins: int = 100) -> ESDResult:
    """Spectrum of a symmetric n x n matrix with independent upper-triangle entries."""
    spec = spec or MatrixSpec(n, n, seed=seed)
    rng = np.random.default_rng(spec.seed if spec is not None else seed)
    upper = np.triu(_draw(rng, replace(spec, p=n, n=n), (n, n)))
    W = upper + np.triu(upper, 1).T
    eigs = np.sort(np.linalg.eigvalsh(W))
    top = float(np.abs(eigs).max()) if eigs.size else 1.0
    counts, edges = np.histogram(eigs, bins=np.linspace(-top, top, bins + 1))
    return ESDResult(eigs, _moments(eigs, k_max), (edges, counts), {"n": n, "seed": spec.seed})


@dataclass
class ReplicationResult:
    pooled: ESDResult
    moments: np.ndarray  # (reps, k_max)
    seeds: list

    @property
    def mean(self) -> np.ndarray:
        return self.moments.mean(axis=0)

    @property
    def sd(self) -> np.ndarray:
        if self.moments.shape[0] < 2:
            return np.zeros(self.moments.shape[1])
        return self.moments.std(axis=0, ddof=1)


def replication_seeds(seed: int, reps: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(reps)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def replicate(spec: MatrixSpec, reps: int, k_max: int = 4, bins: int = 100, keep_eigenvalues: bool = True) -> ReplicationResult:
    """Independent replications with seeds derived from spec.seed; eigenvalues pooled."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    seeds = replication_seeds(spec.seed, reps)
    table = np.empty((reps, k_max))
    pooled = []
    clamped = 0
    for r, s in enumerate(seeds):
        res = esd(generate_x(replace(spec, seed=s)), k_max=k_max, bins=bins)
        table[r] = [res.empirical_moments[k] for k in range(1, k_max + 1)]
        clamped += res.meta["clamped"]
        if keep_eigenvalues:
            pooled.append(res.eigenvalues)
    eigs = np.sort(np.concatenate(pooled)) if pooled else np.zeros(0)
    meta = {"spec": spec.describe(), "reps": reps, "clamped": clamped}
    hist = _histogram(eigs, bins) if eigs.size else (np.zeros(0), np.zeros(0, dtype=int))
    pooled_res = ESDResult(eigs, {k: float(table[:, k - 1].mean()) for k in range(1, k_max + 1)}, hist, meta)
    return ReplicationResult(pooled_res, table, seeds)
