"""Acceptance checks, each returning a CheckResult with a one-line summary."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .circuits import PATTERNED_LINKS, LinkKind, count_circuits, finite_ratio
from .combinatorics import (
    CumulantSequence,
    Word,
    catalan,
    classify,
    enumerate_acyclic_hypergraphs,
    enumerate_even_words,
    generating_profile,
    narayana,
    q1_moment,
    q2_moment,
    special_symmetric_words,
)
from .limits import MCConfig, admissible, word_limit
from .moments import PatternModel, SparseModel, mp_moment, s_moment, sa_moment, unbounded_support_lowerbound
from .simulate import MatrixSpec, replicate, wigner_companion


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    rows: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str, list]]) -> CheckResult:
    t = time.perf_counter()
    ok, detail, rows = fn()
    return CheckResult(number, name, ok, detail, time.perf_counter() - t, rows)


def noncrossing_pairings(m: int) -> list[Word]:
    """NC2(m) by direct construction: each step opens a letter or closes the latest open one."""
    out = []

    def rec(seq: list[int], stack: list[int], nxt: int) -> None:
        left = m - len(seq)
        if left == 0:
            out.append(Word._trusted(tuple(seq)))
            return
        if stack:
            top = stack.pop()
            rec(seq + [top], stack, nxt)
            stack.append(top)
        if len(stack) < left - 1:
            rec(seq + [nxt], stack + [nxt], nxt + 1)

    rec([], [], 1)
    return out


def check_combinatorics() -> CheckResult:
    def run():
        notes = []
        ok = True
        for k in range(1, 9):
            nc2 = noncrossing_pairings(2 * k)
            nar = sum(narayana(k, r) for r in range(k))
            if not (nar == catalan(k) == len(nc2)):
                ok = False
                notes.append(f"k={k}: narayana sum {nar}, catalan {catalan(k)}, |NC2| {len(nc2)}")
        for m in range(2, 11, 2):
            even = list(enumerate_even_words(m))
            cls = {w: classify(w) for w in even}
            ss = {w for w, c in cls.items() if c.special_symmetric}
            pairs = {w for w in even if max(w.block_sizes()) == 2}
            nc2 = set(noncrossing_pairings(m))
            nce = {w for w, c in cls.items() if c.noncrossing}
            if ss & pairs != nc2:
                ok = False
                notes.append(f"2k={m}: SS and pair words differ from NC2")
            if not nce <= ss:
                ok = False
                notes.append(f"2k={m}: NCE not inside SS")
        n_ss4 = len(special_symmetric_words(4))
        n_e4 = len(list(enumerate_even_words(4)))
        if (n_ss4, n_e4) != (3, 4):
            ok = False
            notes.append(f"|SS(4)|={n_ss4}, |E(4)|={n_e4}")
        return ok, "; ".join(notes) or "Narayana/Catalan/NC2 k<=8, class inclusions 2k<=10, |SS(4)|=3, |E(4)|=4", []

    res = _timed(1, "combinatorial identities", run)
    if res.seconds >= 1.0:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.2f}s exceeds 1s"
    return res


def check_exact_count_law() -> CheckResult:
    def run():
        bad = []
        total = 0
        for m in (2, 4, 6):
            for w in special_symmetric_words(m):
                prof = generating_profile(w)
                for p in (2, 3, 4):
                    for n in (3, 4, 5):
                        total += 1
                        want = p**prof.even_gen * n**prof.odd_gen
                        got = count_circuits(LinkKind.S, w, p, n)
                        if got != want:
                            bad.append((str(w), p, n, got, want))
        return not bad, f"{total - len(bad)}/{total} counts equal p^(r+1) n^(b-r)", bad

    res = _timed(2, "exact S-circuit count law", run)
    if res.seconds >= 30:
        res.passed = False
        res.detail += "; runtime exceeds 30s"
    return res


def check_abab_decay() -> CheckResult:
    def run():
        ratios = [finite_ratio(LinkKind.S, "abab", 1.0, [m])[0] for m in (4, 8, 16, 32)]
        dec = all(a > b for a, b in zip(ratios, ratios[1:]))
        ok = dec and ratios[-1] < 0.5 * ratios[0]
        return ok, "ratios " + ", ".join(f"{r:.4f}" for r in ratios), ratios

    return _timed(3, "abab decay under the S link", run)


def check_hypergraph_bijection() -> CheckResult:
    def run():
        bad = []
        for k in range(1, 5):
            ss = special_symmetric_words(2 * k)
            for b in range(1, k + 1):
                n_ss = sum(1 for w in ss if w.b == b)
                n_h = sum(1 for _ in enumerate_acyclic_hypergraphs(k, b))
                if n_ss != n_h:
                    bad.append((k, b, n_ss, n_h))
        return not bad, "acyclic pair counts equal |SS_b(2k)| for 2k<=8" if not bad else f"mismatches {bad}", bad

    return _timed(4, "hypergraph bijection", run)


def check_limits_vs_oracle(
    mc: Optional[MCConfig] = None,
    n: int = 64,
    ys=(0.5, 1.0, 2.0),
    links=PATTERNED_LINKS,
    max_m: int = 6,
    rel_tol: float = 0.05,
    budget: float = 600.0,
) -> CheckResult:
    mc = mc or MCConfig()

    def run():
        rows = []
        for y in ys:
            for link in links:
                for m in range(2, max_m + 1, 2):
                    for w in enumerate_even_words(m):
                        if not admissible(link, w):
                            continue
                        lim = word_limit(link, w, y, mc)
                        fr = finite_ratio(link, w, y, [n], exact_word=True)[0]
                        tol = max(rel_tol * abs(lim.value), 3 * lim.std_error)
                        rows.append((y, link.value, str(w), lim.value, lim.std_error, fr, abs(lim.value - fr) <= tol))
        bad = [r for r in rows if not r[-1]]
        worst = max(rows, key=lambda r: abs(r[3] - r[5]) / max(abs(r[3]), 1e-12))
        detail = (
            f"{len(rows) - len(bad)}/{len(rows)} words agree at n={n}; worst {worst[1]} {worst[2]} y={worst[0]}: "
            f"limit {worst[3]:.4f} vs ratio {worst[5]:.4f}"
        )
        return not bad, detail, rows

    res = _timed(5, "limits vs finite-n oracle", run)
    if res.seconds >= budget:
        res.passed = False
        res.detail += f"; runtime {res.seconds:.0f}s exceeds {budget:.0f}s"
    return res


MASTER_SEED = MCConfig().seed


def criterion_seed(number: int) -> int:
    """Seed for a simulation check, derived from the master seed and the criterion number only."""
    return int(np.random.SeedSequence([MASTER_SEED, number]).generate_state(1, dtype=np.uint64)[0])


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def check_mp_simulation(seed: Optional[int] = None) -> CheckResult:
    seed = criterion_seed(6) if seed is None else seed

    def run():
        nc2 = noncrossing_pairings
        for k in range(1, 5):
            by_r = [0] * k
            for w in nc2(2 * k):
                by_r[generating_profile(w).r] += 1
            if by_r != [narayana(k, r) for r in range(k)]:
                return False, f"Narayana numbers disagree with NC2 enumeration at k={k}", []
        theory = [float(mp_moment(k, 0.5)) for k in range(1, 5)]
        sim = replicate(MatrixSpec(250, 500, seed=seed), 20, 4, keep_eigenvalues=False).mean
        errs = [_rel(s, t) for s, t in zip(sim, theory)]
        ok = max(errs) < 0.05
        return ok, "rel errors " + ", ".join(f"{e:.3%}" for e in errs), list(zip(theory, sim.tolist()))

    res = _timed(6, "Marchenko-Pastur simulation", run)
    if res.seconds >= 120:
        res.passed = False
        res.detail += "; runtime exceeds 2 min"
    return res


def check_sparse(seed: Optional[int] = None) -> CheckResult:
    seed = criterion_seed(7) if seed is None else seed

    def run():
        lam, y = 1.5, 0.5
        notes = []
        ok = True
        betas = [s_moment(k, y, SparseModel(lam)).value for k in range(1, 5)]
        for k, beta in enumerate(betas, start=1):
            lo, hi = float(q1_moment(lam * y, 2 * k)), float(q2_moment(lam, 2 * k))
            if not (lo <= beta <= hi):
                ok = False
                notes.append(f"k={k}: {lo} <= {beta} <= {hi} fails")
        sim = replicate(MatrixSpec(500, 1000, entry="bernoulli", lam=lam, seed=seed), 20, 2, keep_eigenvalues=False).mean
        errs = [_rel(sim[i], betas[i]) for i in range(2)]
        if max(errs) >= 0.07:
            ok = False
        notes.append("sandwich k<=4 holds" if ok or len(notes) == 0 else "")
        notes.append("sim rel errors " + ", ".join(f"{e:.3%}" for e in errs))
        return ok, "; ".join(n for n in notes if n), betas

    return _timed(7, "sparse sandwich and simulation", run)


def check_toeplitz_simulation(mc: Optional[MCConfig] = None, seed: Optional[int] = None) -> CheckResult:
    mc = mc or MCConfig()
    seed = criterion_seed(8) if seed is None else seed

    def run():
        model = PatternModel(LinkKind.T_SYM, CumulantSequence.pairs_only(1), 0.5)
        theory = [sa_moment(k, model, mc).value for k in range(1, 4)]
        sim = replicate(MatrixSpec(500, 1000, target="t_sym", seed=seed), 10, 3, keep_eigenvalues=False).mean
        errs = [_rel(s, t) for s, t in zip(sim, theory)]
        return max(errs) < 0.07, "rel errors " + ", ".join(f"{e:.3%}" for e in errs), list(zip(theory, sim.tolist()))

    return _timed(8, "symmetric Toeplitz theory vs simulation", run)


def check_cross_pattern(mc: Optional[MCConfig] = None) -> CheckResult:
    mc = mc or MCConfig()

    def run():
        C = CumulantSequence.constant(1.0)
        notes = []
        ok = True
        for k in range(1, 4):
            t = sa_moment(k, PatternModel(LinkKind.T_ASYM, C, 1.0), mc)
            h = sa_moment(k, PatternModel(LinkKind.H_SYM, C, 1.0), mc)
            se = math.hypot(t.std_error, h.std_error)
            if abs(t.value - h.value) > 3 * se:
                ok = False
                notes.append(f"k={k}: T_asym {t.value:.4f} vs H_sym {h.value:.4f} (se {se:.4f})")
        y = 2
        for k in range(1, 4):
            want = sum(y ** (k - 1) for w in enumerate_even_words(2 * k) if classify(w).symmetric)
            r = sa_moment(k, PatternModel(LinkKind.R_SYM, C, y), mc)
            c = sa_moment(k, PatternModel(LinkKind.C_ASYM, C, y), mc)
            if not (r.value == c.value == want and r.std_error == 0 and c.std_error == 0):
                ok = False
                notes.append(f"k={k}: R_sym {r.value} C_asym {c.value} expected {want}")
        return ok, "; ".join(notes) or "T_asym = H_sym within 3 se (y=1); R_sym = C_asym = sum y^(k-1) exactly (y=2)", []

    return _timed(9, "cross-pattern identities", run)


def check_wigner_square(seed: Optional[int] = None) -> CheckResult:
    seed = criterion_seed(10) if seed is None else seed

    def run():
        seeds = np.random.SeedSequence(seed).spawn(10)
        errs = []
        for k in range(1, 4):
            errs.append([])
        for s in seeds:
            sd = int(s.generate_state(1, dtype=np.uint64)[0])
            S = replicate(MatrixSpec(600, 600, seed=sd), 1, 3, keep_eigenvalues=False).mean
            W = wigner_companion(600, seed=sd + 1, k_max=6).empirical_moments
            for k in range(1, 4):
                errs[k - 1].append((S[k - 1], W[2 * k]))
        rel = []
        for k in range(1, 4):
            s_mean = np.mean([a for a, _ in errs[k - 1]])
            w_mean = np.mean([b for _, b in errs[k - 1]])
            rel.append(abs(s_mean - w_mean) / w_mean)
        return max(rel) < 0.05, "rel differences " + ", ".join(f"{e:.3%}" for e in rel), rel

    return _timed(10, "Wigner-square identity at p=n", run)


def check_unbounded_support() -> CheckResult:
    def run():
        notes = []
        ok = True
        for y in (0.5, 1.0, 2.0):
            for t in (2, 3):
                beta = s_moment(t, y, SparseModel(1.0)).value
                lb = unbounded_support_lowerbound(1, t, 1.0)
                if not beta > lb:
                    ok = False
                notes.append(f"y={y} t={t}: {beta:.4g} > {lb:.4g}")
        return ok, "; ".join(notes), []

    return _timed(11, "unbounded-support lower bound", run)


def run_all(mc: Optional[MCConfig] = None, only: Optional[set] = None) -> list[CheckResult]:
    checks = {
        1: check_combinatorics,
        2: check_exact_count_law,
        3: check_abab_decay,
        4: check_hypergraph_bijection,
        5: lambda: check_limits_vs_oracle(mc),
        6: check_mp_simulation,
        7: check_sparse,
        8: lambda: check_toeplitz_simulation(mc),
        9: lambda: check_cross_pattern(mc),
        10: check_wigner_square,
        11: check_unbounded_support,
    }
    return [fn() for num, fn in checks.items() if only is None or num in only]
