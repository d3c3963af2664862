"""Command line interface: ``patternlsd <subcommand>``.

Exit codes: 0 pass, 1 tolerance failure, 2 usage error, 3 internal or oracle mismatch.
Config files (YAML) supply defaults; explicit flags override them.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click
import numpy as np
import yaml

from . import __version__
from .circuits import LinkKind, count_circuits
from .combinatorics import CumulantSequence, classify, enumerate_even_words, enumerate_words, generating_profile
from .limits import MCConfig, word_limit
from .moments import (
    CumulantModel,
    MPModel,
    PatternModel,
    ProfileModel,
    SparseModel,
    named_profile,
    s_moment,
    sa_moment,
    sparse_bounds,
)
from .simulate import MatrixSpec, esd, generate_x, replicate

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
WORD_CLASSES = ("all", "even", "sym", "ss", "nc2", "nce")


# ---- config ------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """One theory-versus-simulation experiment."""

    target: str = "s"
    model: str = "mp"  # mp | cumulants | sparse | profile
    cumulants: dict = field(default_factory=lambda: {2: 1.0})
    lam: float = 1.0
    profile: Optional[str] = None
    entry: str = "gaussian"
    alpha: float = 1.5
    p: int = 250
    n: int = 500
    k_max: int = 4
    samples: int = 10**6
    seed: int = MCConfig().seed
    reps: int = 20
    tolerance: float = 0.05
    out_dir: Optional[str] = None

    @property
    def y(self) -> float:
        return self.p / self.n

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise click.UsageError(f"unknown config keys: {sorted(extra)}")
        data = dict(data)
        if "cumulants" in data:
            data["cumulants"] = {int(k): float(v) for k, v in data["cumulants"].items()}
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---- helpers -----------------------------------------------------------------


def parse_y(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise click.BadParameter(f"not a rational number: {text}") from exc


def parse_cumulants(text: Optional[str]) -> dict:
    """``"2=1,4=0.5"`` -> {2: 1.0, 4: 0.5}."""
    if not text:
        return {2: 1.0}
    out = {}
    for part in text.split(","):
        try:
            k, v = part.split("=")
            out[int(k)] = float(Fraction(v))
        except ValueError as exc:
            raise click.BadParameter(f"bad cumulant entry {part!r}") from exc
    return out


def build_entry_model(model: str, cumulants: dict, lam: float, profile: Optional[str]):
    C = CumulantSequence(cumulants, higher=0)
    if model == "mp":
        return MPModel()
    if model == "cumulants":
        return CumulantModel(C)
    if model == "sparse":
        return SparseModel(lam)
    if model == "profile":
        if not profile:
            raise click.UsageError("--profile is required for the profile model")
        return ProfileModel(named_profile(profile), C)
    raise click.UsageError(f"unknown model {model}")


def pattern_f(model: str, cumulants: dict, lam: float):
    if model == "mp":
        return CumulantSequence.pairs_only(1)
    if model == "cumulants":
        return CumulantSequence(cumulants, higher=0)
    if model == "sparse":
        return CumulantSequence.constant(lam)
    raise click.UsageError("patterned targets take mp, cumulants or sparse models")


def theory_moments(target: str, model: str, y: float, k_max: int, mc: MCConfig, cumulants=None, lam=1.0, profile=None):
    cumulants = cumulants or {2: 1.0}
    out = []
    if target == "s":
        em = build_entry_model(model, cumulants, lam, profile)
        for k in range(1, k_max + 1):
            out.append(s_moment(k, y, em, mc))
    else:
        pm = PatternModel(LinkKind.parse(target), pattern_f(model, cumulants, lam), y)
        for k in range(1, k_max + 1):
            out.append(sa_moment(k, pm, mc))
    return out


def parse_entry(text: str) -> dict:
    """``gaussian``, ``bernoulli:3``, ``stable:1.5`` or ``profile:<name>``."""
    kind, _, arg = text.partition(":")
    if kind == "gaussian":
        return {"entry": "gaussian"}
    if kind == "bernoulli":
        return {"entry": "bernoulli", "lam": float(arg or 1)}
    if kind == "stable":
        return {"entry": "stable", "alpha": float(arg or 1.5)}
    if kind == "profile":
        if not arg:
            raise click.BadParameter("profile entry needs a name")
        name = arg
        if name in ("triangular", "upper_triangular"):
            return {"entry": "gaussian", "mask": "triangular"}
        return {"entry": "gaussian", "profile": named_profile(name)}
    raise click.BadParameter(f"unknown entry model {text!r}")


def emit(obj, as_json: bool, text: str) -> None:
    if as_json:
        click.echo(json.dumps(obj, indent=2, default=_jsonable))
    else:
        click.echo(text)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


def _table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[f"{c:.6g}" if isinstance(c, float) else str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


# ---- commands ----------------------------------------------------------------


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Moments and simulations for limiting spectral distributions of X X^T and patterned analogues."""


_CLASS_TESTS = {
    "all": lambda c: True,
    "even": lambda c: c.even,
    "sym": lambda c: c.symmetric,
    "ss": lambda c: c.special_symmetric,
    "nc2": lambda c: c.noncrossing_pair,
    "nce": lambda c: c.even and c.noncrossing,
}


@main.command()
@click.option("--length", "--m", "length", type=int, required=True, help="Word length m.")
@click.option("--class", "klass", type=click.Choice(WORD_CLASSES), default="all")
@click.option("--count", "mode", flag_value="count", help="Print only the number of words.")
@click.option("--list", "mode", flag_value="list", default=True, help="List the words (default).")
@click.option("--json", "as_json", is_flag=True)
def words(length: int, klass: str, mode: str, as_json: bool) -> None:
    """Enumerate canonical words of a given length and class."""
    source = enumerate_words(length) if klass == "all" else enumerate_even_words(length)
    test = _CLASS_TESTS[klass]
    found = [str(w) for w in source if test(classify(w))]
    if mode == "count":
        emit(len(found), as_json, str(len(found)))
    else:
        emit(found, as_json, "\n".join(found))


@main.command()
@click.option("--link", required=True)
@click.option("--word", "word", required=True)
@click.option("--p", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--exact-word", is_flag=True, help="Distinct letters must have distinct link values.")
@click.option("--json", "as_json", is_flag=True)
def count(link: str, word: str, p: int, n: int, exact_word: bool, as_json: bool) -> None:
    """Exact number of circuits of a word."""
    c = count_circuits(link, word, p, n, exact_word=exact_word)
    prof = generating_profile(word)
    ratio = c / (p**prof.even_gen * n**prof.odd_gen)
    emit({"link": link, "word": word, "p": p, "n": n, "count": c, "ratio": ratio}, as_json, f"{c}  (ratio {ratio:.6g})")


@main.command()
@click.option("--link", required=True)
@click.option("--word", "word", required=True)
@click.option("--y", "y_text", required=True)
@click.option("--samples", type=int, default=MCConfig().samples)
@click.option("--seed", type=int, default=MCConfig().seed)
@click.option("--json", "as_json", is_flag=True)
def limit(link: str, word: str, y_text: str, samples: int, seed: int, as_json: bool) -> None:
    """Limit of the normalized circuit count."""
    res = word_limit(link, word, parse_y(y_text), MCConfig(samples=samples, seed=seed))
    emit(
        {"link": link, "word": word, "y": y_text, "value": res.value, "std_error": res.std_error, "terms": res.terms},
        as_json,
        f"{res.value:.6g} +- {res.std_error:.2g}",
    )


@main.command()
@click.option("--target", default="s", help="s or a patterned link.")
@click.option("--model", type=click.Choice(["mp", "cumulants", "sparse", "profile"]), default="mp")
@click.option("--y", "y_text", default="1")
@click.option("--k-max", type=int, default=4)
@click.option("--c", "c_text", default=None, help="Cumulants, e.g. 2=1,4=0.5.")
@click.option("--lambda", "lam", type=float, default=1.0)
@click.option("--profile", default=None)
@click.option("--samples", type=int, default=MCConfig().samples)
@click.option("--seed", type=int, default=MCConfig().seed)
@click.option("--json", "as_json", is_flag=True)
def moment(target, model, y_text, k_max, c_text, lam, profile, samples, seed, as_json) -> None:
    """Limiting moments beta_1..beta_K."""
    y = parse_y(y_text)
    mc = MCConfig(samples=samples, seed=seed)
    res = theory_moments(target, model, y, k_max, mc, parse_cumulants(c_text), lam, profile)
    rows = [[r.k, r.value, r.std_error] for r in res]
    payload = {"target": target, "model": model, "y": y_text, "moments": [{"k": r.k, "value": r.value, "std_error": r.std_error} for r in res]}
    if model == "sparse" and target == "s":
        payload["bounds"] = [sparse_bounds(k, y, lam) for k in range(1, k_max + 1)]
    emit(payload, as_json, _table(["k", "beta_k", "std_error"], rows))


def _simulation_spec(target, entry, p, n, seed) -> MatrixSpec:
    kw = parse_entry(entry)
    return MatrixSpec(p=p, n=n, target=target, seed=seed, **kw)


@main.command()
@click.option("--target", default="s")
@click.option("--entry", default="gaussian")
@click.option("--p", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--reps", type=int, default=1)
@click.option("--k-max", type=int, default=4)
@click.option("--seed", type=int, default=MCConfig().seed)
@click.option("--bins", type=int, default=100)
@click.option("--eigs", "write_eigs", is_flag=True, help="Also write eigs.csv.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def simulate(target, entry, p, n, reps, k_max, seed, bins, write_eigs, out_dir) -> None:
    """Simulate Gram matrices and write moments.csv, hist.csv and meta.json."""
    spec = _simulation_spec(target, entry, p, n, seed)
    res = replicate(spec, reps, k_max, bins=bins)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"command": "simulate", "entry": entry, **res.pooled.meta, "seeds": res.seeds}
    meta["config_hash"] = hashlib.sha256(json.dumps(meta, sort_keys=True, default=str).encode()).hexdigest()[:16]
    _write_csv(out / "moments.csv", ["rep", "k", "value"], [[r, k + 1, res.moments[r, k]] for r in range(reps) for k in range(k_max)])
    edges, counts = res.pooled.histogram
    _write_csv(out / "hist.csv", ["bin_lo", "bin_hi", "count"], [[edges[i], edges[i + 1], int(counts[i])] for i in range(len(counts))])
    if write_eigs:
        _write_csv(out / "eigs.csv", ["eigenvalue"], [[v] for v in res.pooled.eigenvalues])
    (out / "meta.json").write_text(json.dumps(meta, indent=2, default=_jsonable))
    click.echo(_table(["k", "mean", "sd"], [[k + 1, float(res.mean[k]), float(res.sd[k])] for k in range(k_max)]))


@dataclass
class ComparisonReport:
    config: ExperimentConfig
    rows: list  # (k, theory, theory_se, simulated, sim_sd, rel_error, passed)

    @property
    def passed(self) -> bool:
        return all(r[-1] for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "config_hash": self.config.hash(),
            "passed": self.passed,
            "rows": [dict(zip(["k", "theory", "theory_se", "simulated", "sim_sd", "rel_error", "passed"], r)) for r in self.rows],
        }


def run_compare(cfg: ExperimentConfig) -> ComparisonReport:
    mc = MCConfig(samples=cfg.samples, seed=cfg.seed)
    theory = theory_moments(cfg.target, cfg.model, cfg.y, cfg.k_max, mc, cfg.cumulants, cfg.lam, cfg.profile)
    entry = {"mp": "gaussian", "cumulants": cfg.entry, "profile": cfg.entry}.get(cfg.model, cfg.entry)
    kw = {"entry": entry, "lam": cfg.lam, "alpha": cfg.alpha}
    if cfg.model == "sparse":
        kw["entry"] = "bernoulli"
    if cfg.model == "profile" and cfg.profile:
        if cfg.profile == "upper_triangular":
            kw["mask"] = "triangular"
        else:
            kw["profile"] = named_profile(cfg.profile)
    spec = MatrixSpec(p=cfg.p, n=cfg.n, target=cfg.target, seed=cfg.seed, **kw)
    sim = replicate(spec, cfg.reps, cfg.k_max, keep_eigenvalues=False)
    rows = []
    for t in theory:
        s = float(sim.mean[t.k - 1])
        rel = abs(s - t.value) / abs(t.value) if t.value else float("inf")
        rows.append((t.k, t.value, t.std_error, s, float(sim.sd[t.k - 1]), rel, rel < cfg.tolerance))
    return ComparisonReport(cfg, rows)


_CONFIG_OVERRIDES = ("target", "model", "lam", "profile", "entry", "p", "n", "k_max", "samples", "seed", "reps", "tolerance", "out_dir")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--target")
@click.option("--model", type=click.Choice(["mp", "cumulants", "sparse", "profile"]))
@click.option("--c", "c_text")
@click.option("--lambda", "lam", type=float)
@click.option("--profile")
@click.option("--entry")
@click.option("--p", type=int)
@click.option("--n", type=int)
@click.option("--k-max", type=int)
@click.option("--samples", type=int)
@click.option("--seed", type=int)
@click.option("--reps", type=int)
@click.option("--tolerance", type=float)
@click.option("--out", "out_dir")
@click.option("--json", "as_json", is_flag=True)
def compare(config_path, c_text, as_json, **flags) -> None:
    """Theory versus simulation; exit code 1 when any moment misses the tolerance."""
    cfg = ExperimentConfig.load(config_path) if config_path else ExperimentConfig()
    for key in _CONFIG_OVERRIDES:
        if flags.get(key) is not None:
            setattr(cfg, key, flags[key])
    if c_text:
        cfg.cumulants = parse_cumulants(c_text)
    report = run_compare(cfg)
    payload = report.to_dict()
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(payload, indent=2, default=_jsonable))
        (out / "config.yaml").write_text(cfg.dump())
    text = _table(["k", "theory", "theory_se", "simulated", "sim_sd", "rel_error", "pass"], [list(r) for r in report.rows])
    emit(payload, as_json, text + f"\nconfig {cfg.hash()}: {'PASS' if report.passed else 'FAIL'}")
    sys.exit(EXIT_PASS if report.passed else EXIT_FAIL)


FIGURE_P, FIGURE_N, FIGURE_LAM = 1000, 2000, 3.0


def _sum_square_profile(x, z):
    # (i + j)^2 / (2 n^2) with i = x p, j = z n
    return (x * FIGURE_P / FIGURE_N + z) ** 2 / 2


def _quadratic_link_profile(t):
    return t**2 + 4 * t


def figure_presets(seed: int) -> list:
    """(figure, panel, spec, replications, pool replications) for the four histogram figures."""
    p, n, lam = FIGURE_P, FIGURE_N, FIGURE_LAM
    ber = {"entry": "bernoulli", "lam": lam}
    out = [
        (1, "s_gaussian", MatrixSpec(p, n, seed=seed), 30, True),
        (1, "s_bernoulli", MatrixSpec(p, n, seed=seed, **ber), 30, True),
        (1, "s_sum_square_profile", MatrixSpec(p, n, seed=seed, profile=_sum_square_profile, **ber), 30, True),
        (1, "s_triangular", MatrixSpec(p, n, seed=seed, mask="triangular", **ber), 30, True),
    ]
    for fig, link in ((2, "r_sym"), (3, "c_sym")):
        out.append((fig, f"{link}_gaussian", MatrixSpec(p, n, target=link, seed=seed), 2, False))
        out.append((fig, f"{link}_bernoulli", MatrixSpec(p, n, target=link, seed=seed, **ber), 2, False))
    for link in ("t_sym", "h_sym", "r_sym", "c_sym"):
        spec = MatrixSpec(p, n, target=link, seed=seed, link_profile=_quadratic_link_profile, **ber)
        out.append((4, f"{link}_profile", spec, 30, True))
    return out


def run_suite(name: str, out_dir: Optional[str] = None, samples: Optional[int] = None, only: Optional[set] = None) -> dict:
    from . import acceptance

    mc = MCConfig(samples=samples) if samples else MCConfig()
    if name == "acceptance":
        results = acceptance.run_all(mc, only)
        summary = {
            "suite": name,
            "passed": all(r.passed for r in results),
            "checks": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds} for r in results],
        }
    elif name == "oracle-crosscheck":
        res = acceptance.check_limits_vs_oracle(mc)
        summary = {
            "suite": name,
            "passed": res.passed,
            "detail": res.detail,
            "rows": [dict(zip(["y", "link", "word", "limit", "std_error", "ratio_n64", "agree"], r)) for r in res.rows],
        }
    elif name == "paper-figures":
        summary = {"suite": name, "passed": True, "seed": mc.seed, "figures": []}
        for fig, label, spec, reps, pooled in figure_presets(mc.seed):
            rep = replicate(spec, reps, 4)
            if pooled:
                panels = [(label, rep.pooled.eigenvalues, rep.mean.tolist())]
            else:
                # one histogram per replication: these spectra need not settle to a single limit
                panels = []
                for r, rs in enumerate(rep.seeds):
                    single = esd(generate_x(replace(spec, seed=rs)))
                    panels.append((f"{label}_rep{r + 1}", single.eigenvalues, list(single.empirical_moments.values())))
            for panel, eigs, moments in panels:
                counts, edges = np.histogram(eigs, bins=100)
                if out_dir:
                    out = Path(out_dir)
                    out.mkdir(parents=True, exist_ok=True)
                    _write_csv(out / f"fig{fig}_{panel}_hist.csv", ["bin_lo", "bin_hi", "count"], [[edges[i], edges[i + 1], int(counts[i])] for i in range(len(counts))])
                summary["figures"].append({"figure": fig, "name": panel, "reps": reps, "mean_moments": moments})
    else:
        raise click.UsageError(f"unknown suite {name}")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}_summary.json").write_text(json.dumps(summary, indent=2, default=_jsonable))
    return summary


@main.command()
@click.argument("name", type=click.Choice(["acceptance", "oracle-crosscheck", "paper-figures"]))
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--samples", type=int)
@click.option("--only", help="Comma-separated criterion numbers (acceptance suite).")
@click.option("--json", "as_json", is_flag=True)
def suite(name, out_dir, samples, only, as_json) -> None:
    """Run a preset experiment set."""
    chosen = {int(x) for x in only.split(",")} if only else None
    summary = run_suite(name, out_dir, samples, chosen)
    if name == "acceptance":
        text = "\n".join(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['number']:>2} {c['name']}: {c['detail']}" for c in summary["checks"])
    elif name == "oracle-crosscheck":
        text = summary["detail"]
    else:
        text = "\n".join(f"figure {f['figure']} {f['name']}: {f['mean_moments']}" for f in summary["figures"])
    emit(summary, as_json, text)
    sys.exit(EXIT_PASS if summary["passed"] else EXIT_FAIL)


def entrypoint() -> None:
    """Console entry with the documented exit codes for usage and internal errors."""
    try:
        main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except (ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except Exception as exc:  # noqa: BLE001 - reported with exit code 3
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)


if __name__ == "__main__":
    entrypoint()
