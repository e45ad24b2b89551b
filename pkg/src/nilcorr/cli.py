"""``nilcorr``: run correlation, averaging, equidistribution, suspension and
approximation experiments from a config file and/or flags, writing CSV and a
plain-text summary.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import config as C
from .averaging import Cesaro, Primes, approximation_error, error_sweep, scheme_average
from .correlate import CorrelationSequence, CorrelationSpec, default_rule
from .equidist import density_limit_scan
from .nilseq import (HEISENBERG, TORUS, Nilsequence, example_alpha, example_nil_approx,
                     mollify)
from .observables import EXACT, QuadratureRule, SampledObservable, TrigObservable, e, product_obs
from .poly import BracketMap, VectorPolynomial, fractional
from .suspension import alpha_tilde_values, box_volume, exceptional
from .systems import HeisenbergAction, TorusAction


SUBCOMMANDS = ("correlate", "average", "equidist", "suspend", "approx-error", "example")


def _error(msg: str) -> None:
    print(f"nilcorr: {msg}", file=sys.stderr)


def fmt(x: float) -> str:
    return f"{float(x):.16e}"


# ---------------------------------------------------------------------------
# building runtime objects


class Workspace:
    """Runtime objects for the named blocks of a validated config."""

    def __init__(self, cfg: C.ExperimentConfig):
        self.cfg = cfg
        self.systems, self.obs, self.polys, self.corrs, self.nilseqs = {}, {}, {}, {}, {}
        self.heis_base = {}
        for b in cfg.of_family("system"):
            if b.kind == "system.torus":
                self.systems[b.name] = TorusAction(C.typed(b, "angles"))
            else:
                self.systems[b.name] = HeisenbergAction([c.value for c in C.typed(b, "g")])
                self.heis_base[b.name] = C.typed(b, "base")
        for b in cfg.of_family("poly"):
            self.polys[b.name] = VectorPolynomial.parse(C.typed(b, "coords"))

    def observable(self, name: str, dim: int):
        if (name, dim) in self.obs:
            return self.obs[name, dim]
        b = next(x for x in self.cfg.of_family("obs") if x.name == name)
        if b.kind == "obs.char":
            freq = C.typed(b, "freq")
            if len(freq) != dim:
                raise C.ConfigError([(b.line, f"observable {name} has dimension {len(freq)}, space has {dim}")])
            f = TrigObservable.character(freq, C.typed(b, "amp"))
        elif b.kind == "obs.const":
            f = TrigObservable.constant(C.typed(b, "c"), dim)
        elif b.kind == "obs.fracexp":
            scale = C.typed(b, "scale").value
            f = SampledObservable(lambda x: e(scale * fractional(x[..., 0])), dim, 1.0, (0.0,))
        else:
            f = mollify(self.observable(C.typed(b, "base"), dim), C.typed(b, "width"))
        self.obs[name, dim] = f
        return f

    def correlation(self, name: str) -> CorrelationSpec:
        if name in self.corrs:
            return self.corrs[name]
        b = next(x for x in self.cfg.of_family("correlation") if x.name == name)
        system = self.systems[C.typed(b, "system")]
        fs = []
        for factors in C.typed(b, "functions"):
            f = self.observable(factors[0], system.dim)
            for extra in factors[1:]:
                f = product_obs(f, self.observable(extra, system.dim))
            fs.append(f)
        polys = [self.polys[p] for p in C.typed(b, "polys")]
        brackets = C.typed(b, "brackets")
        if brackets is not None:
            brackets = [BracketMap.uniform(k, system.rank) if isinstance(k, str) else BracketMap(tuple(k))
                        for k in brackets]
        mode = C.typed(b, "integration")
        Q = C.typed(b, "Q")
        if mode == "exact":
            integration = EXACT
        elif mode == "quadrature":
            integration = QuadratureRule(Q)
        else:
            integration = None
        try:
            spec = CorrelationSpec(system, fs, polys, brackets, integration)
        except ValueError as exc:
            raise C.ConfigError([(b.line, str(exc))]) from None
        if integration is None and spec.integration != EXACT:
            spec.integration = QuadratureRule(Q) if system.dim == 1 else default_rule(system.dim)
        self.corrs[name] = spec
        return spec

    def nilsequence(self, name: str) -> Nilsequence:
        b = next(x for x in self.cfg.of_family("nilseq") if x.name == name)
        space_name = C.typed(b, "space")
        system = self.systems[space_name]
        F = self.observable(C.typed(b, "F"), system.dim)
        g, x = C.typed(b, "g"), C.typed(b, "x")
        if isinstance(system, TorusAction):
            g = g if g is not None else list(system.angles[0])
            x = x if x is not None else [0.0] * system.dim
            return Nilsequence(TORUS, g, x, F, C.typed(b, "step"))
        g = [c.value for c in g] if g is not None else system.g
        x = x if x is not None else self.heis_base[space_name]
        return Nilsequence(HEISENBERG, g, x, F, C.typed(b, "step"))


def _scheme(b: C.Block):
    if "cesaro" in b.entries:
        M, N = C.typed(b, "cesaro")
        return Cesaro(M, N)
    r, s = C.typed(b, "ap")
    return Primes(C.typed(b, "primes"), r, s)


# ---------------------------------------------------------------------------
# experiments; each returns (header, rows, summary lines)


def run_correlate(ws: Workspace, b: C.Block):
    spec = ws.correlation(C.typed(b, "correlation"))
    M, N = C.typed(b, "range")
    ns = np.arange(M, N)
    vals = CorrelationSequence(spec).values(ns)
    rows = [[str(n), fmt(v.real), fmt(v.imag)] for n, v in zip(ns, vals)]
    summary = [f"correlate: {len(ns)} values for n in [{M},{N})",
               f"integration: {'exact' if spec.integration == EXACT else f'quadrature Q={spec.integration.Q}'}",
               f"max |alpha(n)|: {fmt(np.max(np.abs(vals)))}"]
    return ["n", "re_alpha", "im_alpha"], rows, summary


def run_average(ws: Workspace, b: C.Block):
    spec = ws.correlation(C.typed(b, "correlation"))
    scheme = _scheme(b)
    v = scheme_average(CorrelationSequence(spec), scheme)
    return (["scheme", "value_re", "value_im"], [[scheme.label(), fmt(v.real), fmt(v.imag)]],
            [f"average of alpha over {scheme.label()}: {fmt(v.real)} + {fmt(v.imag)}i"])


def run_equidist(ws: Workspace, b: C.Block):
    q = ws.polys[C.typed(b, "poly")]
    if q.ell != 1:
        raise C.ConfigError([(b.line, "equidist needs a scalar polynomial")])
    if "range" in b.entries:
        scheme = Cesaro(*C.typed(b, "range"))
    else:
        scheme = Primes(C.typed(b, "primes"), *C.typed(b, "ap"))
    reports = density_limit_scan(q, C.typed(b, "delta"), scheme)
    rows = [[fmt(r.delta), str(r.hits), str(r.total), fmt(r.density), r.verdict] for r in reports]
    summary = [f"equidist: {q.literal()[0]} over {scheme.label()}"]
    summary += [f"  delta={r.delta}: density {r.density:.6f} ({r.verdict})" for r in reports]
    summary.append("note: finite-range densities; the statement being probed is the double "
                   "limit delta -> 0+ of the N -> infinity density")
    return ["delta", "hits", "total", "density", "verdict"], rows, summary


def run_suspend(ws: Workspace, b: C.Block):
    spec = ws.correlation(C.typed(b, "correlation"))
    delta = C.typed(b, "delta")
    M, N = C.typed(b, "range")
    rule = C.typed(b, "rule")
    ns = np.arange(M, N)
    alpha = CorrelationSequence(spec).values(ns)
    scaled = alpha_tilde_values(spec, delta, ns) / box_volume(delta, spec.system.rank, spec.m)
    exc = exceptional(spec.polys, delta, ns, rule=rule)
    diff = np.abs(alpha - scaled)
    rows = [[str(n), str(int(x)), fmt(a.real), fmt(s.real), fmt(d)]
            for n, x, a, s, d in zip(ns, exc, alpha, scaled, diff)]
    ok = diff[~exc]
    summary = [f"suspend: delta={delta}, n in [{M},{N}), exceptional rule={rule}",
               f"exceptional fraction: {exc.mean():.6f}",
               f"max |alpha - delta^-(ell m) alpha_tilde| off the exceptional set: {fmt(ok.max() if ok.size else 0.0)}",
               f"max over all n: {fmt(diff.max())}"]
    return ["n", "exceptional", "re_alpha", "re_alpha_tilde_scaled", "abs_diff"], rows, summary


def _error_rows(alpha, psi, scheme, sweep_length, sweep_starts):
    rows, summary = [], []
    err = approximation_error(alpha, psi, scheme)
    rows.append([scheme.label(), fmt(err)])
    summary.append(f"error over {scheme.label()}: {fmt(err)}")
    if sweep_length and sweep_starts:
        sweep = error_sweep(alpha, psi, sweep_length, sweep_starts)
        for M, v in sweep:
            rows.append([f"cesaro[{M}:{M + sweep_length})", fmt(v)])
        summary.append(f"window sweep (length {sweep_length}): max {fmt(max(v for _, v in sweep))}")
    return rows, summary


def run_approx_error(ws: Workspace, b: C.Block):
    spec = ws.correlation(C.typed(b, "correlation"))
    psi = ws.nilsequence(C.typed(b, "nilseq"))
    rows, summary = _error_rows(CorrelationSequence(spec), psi, _scheme(b),
                                C.typed(b, "sweep_length"), C.typed(b, "sweep_starts"))
    summary.insert(0, f"approx-error: candidate verification only (declared step {psi.step})")
    return ["scheme", "error"], rows, summary


def run_example(ws: Workspace, b: C.Block):
    eps = C.typed(b, "epsilon")
    psi = example_nil_approx(eps)
    M, N = C.typed(b, "cesaro")
    L, count, top = C.typed(b, "sweep_length"), C.typed(b, "sweep_count"), C.typed(b, "sweep_max")
    starts = [int(v) for v in np.linspace(1, top, count)] if count > 1 else [1]
    rows, summary = _error_rows(example_alpha, psi, Cesaro(M, N), L, starts)
    prows, psummary = _error_rows(example_alpha, psi, Primes(C.typed(b, "primes")), None, None)
    rows += prows
    summary += psummary
    summary.insert(0, f"example: alpha(n) = e({{sqrt(2) n}}/sqrt(2)) against mollified psi with "
                      f"w = epsilon/4 = {eps / 4} (constructive, 1-step)")
    summary.append(f"target epsilon: {eps}")
    return ["scheme", "error"], rows, summary


RUNNERS = {
    "experiment.correlate": run_correlate,
    "experiment.average": run_average,
    "experiment.equidist": run_equidist,
    "experiment.suspend": run_suspend,
    "experiment.approx-error": run_approx_error,
    "experiment.example": run_example,
}


def write_outputs(out_dir: Path, kind: str, header, rows, summary) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{kind}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n")


def run_experiment(cfg: C.ExperimentConfig, out_dir: str | Path | None = None) -> int:
    """Run the config's experiment; returns the process exit code."""
    b = cfg.experiment
    if b is None:
        _error("config has no experiment block")
        return 1
    if out_dir is None:
        ob = cfg.of_family("output")
        out_dir = C.typed(ob[0], "dir") if ob else "out"
    try:
        ws = Workspace(cfg)
        header, rows, summary = RUNNERS[b.kind](ws, b)
    except C.ConfigError as exc:
        _error(f"{exc}")
        return 1
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        _error(f"runtime error: {exc}")
        return 2
    try:
        write_outputs(Path(out_dir), b.kind.split(".", 1)[1], header, rows, summary)
    except OSError as exc:
        _error(f"cannot write outputs: {exc}")
        return 2
    for line in summary:
        print(line)
    return 0


# ---------------------------------------------------------------------------
# command line

FLAG_KEYS = {  # argparse dest -> config key
    "range": "range", "cesaro": "cesaro", "primes": "primes", "ap": "ap", "delta": "delta",
    "rule": "rule", "epsilon": "epsilon", "correlation": "correlation", "nilseq": "nilseq",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilcorr", description=__doc__.split("\n\n")[0].replace("\n", " "),
                                epilog=__doc__.split("\n\n")[1].strip())
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="experiment config file")
        s.add_argument("--out", type=Path, help="output directory (default: config output.dir or ./out)")
        s.add_argument("--threads", type=int, help="worker threads (sets NILCORR_THREADS)")
        if name in ("correlate", "average", "suspend", "approx-error"):
            s.add_argument("--correlation", help="name of the correlation block to use")
        if name in ("correlate", "suspend", "equidist"):
            s.add_argument("--range", help="index window M:N")
        if name in ("average", "approx-error", "example"):
            s.add_argument("--cesaro", help="Cesaro window M:N")
        if name in ("average", "approx-error", "equidist", "example"):
            s.add_argument("--primes", help="average over primes p <= N")
        if name in ("average", "approx-error", "equidist"):
            s.add_argument("--ap", help="progression r:s, averaging at r p + s")
        if name in ("equidist", "suspend"):
            s.add_argument("--delta", help="delta, or a descending comma list for equidist")
        if name == "equidist":
            s.add_argument("--poly", help="scalar polynomial literal, e.g. 'sqrt(2)*x'")
        if name == "suspend":
            s.add_argument("--rule", choices=("coordinate", "paper"))
        if name == "approx-error":
            s.add_argument("--nilseq", help="name of the nilseq block to use")
        if name == "example":
            s.add_argument("--epsilon", help="target error epsilon in (0,1)")
    return p


def _flag_value(key: str, text: str):
    if key == "delta" and "," in text:
        return [C.Raw(t.strip()) for t in text.split(",")]
    if key == "delta":
        return [C.Raw(text)]
    return C.Raw(text)


def config_from_args(args) -> C.ExperimentConfig:
    text = args.config.read_text() if args.config else ""
    blocks = C._read_blocks(text)
    kind = f"experiment.{args.command}"
    exp = [b for b in blocks if b.kind.startswith("experiment")]
    if exp and exp[0].kind != kind:
        raise C.ConfigError([(exp[0].line, f"config runs {exp[0].kind}, not {kind}")])
    if not exp:
        blk = C.Block(kind, "", {})
        blocks.append(blk)
    else:
        blk = exp[0]
    if getattr(args, "poly", None):
        blocks.append(C.Block("poly", "_cli_poly", {"coords": [args.poly]}))
        blk.entries["poly"] = C.Raw("_cli_poly")
    given = {key: getattr(args, dest) for dest, key in FLAG_KEYS.items()
             if getattr(args, dest, None) is not None}
    if kind != "experiment.example":
        # a scheme chosen on the command line replaces the config's scheme
        if "primes" in given:
            blk.entries.pop("cesaro", None)
            blk.entries.pop("range", None) if kind == "experiment.equidist" else None
        if "cesaro" in given or (kind == "experiment.equidist" and "range" in given):
            blk.entries.pop("primes", None)
    for key, v in given.items():
        if key == "delta" and kind == "experiment.suspend":
            blk.entries[key] = C.Raw(v)
        else:
            blk.entries[key] = _flag_value(key, v)
    return C.validate(C.ExperimentConfig(blocks))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ["NILCORR_THREADS"] = str(max(1, args.threads))
    try:
        cfg = config_from_args(args)
    except C.ConfigError as exc:
        _error(f"invalid configuration:\n{exc}")
        return 1
    except OSError as exc:
        _error(f"cannot read config: {exc}")
        return 2
    return run_experiment(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
