"""Command-line runner: ``python -m dissiprep <command> --config cfg.json``.

Commands write to ``--out DIR`` when given (one file per table) and to stdout
otherwise. Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit import BASES, build_experiment, fold_gates
from .config import AUTO, BACKENDS, ExperimentConfig, resolve_filter
from .errors import DissiprepError, EvenFoldFactor, InvalidConfig, NumericalFailure
from .experiment import MAX_CHANNEL_QUBITS, channel_trace, circuit_trace
from .filters import FilterParams, TimeGrid, dft_filter, filter_freq
from .mitigation import ZnePoint, zne_exponential, zne_linear
from .model import IsingParams
from .noise import NoiseModel
from .simulator import sample_energy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

EVOLVE_HEADER = ("m", "E", "F", "p0", "Zanc")
ZNE_POINT_HEADER = ("m", "G", "E", "stderr")
ZNE_FIT_HEADER = ("m", "kind", "extrapolated", "uncertainty", "fallback")
FILTER_FREQ_HEADER = ("omega", "f_exact", "f_dft_real", "f_dft_imag")
FILTER_TIME_HEADER = ("s", "re_f", "im_f", "abs_f")


def fmt(x) -> str:
    """Locale-independent float text with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


# --- configuration parsing ------------------------------------------------------

_TOP_KEYS = {
    "ising", "tau", "dt", "n_t", "filter", "grid", "shots", "shots_per_basis", "noise",
    "seed", "backend", "jump", "endpoint", "trotter_substeps", "w_reps", "merge_center",
}


def _number(d: dict, key: str, path: str, kind=float, default=None):
    if key not in d:
        if default is None:
            raise InvalidConfig("missing required entry", field=f"{path}{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidConfig(f"expected a number, got {v!r}", field=f"{path}{key}")
    if kind is int:
        if float(v) != int(v):
            raise InvalidConfig(f"expected an integer, got {v!r}", field=f"{path}{key}")
        return int(v)
    return float(v)


def _section(d: dict, key: str) -> dict:
    v = d[key]
    if not isinstance(v, dict):
        raise InvalidConfig(f"expected an object, got {v!r}", field=key)
    return v


def parse_config(text: str) -> ExperimentConfig:
    """Build an ``ExperimentConfig`` from JSON text, reporting the offending line or field."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(exc.msg, line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise InvalidConfig("top level must be a JSON object", line=1)
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        raise InvalidConfig("unknown entry", field=unknown[0])
    if "ising" not in raw:
        raise InvalidConfig("missing required entry", field="ising")
    ising = _section(raw, "ising")
    try:
        params = IsingParams(
            N=_number(ising, "N", "ising.", int),
            J=_number(ising, "J", "ising.", default=-1.0),
            Bx=_number(ising, "Bx", "ising.", default=-1.2),
        )
    except InvalidConfig:
        raise
    except ValueError as exc:
        raise InvalidConfig(str(exc), field="ising") from None

    filt = raw.get("filter", AUTO)
    if filt != AUTO:
        if not isinstance(filt, dict):
            raise InvalidConfig("expected 'auto' or an object", field="filter")
        try:
            filt = FilterParams(
                a=_number(filt, "a", "filter."),
                b=_number(filt, "b", "filter."),
                beta=_number(filt, "beta", "filter."),
                mode=filt.get("mode", "fermi_dirac"),
            )
        except InvalidConfig:
            raise
        except ValueError as exc:
            raise InvalidConfig(str(exc), field="filter") from None

    grid = raw.get("grid", AUTO)
    if grid != AUTO:
        if not isinstance(grid, dict):
            raise InvalidConfig("expected 'auto' or an object", field="grid")
        M_s = _number(grid, "M_s", "grid.", int)
        try:
            if "Delta_s" in grid:
                grid = TimeGrid(M_s=M_s, Delta_s=_number(grid, "Delta_s", "grid."))
            else:
                grid = TimeGrid.from_range(_number(grid, "S_s", "grid."), M_s)
        except InvalidConfig:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidConfig(str(exc), field="grid") from None

    noise = raw.get("noise")
    if noise is not None:
        if not isinstance(noise, dict):
            raise InvalidConfig("expected null or an object", field="noise")
        try:
            noise = NoiseModel(
                p2q=_number(noise, "p2q", "noise.", default=NoiseModel().p2q),
                p_spam=_number(noise, "p_spam", "noise.", default=NoiseModel().p_spam),
            )
        except InvalidConfig:
            raise
        except ValueError as exc:
            raise InvalidConfig(str(exc), field="noise") from None

    kwargs = {}
    for key, kind in (("tau", float), ("dt", float), ("n_t", int), ("shots", int), ("seed", int),
                      ("trotter_substeps", int), ("w_reps", int)):
        if key in raw:
            kwargs[key] = _number(raw, key, "", kind)
    if raw.get("shots_per_basis") is not None:
        kwargs["shots_per_basis"] = _number(raw, "shots_per_basis", "", int)
    for key in ("backend", "jump", "endpoint"):
        if key in raw:
            if not isinstance(raw[key], str):
                raise InvalidConfig(f"expected a string, got {raw[key]!r}", field=key)
            kwargs[key] = raw[key]
    if "merge_center" in raw:
        if not isinstance(raw["merge_center"], bool):
            raise InvalidConfig("expected true or false", field="merge_center")
        kwargs["merge_center"] = raw["merge_center"]
    try:
        return ExperimentConfig(ising=params, filter=filt, grid=grid, noise=noise, **kwargs)
    except ValueError as exc:
        field = next((k for k in kwargs if k in str(exc)), None)
        raise InvalidConfig(str(exc), field=field) from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config: {exc}") from None
    return parse_config(text)


# --- output ----------------------------------------------------------------------


class Sink:
    """Collects named outputs and writes them to a directory or stdout."""

    def __init__(self, out: str | None, stream=None):
        self.out = Path(out) if out else None
        self.stream = stream if stream is not None else sys.stdout
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, content: str) -> None:
        if self.out is not None:
            (self.out / name).write_text(content)
        else:
            self.stream.write(content)
            if not content.endswith("\n"):
                self.stream.write("\n")

    def table(self, name: str, header, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        self.text(name, buf.getvalue())


def _json(obj) -> str:
    def conv(v):
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        if isinstance(v, (float, np.floating)):
            return float(fmt(v))
        if isinstance(v, np.integer):
            return int(v)
        return v

    return json.dumps(conv(obj), indent=2, sort_keys=True) + "\n"


# --- commands --------------------------------------------------------------------


def cmd_spectrum(cfg: ExperimentConfig, sink: Sink) -> None:
    rf = resolve_filter(cfg)
    sp = rf.spectrum
    report = {
        "E0": sp.E0,
        "gap": sp.gap,
        "radius": sp.radius,
        "g0": sp.degeneracy,
        "filter": {"a": rf.params.a, "b": rf.params.b, "beta": rf.params.beta, "mode": rf.params.mode},
        "grid": {"M_s": rf.grid.M_s, "Delta_s": rf.grid.Delta_s, "S_s": rf.grid.S_s},
    }
    sink.text("spectrum.json", _json(report))


def cmd_filter(cfg: ExperimentConfig, sink: Sink, n_omega: int = 401) -> None:
    rf = resolve_filter(cfg)
    p, g = rf.params, rf.grid
    span = p.b - p.a
    omega = np.linspace(p.a - span, p.b + span, n_omega)
    exact = filter_freq(omega, p)
    dft = dft_filter(rf.samples, g, omega)
    sink.table("filter_freq.csv", FILTER_FREQ_HEADER, zip(omega, exact, dft.real, dft.imag))
    smp = rf.samples
    sink.table("filter_time.csv", FILTER_TIME_HEADER, zip(smp.s, smp.f.real, smp.f.imag, smp.abs_f))


def _noise_for(cfg: ExperimentConfig) -> NoiseModel | None:
    if cfg.backend == "circuit_noisy":
        return cfg.noise if cfg.noise is not None else NoiseModel()
    return None


def cmd_evolve(cfg: ExperimentConfig, sink: Sink, m_max: int) -> None:
    if m_max < 0:
        raise InvalidConfig("m_max must be non-negative", field="m_max")
    if cfg.backend == "channel_exact":
        if cfg.ising.N > MAX_CHANNEL_QUBITS:
            raise InvalidConfig(f"channel_exact needs N <= {MAX_CHANNEL_QUBITS}", field="ising.N")
        recs = channel_trace(cfg, m_max)
        rows = [(r.m, r.E, r.F, r.p0, r.z_anc) for r in recs]
    elif cfg.backend == "circuit_noiseless":
        recs = circuit_trace(cfg, m_max)
        rows = [(r.m, r.E, r.F, r.p0, r.z_anc) for r in recs]
    else:
        rows = []
        noise = _noise_for(cfg)
        for m in range(m_max + 1):
            est, recs = sample_energy(cfg, m, cfg.per_basis_shots, noise, 1, cfg.seed)
            if m > 0:
                anc = np.concatenate([recs[b].bits[:, m - 1] for b in BASES])
                p0 = float(1.0 - anc.mean())
            else:
                p0 = float("nan")
            rows.append((m, est.mean, float("nan"), p0, 2 * p0 - 1))
    sink.table("evolve.csv", EVOLVE_HEADER, rows)


def cmd_zne(cfg: ExperimentConfig, sink: Sink, m_list: list[int], g_list: list[int]) -> None:
    noise = cfg.noise if cfg.noise is not None else NoiseModel()
    for G in g_list:
        if G < 1 or G % 2 == 0:
            raise EvenFoldFactor(f"fold factor must be an odd positive integer, got {G}")
    points, fits = [], []
    for m in sorted(m_list):
        by_g = {}
        for G in sorted(g_list):
            est = sample_energy(cfg, m, cfg.per_basis_shots, noise, G, cfg.seed)[0]
            by_g[G] = ZnePoint(G, est.mean, est.stderr)
            points.append((m, G, est.mean, est.stderr))
        if 1 in by_g and 3 in by_g:
            lin = zne_linear(by_g[1], by_g[3])
            fits.append((m, "linear", lin.extrapolated, lin.uncertainty, lin.fallback))
            if 5 in by_g:
                ex = zne_exponential(by_g[1], by_g[3], by_g[5], seed=cfg.seed)
                fits.append((m, "exponential", ex.extrapolated, ex.uncertainty, ex.fallback))
    sink.table("zne_points.csv", ZNE_POINT_HEADER, points)
    sink.table("zne_fits.csv", ZNE_FIT_HEADER, fits)


def cmd_circuit_dump(cfg: ExperimentConfig, sink: Sink, m: int, basis: str, G: int) -> None:
    c = fold_gates(build_experiment(m, cfg, basis), G)
    sink.text("circuit.txt", c.to_text())


# --- entry point -----------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dissiprep", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON experiment configuration")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--seed", type=int, help="master seed, overrides the config")
    common.add_argument("--backend", choices=BACKENDS, help="overrides the config backend")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("spectrum", parents=[common], help="ground energy, gap and derived filter")
    p = sub.add_parser("filter", parents=[common], help="filter in frequency and time")
    p.add_argument("--n-omega", type=int, default=401)
    p = sub.add_parser("evolve", parents=[common], help="observables versus step count")
    p.add_argument("--m-max", type=int, default=20)
    p = sub.add_parser("zne", parents=[common], help="noisy estimates and extrapolations")
    p.add_argument("--m-list", type=_int_list, default=[5, 10, 15, 20])
    p.add_argument("--g-list", type=_int_list, default=[1, 3, 5])
    p = sub.add_parser("circuit-dump", parents=[common], help="gate list in text form")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--basis", choices=BASES, default="zz")
    p.add_argument("--fold", type=int, default=1)
    return parser


def main(argv: list[str] | None = None, stream=None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.backend is not None:
            overrides["backend"] = args.backend
        if overrides:
            cfg = replace(cfg, **overrides)
        sink = Sink(args.out, stream)
        if args.command == "spectrum":
            cmd_spectrum(cfg, sink)
        elif args.command == "filter":
            cmd_filter(cfg, sink, args.n_omega)
        elif args.command == "evolve":
            cmd_evolve(cfg, sink, args.m_max)
        elif args.command == "zne":
            cmd_zne(cfg, sink, args.m_list, args.g_list)
        else:
            cmd_circuit_dump(cfg, sink, args.m, args.basis, args.fold)
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=err)
        return EXIT_NUMERICAL
    except (DissiprepError, ValueError) as exc:
        print(f"configuration error: {exc}", file=err)
        return EXIT_CONFIG
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())
