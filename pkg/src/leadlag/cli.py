"""
Command-line front end.

Subcommands ``analyze``, ``synth``, ``map`` and ``band`` each write their
artifacts plus a ``manifest.json`` (config echo, version, input and output
checksums, spans, timing) into ``--out``. Errors on input files exit with
code 2 and name the offending path.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import LeadLagError
from .lattice import DistanceKind
from .pathsel import BoundarySpec, prepare_energy, select_best
from .series import TimeSeries, log_returns, normalize_rms, read_csv, trim_common, write_csv
from .stats import (
    DEFAULT_GRID,
    SignalMap,
    bootstrap_band,
    moving_window_scan,
    path_to_lags,
    signal_maps,
    temperature_profile,
)
from .synth import child_seeds, gen_random_model, paper_model, synthetic_pair
from .thermal import Method

EXIT_INPUT = 2


class InputError(Exception):
    """Bad or unreadable user input; reported with exit code 2."""


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0, help="master seed for all randomness (default: 0)")
    g.add_argument("--temperature", type=float, default=2.0, help="thermal temperature T (default: 2.0)")
    g.add_argument("--method", choices=["top", "tops"], default="tops", help="path flavour (default: tops)")
    g.add_argument("--distance", choices=["minus", "plus", "min"], default="minus", help="local distance (default: minus)")
    g.add_argument("--max-offset", type=int, default=30, help="largest boundary offset from the corners (default: 30)")
    g.add_argument("--boundary-grid", action="store_true", help="use every (i1, i2) corner offset instead of the two axes")
    g.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    g.add_argument("--format", choices=["json", "csv"], default="json", help="format of tabular artifacts (default: json)")
    g.add_argument("--workers", type=int, default=1, help="threads for ensemble work (default: 1)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="leadlag", description="Thermal optimal path lead-lag analysis.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", parents=[common], help="best path, optional band and window scans for a CSV pair")
    pa.add_argument("x", type=Path, help="CSV of the first series (label,value)")
    pa.add_argument("y", type=Path, help="CSV of the second series (label,value)")
    pa.add_argument("--column", default=None, help="value column name when a CSV has several")
    pa.add_argument("--transform", choices=["none", "log-returns"], default="none",
                    help="none: standardize the values; log-returns: log returns scaled by their RMS (default: none)")
    pa.add_argument("--windows", type=_ints, default=[12, 24, 36, 48], help="moving-window lengths (default: 12,24,36,48)")
    pa.add_argument("--step", type=int, default=1, help="moving-window step (default: 1)")
    pa.add_argument("--n-bootstrap", type=int, default=0, help="reshuffles for a bootstrap band; 0 skips it (default: 0)")
    pa.add_argument("--signal-map", type=Path, default=None, help="map JSON from `map` used to annotate windows with rho")
    pa.add_argument("--alpha", type=float, default=0.05, help="two-sided significance level (default: 0.05)")
    pa.add_argument("--dump-energy", action="store_true", help="also write the distance matrix as CSV")

    ps = sub.add_parser("synth", parents=[common], help="generate a synthetic lead-lag pair")
    ps.add_argument("--paper-model", choices=["A", "B", "C"], default="A", help="five-segment benchmark model (default: A)")
    ps.add_argument("--random-model", action="store_true", help="draw random lags in [-30, 30] and a in [0.7, 1] instead")
    ps.add_argument("--a", type=float, default=0.8, help="coupling coefficient (default: 0.8)")
    ps.add_argument("--f", type=float, default=0.2, help="noise ratio (default: 0.2)")
    ps.add_argument("--b", type=float, default=0.7, help="AR(1) coefficient of the driver (default: 0.7)")

    pm = sub.add_parser("map", parents=[common], help="signal-strength maps and temperature profile")
    pm.add_argument("--a-values", type=_floats, default=list(DEFAULT_GRID), help="coupling grid (default: 0.01..0.96 step 0.05)")
    pm.add_argument("--f-values", type=_floats, default=list(DEFAULT_GRID), help="noise-ratio grid (default: 0.01..0.96 step 0.05)")
    pm.add_argument("--temperatures", type=_floats, default=None, help="comma list of temperatures (default: --temperature)")
    pm.add_argument("--ensemble", type=int, default=100, help="pairs per cell (default: 100)")
    pm.add_argument("--length", type=int, default=100, help="segment length of the random models (default: 100)")

    pb = sub.add_parser("band", parents=[common], help="bootstrap quantile band for a CSV pair")
    pb.add_argument("x", type=Path)
    pb.add_argument("y", type=Path)
    pb.add_argument("--column", default=None)
    pb.add_argument("--transform", choices=["none", "log-returns"], default="none")
    pb.add_argument("--n-bootstrap", type=int, default=100, help="number of reshuffles (default: 100)")
    return ap


# ------------------------------------------------------------------ helpers


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


class _Run:
    """Collects written artifacts and emits the manifest."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[Path] = []
        self.inputs: dict = {}
        self.spans: dict = {}
        self.notes: list[str] = []
        self.t0 = time.perf_counter()

    def write_json(self, name: str, payload) -> Path:
        p = self.out / name
        p.write_text(json.dumps(_jsonable(payload), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        self.outputs.append(p)
        return p

    def write_rows(self, name: str, rows: list[dict]) -> Path:
        p = self.out / name
        cols = list(rows[0]) if rows else []
        with p.open("w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join("" if r[c] is None else repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n")
        self.outputs.append(p)
        return p

    def table(self, stem: str, rows: list[dict], payload=None):
        if self.args.format == "csv":
            return self.write_rows(stem + ".csv", rows)
        return self.write_json(stem + ".json", payload if payload is not None else rows)

    def add_input(self, path: Path):
        self.inputs[str(path)] = _sha256(path)

    def finish(self) -> int:
        for p in self.outputs:
            if p.suffix == ".json":
                json.loads(p.read_text(encoding="utf-8"))
            elif not p.exists():
                raise OSError(f"{p}: artifact missing after write")
        config = {k: v for k, v in vars(self.args).items() if k != "func"}
        manifest = {
            "tool": "leadlag",
            "version": __version__,
            "command": self.command,
            "config": config,
            "inputs": self.inputs,
            "spans": self.spans,
            "outputs": {p.name: _sha256(p) for p in self.outputs},
            "notes": self.notes,
            "elapsed_s": round(time.perf_counter() - self.t0, 3),
        }
        (self.out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return 0


def _spec(args) -> BoundarySpec:
    return BoundarySpec(args.max_offset, "grid" if args.boundary_grid else "axes")


def _load_pair(args, run: _Run):
    raws = []
    for p in (args.x, args.y):
        if not p.is_file():
            raise InputError(f"{p}: no such file")
        try:
            raws.append(read_csv(p, args.column))
        except LeadLagError as exc:
            raise InputError(str(exc)) from None
        except (OSError, UnicodeDecodeError) as exc:
            raise InputError(f"{p}: {exc}") from None
        run.add_input(p)
    try:
        a, b = trim_common(*raws)
    except LeadLagError as exc:
        raise InputError(f"{args.x}, {args.y}: {exc}") from None
    series = []
    for raw, p in ((a, args.x), (b, args.y)):
        try:
            if args.transform == "log-returns":
                s = normalize_rms(log_returns(raw))
            else:
                s = TimeSeries(raw.values, labels=raw.labels, meta={"source": raw.source})
        except LeadLagError as exc:
            raise InputError(f"{p}: {exc}") from None
        series.append(s)
        run.spans[str(p)] = {
            "n": len(s),
            "first": s.labels[0] if s.labels else None,
            "last": s.labels[-1] if s.labels else None,
            "transforms": list(s.meta["transforms"]),
            "trimmed_before_transform": True,
        }
    return series


# ----------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    run = _Run(args, "analyze")
    x, y = _load_pair(args, run)
    scale = args.transform == "none"
    energy = prepare_energy(x, y, DistanceKind.parse(args.distance), scale=scale)
    if args.dump_energy:
        p = run.out / "energy.csv"
        energy.to_csv(p)
        run.outputs.append(p)
    sel = select_best(energy, args.temperature, _spec(args), args.method)
    path = sel.best
    lags = path_to_lags(path, energy.n)
    run.write_json("path.json", {**path.to_dict(), "lags": [None if not np.isfinite(v) else int(v) for v in lags]})
    run.table("candidates", sel.table())

    if args.n_bootstrap:
        band = bootstrap_band(x, y, args.n_bootstrap, args.seed, args.temperature, args.method, _spec(args),
                              args.distance, workers=args.workers, scale=scale)
        flags = band.flag(path)
        payload = {**band.to_dict(), "path_significant": {int(t): bool(f) for t, f in zip(path.ts, flags)}}
        rows = [{"t": int(t), "q_low": float(band.q_low[t]), "q_high": float(band.q_high[t])} for t in band.ts]
        run.table("band", rows, payload)

    smap = None
    if args.signal_map is not None:
        smap = _load_map(args.signal_map, args.temperature, run)
    for w in args.windows:
        if w > energy.n:
            run.notes.append(f"window {w} skipped: longer than the series ({energy.n})")
            continue
        scan = moving_window_scan(x, y, lags, w, args.step, smap, args.alpha)
        run.table(f"windows_{w}", scan.rows(), scan.to_dict())
    return run.finish()


def _load_map(path: Path, T: float, run: _Run) -> SignalMap:
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    run.add_input(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        maps = doc["maps"] if "maps" in doc else [doc]
        best = min(maps, key=lambda m: abs(m["temperature"] - T))
        return SignalMap(
            np.asarray(best["a"], dtype=float),
            np.asarray(best["f"], dtype=float),
            np.asarray(best["rho"], dtype=float),
            float(best["temperature"]),
            int(best["ensemble"]),
            int(best.get("seed", 0)),
            best.get("method", "tops"),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: not a signal map ({exc})") from None


def cmd_synth(args) -> int:
    run = _Run(args, "synth")
    s_x, s_eta, s_model = child_seeds(args.seed, 3)
    if args.random_model:
        model = gen_random_model(seed=s_model, f=args.f, noise_seed=s_eta)
    else:
        model = paper_model(args.paper_model, a=args.a, f=args.f, seed=s_eta)
    x, y = synthetic_pair(model, b=args.b, seed=s_x)
    for name, s in (("x.csv", x), ("y.csv", y)):
        p = run.out / name
        write_csv(p, s.values)
        run.outputs.append(p)
    run.write_json("model.json", {
        "model": "random" if args.random_model else args.paper_model,
        "segments": [list(s) for s in model.segments],
        "a": model.a,
        "b": args.b,
        "f": model.f,
        "sigma_xi": 1.0,
        "seed": args.seed,
        "driver_seed": s_x,
        "noise_seed": s_eta,
        "model_seed": s_model if args.random_model else None,
    })
    run.spans["x.csv"] = run.spans["y.csv"] = {"n": model.length}
    return run.finish()


def cmd_map(args) -> int:
    run = _Run(args, "map")
    temps = args.temperatures or [args.temperature]
    maps = signal_maps(args.a_values, args.f_values, temps, args.ensemble, args.seed, args.method, _spec(args),
                       args.distance, workers=args.workers, segment_length=args.length)
    profile = temperature_profile(maps)
    rows = [r for m in maps for r in m.rows()]
    run.table("map", rows, {"maps": [m.to_dict() for m in maps]})
    run.table("profile", profile)
    return run.finish()


def cmd_band(args) -> int:
    run = _Run(args, "band")
    x, y = _load_pair(args, run)
    band = bootstrap_band(x, y, args.n_bootstrap, args.seed, args.temperature, args.method, _spec(args),
                          args.distance, workers=args.workers, scale=args.transform == "none")
    rows = [{"t": int(t), "q_low": float(band.q_low[t]), "q_high": float(band.q_high[t]), "coverage": int(band.coverage[t])}
            for t in band.ts]
    run.table("band", rows, band.to_dict())
    return run.finish()


COMMANDS = {"analyze": cmd_analyze, "synth": cmd_synth, "map": cmd_map, "band": cmd_band}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"leadlag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LeadLagError as exc:
        print(f"leadlag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"leadlag {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
