"""
Command-line front end: ``rectfree <subcommand> [options]``.

Subcommands
-----------
convolve   moments (and optionally a density) of ``mu1 (+)_lam mu2``
moments    even moments of a measure file
cumulants  rectangular cumulants from a measure file or a moment list
density    density recovered from a catalog transform or a measure file
catalog    JSON listing of the closed-form families
mc         Monte Carlo convolution experiment

Every output embeds the full run configuration; identical configurations
produce byte-identical files.  Exit codes: 0 success, 1 computation
failed or a flagged residual exceeded its threshold, 2 usage error,
3 unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from rectfree import __version__
from rectfree.analytic import DomainError, recover_measure
from rectfree.closedforms import FAMILIES, FAMILY_PARAMS, catalog_entry, catalog_listing
from rectfree.conv import convolve_analytic, convolve_moments, even_moments_of
from rectfree.measure import MeasureError, load_measure
from rectfree.rmt import mc_convolution
from rectfree.series import cumulants_from_moments

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    """Normalized run configuration (embedded in every output)."""

    subcommand: str
    lam: Optional[float] = None
    inputs: list = field(default_factory=list)
    order: Optional[int] = None
    grid: Optional[str] = None
    q1: Optional[int] = None
    q2: Optional[int] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.lam is not None and not 0 <= self.lam <= 1:
            raise argparse.ArgumentTypeError(f"--lambda must lie in [0, 1], got {self.lam}")
        if self.order is not None and self.order < 1:
            raise argparse.ArgumentTypeError("--order must be at least 1")
        if self.q1 is not None and self.q2 is not None and not 1 <= self.q1 <= self.q2:
            raise argparse.ArgumentTypeError("need 1 <= q1 <= q2")
        if self.trials is not None and self.trials < 2:
            raise argparse.ArgumentTypeError("--trials must be at least 2")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["version"] = __version__
        return {k: v for k, v in d.items() if v is not None and v != [] and v != {}}


def parse_grid(text: str) -> np.ndarray:
    """``"xmin:xmax:npts"`` -> ``linspace``."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like xmin:xmax:npts, got {text!r}") from None
    if not (hi > lo and n >= 2):
        raise argparse.ArgumentTypeError("grid needs xmax > xmin and npts >= 2")
    return np.linspace(lo, hi, n)


def _load(path: str):
    try:
        return load_measure(path)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot read measure file {path}: {exc}") from None


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _with_suffix(out: Optional[str], suffix: str) -> Optional[str]:
    if out is None:
        return None
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


def _write_density_csv(path: str, x, dens, cfg: RunConfig) -> None:
    lines = ["# config: " + json.dumps(cfg.to_dict(), sort_keys=True), "x,density"]
    lines += [f"{a:.17g},{b:.17g}" for a, b in zip(x, dens)]
    Path(path).write_text("\n".join(lines) + "\n")


def _floats(values) -> list:
    return [float(v) for v in values]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_convolve(cfg: RunConfig) -> int:
    mu1, mu2 = (_load(p) for p in cfg.inputs)
    order = cfg.order or 8
    m = convolve_moments(mu1, mu2, cfg.lam, order)
    result = {"config": cfg.to_dict(), "even_moments": _floats(m), "orders": [2 * k for k in range(1, order + 1)]}
    status = EXIT_OK
    if cfg.grid:
        try:
            rec = convolve_analytic(mu1, mu2, cfg.lam, parse_grid(cfg.grid))
        except DomainError as exc:
            result["density_error"] = f"{exc}; the series moments above remain valid"
            status = EXIT_FAILED
        else:
            csv = _with_suffix(cfg.out, ".density.csv") if cfg.out else "density.csv"
            _write_density_csv(csv, rec.x, rec.density, cfg)
            result["density_csv"] = csv
            result["density"] = rec.metadata()
            if rec.flagged:
                status = EXIT_FAILED
    _emit(_dump(result), cfg.out)
    return status


def cmd_moments(cfg: RunConfig) -> int:
    mu = _load(cfg.inputs[0])
    order = cfg.order or 8
    m = even_moments_of(mu, order)
    _emit(_dump({"config": cfg.to_dict(), "even_moments": _floats(m)}), cfg.out)
    return EXIT_OK


def cmd_cumulants(cfg: RunConfig) -> int:
    if cfg.inputs:
        mu = _load(cfg.inputs[0])
        order = cfg.order or 8
        m = even_moments_of(mu, order)
    else:
        m = cfg.extra["moments"]
        order = cfg.order or len(m)
        if len(m) < order:
            raise InputError(f"--moments lists {len(m)} values but --order is {order}")
    c = cumulants_from_moments(m[:order], cfg.lam, order)
    _emit(_dump({"config": cfg.to_dict(), "cumulants": _floats(c)}), cfg.out)
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    x = parse_grid(cfg.grid)
    if cfg.inputs:
        from rectfree.conv import transform_of

        C = transform_of(_load(cfg.inputs[0]), cfg.lam)
    else:
        entry = catalog_entry(cfg.extra["family"], cfg.lam, **cfg.extra.get("params", {}))
        C = entry.C
    rec = recover_measure(C, x)
    csv = cfg.out or "density.csv"
    _write_density_csv(csv, rec.x, rec.density, cfg)
    meta = {"config": cfg.to_dict(), **rec.metadata()}
    Path(_with_suffix(csv, ".json")).write_text(_dump(meta))
    return EXIT_FAILED if rec.flagged else EXIT_OK


def cmd_catalog(cfg: RunConfig) -> int:
    listing = catalog_listing(cfg.lam if cfg.lam is not None else 0.5)
    _emit(_dump({"config": cfg.to_dict(), **listing}), cfg.out)
    return EXIT_OK


def cmd_mc(cfg: RunConfig) -> int:
    mu1, mu2 = (_load(p) for p in cfg.inputs)
    bins = None
    if cfg.grid:
        centers = parse_grid(cfg.grid)
        h = centers[1] - centers[0]
        bins = np.concatenate([centers - h / 2, [centers[-1] + h / 2]])
    rep = mc_convolution(mu1, mu2, cfg.q1, cfg.q2, cfg.trials, cfg.seed,
                         n_moments=cfg.order or 3, bins=bins)
    rep.config = cfg.to_dict()
    _emit(rep.to_json() + "\n", cfg.out)
    if bins is not None:
        rep.write_histogram_csv(_with_suffix(cfg.out, ".hist.csv") if cfg.out else "histogram.csv")
    return EXIT_OK


COMMANDS = {
    "convolve": cmd_convolve,
    "moments": cmd_moments,
    "cumulants": cmd_cumulants,
    "density": cmd_density,
    "catalog": cmd_catalog,
    "mc": cmd_mc,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _param(text: str):
    try:
        k, v = text.split("=", 1)
        return k, float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--param expects key=value, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rectfree", description="Rectangular free convolution toolkit.")
    p.add_argument("--version", action="version", version=f"rectfree {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, lam_required=True):
        sp.add_argument("--lambda", dest="lam", type=float, required=lam_required, help="ratio in [0, 1]")
        sp.add_argument("--out", help="output path (stdout when omitted, where applicable)")

    sp = sub.add_parser("convolve", help="moments (and density) of a rectangular free convolution")
    sp.add_argument("inputs", nargs=2, metavar="MEASURE_JSON")
    common(sp)
    sp.add_argument("--order", type=int, default=8)
    sp.add_argument("--grid", help="xmin:xmax:npts for an analytic density")

    sp = sub.add_parser("moments", help="even moments of a measure file")
    sp.add_argument("inputs", nargs=1, metavar="MEASURE_JSON")
    sp.add_argument("--order", type=int, default=8)
    sp.add_argument("--out")

    sp = sub.add_parser("cumulants", help="rectangular cumulants")
    sp.add_argument("inputs", nargs="?", metavar="MEASURE_JSON")
    common(sp)
    sp.add_argument("--order", type=int)
    sp.add_argument("--moments", help="comma-separated m_2, m_4, ... instead of a file")

    sp = sub.add_parser("density", help="density recovered from a rectangular R-transform")
    sp.add_argument("inputs", nargs="?", metavar="MEASURE_JSON")
    common(sp)
    sp.add_argument("--family", choices=FAMILIES)
    sp.add_argument("--param", type=_param, action="append", default=[], help="family parameter key=value")
    sp.add_argument("--grid", required=True)

    sp = sub.add_parser("catalog", help="list closed-form families")
    common(sp, lam_required=False)

    sp = sub.add_parser("mc", help="Monte Carlo convolution experiment")
    sp.add_argument("inputs", nargs=2, metavar="MEASURE_JSON")
    sp.add_argument("--q1", type=int, required=True)
    sp.add_argument("--q2", type=int, required=True)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--order", type=int, default=3, help="number of even moments to compare")
    sp.add_argument("--grid", help="histogram bin centers xmin:xmax:npts")
    sp.add_argument("--out")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    inputs = ns.inputs if isinstance(getattr(ns, "inputs", None), list) else (
        [ns.inputs] if getattr(ns, "inputs", None) else []
    )
    cfg = RunConfig(
        subcommand=ns.subcommand,
        lam=getattr(ns, "lam", None),
        inputs=inputs,
        order=getattr(ns, "order", None),
        grid=getattr(ns, "grid", None),
        q1=getattr(ns, "q1", None),
        q2=getattr(ns, "q2", None),
        trials=getattr(ns, "trials", None),
        seed=getattr(ns, "seed", None),
        out=getattr(ns, "out", None),
    )
    if ns.subcommand == "mc":
        cfg.lam = cfg.q1 / cfg.q2 if cfg.q2 else None
    if ns.subcommand == "cumulants":
        if bool(ns.moments) == bool(inputs):
            raise argparse.ArgumentTypeError("give either a measure file or --moments")
        if ns.moments:
            try:
                cfg.extra["moments"] = [float(v) for v in ns.moments.split(",")]
            except ValueError:
                raise argparse.ArgumentTypeError("--moments must be comma-separated numbers") from None
    if ns.subcommand == "density":
        if bool(ns.family) == bool(inputs):
            raise argparse.ArgumentTypeError("give either a measure file or --family")
        if ns.family:
            cfg.extra["family"] = ns.family
            cfg.extra["params"] = dict(ns.param)
            unknown = sorted(set(cfg.extra["params"]) - set(FAMILY_PARAMS[ns.family]))
            if unknown:
                allowed = ", ".join(FAMILY_PARAMS[ns.family]) or "none"
                raise argparse.ArgumentTypeError(
                    f"{ns.family} does not take {', '.join(unknown)} (accepted: {allowed})"
                )
    if cfg.grid:
        parse_grid(cfg.grid)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except InputError as exc:
        print(f"rectfree: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, MeasureError, ValueError, KeyError) as exc:
        print(f"rectfree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
