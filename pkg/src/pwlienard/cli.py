"""Command-line front end: config parsing, reports, CSV and SVG emitters.

Config files are INI documents with a [right] and a [left] section, each
giving either the matrix entries a11..a22, b1, b2 of an affine subsystem
or the expressions f, g of a Lienard side.  [params] binds expression
parameters and [analysis] sets ranges and caps.  Exit codes: 0 success,
1 config or expression errors, 2 degenerate or refused systems, 3 no
cycle found.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys as _sys
from typing import Optional, Union

import numpy as np

from . import classify, poincare
from .canonical import SlidingPresent, demo_system
from .exprlang import ExprError
from .hypotheses import HypothesisReport, solve_star
from .model import (
    CycleRecord,
    DegenerateSystem,
    LienardSpec,
    PwlSpec,
    VerdictKind,
)

__all__ = ["main", "load_config", "ConfigError"]

SCHEMA_ID = "pwlienard-report/1"

_MATRIX_KEYS = ("a11", "a12", "a21", "a22", "b1", "b2")
_EXPR_KEYS = ("f", "g")


class ConfigError(ValueError):
    pass


class NoCycleFound(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Config loading


def _resolve_path(path: str) -> str:
    if os.path.exists(path):
        return path
    base = os.environ.get("PWLIENARD_CONFIG_DIR")
    if base:
        alt = os.path.join(base, path)
        if os.path.exists(alt):
            return alt
    raise ConfigError(f"config file not found: {path}")


def _section_kind(sec: configparser.SectionProxy, name: str) -> str:
    keys = set(sec.keys())
    if keys == set(_MATRIX_KEYS):
        return "matrix"
    if keys == set(_EXPR_KEYS):
        return "expr"
    raise ConfigError(
        f"section [{name}] must define exactly {_MATRIX_KEYS} or {_EXPR_KEYS}, "
        f"got {sorted(keys)}"
    )


def _floats(sec: configparser.SectionProxy, name: str) -> dict[str, float]:
    out = {}
    for key, val in sec.items():
        try:
            out[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key} = {val!r} is not a number") from exc
    return out


def load_config(path: str) -> tuple[Union[PwlSpec, LienardSpec], dict[str, float]]:
    """System and analysis settings from an INI config file."""
    path = _resolve_path(path)
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh, source=path)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for required in ("right", "left"):
        if required not in cp:
            raise ConfigError(f"missing [{required}] section")
    kinds = {name: _section_kind(cp[name], name) for name in ("right", "left")}
    if kinds["right"] != kinds["left"]:
        raise ConfigError("mixed matrix and expression sides are not supported")
    analysis = _floats(cp["analysis"], "analysis") if "analysis" in cp else {}

    if kinds["right"] == "matrix":
        r = _floats(cp["right"], "right")
        l = _floats(cp["left"], "left")
        system: Union[PwlSpec, LienardSpec] = PwlSpec(
            Aplus=np.array([[r["a11"], r["a12"]], [r["a21"], r["a22"]]]),
            bplus=np.array([r["b1"], r["b2"]]),
            Aminus=np.array([[l["a11"], l["a12"]], [l["a21"], l["a22"]]]),
            bminus=np.array([l["b1"], l["b2"]]),
        )
    else:
        params = _floats(cp["params"], "params") if "params" in cp else {}
        system = LienardSpec.from_expressions(
            fplus=cp["right"]["f"],
            fminus=cp["left"]["f"],
            gplus=cp["right"]["g"],
            gminus=cp["left"]["g"],
            params=params,
        )
    return system, analysis


# ---------------------------------------------------------------------------
# Report serialization

_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema", "verdict", "cycles"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "verdict": {
            "type": "object",
            "required": ["kind", "reason"],
            "properties": {
                "kind": {"type": "string"},
                "reason": {"type": "string"},
                "evidence": {"type": "array"},
            },
        },
        "canonical": {"type": ["object", "null"]},
        "hypotheses": {"type": ["object", "null"]},
        "cycles": {"type": "array"},
        "contradictions": {"type": "array", "items": {"type": "string"}},
    },
}


def _jsonable(value):
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(float(value))
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return repr(value)


def _hyp_json(rep: Optional[HypothesisReport]):
    if rep is None:
        return None
    return {
        "h1": {"holds": rep.h1.holds, "x_e": _jsonable(rep.h1.x_e)},
        "h2": rep.h2,
        "h3": rep.h3_holds,
        "eta_plus": _jsonable(rep.eta_plus),
        "eta_minus": _jsonable(rep.eta_minus),
        "h4": None
        if rep.h4 is None
        else {"checked": rep.h4.checked, "holds": rep.h4.holds, "margin": _jsonable(rep.h4.margin)},
        "h5": None
        if rep.h5 is None
        else {"checked": rep.h5.checked, "holds": rep.h5.holds, "margin": _jsonable(rep.h5.margin)},
        "stars": [
            {"x_minus": s.x_minus, "x_plus": s.x_plus, "p": s.p}
            for s in rep.star_solutions
        ],
        "unique_star": rep.unique_star,
        "lambda_zero": rep.lambda_zero,
        "xmax": rep.xmax,
        "pmax": rep.pmax,
        "notes": list(rep.notes),
    }


def _cycle_json(c: CycleRecord):
    return {
        "y_top": c.y_top,
        "y_bottom": c.y_bottom,
        "period": c.period,
        "lambda_gamma": c.lambda_gamma,
        "map_derivative": c.map_derivative,
        "enclosed": [
            {
                "x": rec.location[0],
                "y": rec.location[1],
                "kind": rec.kind.value,
                "linear_type": rec.linear_type,
                "stable": rec.stable,
            }
            for rec in c.enclosed
        ],
        "polyline_points": int(len(c.polyline)),
    }


def report_document(rep: classify.FullReport) -> dict:
    doc = {
        "schema": SCHEMA_ID,
        "verdict": {
            "kind": rep.verdict.kind.value,
            "reason": rep.verdict.reason,
            "evidence": _jsonable(rep.verdict.evidence),
        },
        "canonical": None
        if rep.canonical is None
        else {
            k: getattr(rep.canonical, k)
            for k in ("tR", "tL", "dR", "dL", "aR", "aL", "b")
        },
        "hypotheses": _hyp_json(rep.hypotheses),
        "cycles": [_cycle_json(c) for c in rep.cycles],
        "contradictions": list(rep.contradictions),
    }
    import jsonschema

    jsonschema.validate(doc, _REPORT_SCHEMA)
    return doc


def _print_report(rep: classify.FullReport) -> None:
    print(f"verdict: {rep.verdict.kind.value}")
    print(f"reason:  {rep.verdict.reason}")
    if rep.canonical is not None:
        c = rep.canonical
        print(
            f"canonical: tR={c.tR:g} tL={c.tL:g} dR={c.dR:g} dL={c.dL:g} "
            f"aR={c.aR:g} aL={c.aL:g} b={c.b:g}"
        )
    h = rep.hypotheses
    if h is not None:
        stars = ", ".join(
            f"(x-={s.x_minus:.6g}, x+={s.x_plus:.6g})" for s in h.star_solutions
        )
        print(
            f"hypotheses: h1={h.h1.holds} h2={h.h2} h3={h.h3_holds} "
            f"h4={None if h.h4 is None else h.h4.holds} "
            f"h5={None if h.h5 is None else h.h5.holds}"
        )
        print(f"star solutions: {stars or 'none'} (scanned p range (0, {h.pmax:g}])")
    if rep.cycles:
        for c in rep.cycles:
            print(
                f"cycle found: y in [{c.y_bottom:.6g}, {c.y_top:.6g}], "
                f"period {c.period:.6g}, lambda {c.lambda_gamma:.6g}, "
                f"P'={c.map_derivative:.6g}; encloses {c.enclosed_count} "
                f"equilibri{'um' if c.enclosed_count == 1 else 'a'}"
            )
    else:
        print("no cycle found in the scanned bracket")
    for msg in rep.contradictions:
        print(f"INTERNAL INCONSISTENCY: {msg}")


# ---------------------------------------------------------------------------
# SVG phase portrait


def render_svg(
    sys: LienardSpec, rep: classify.FullReport, path: str, xmax: float = 100.0
) -> None:
    """Two-panel portrait: the xy plane and its p-coordinate transport."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "pwlienard"

    if rep.cycles:
        poly = rep.cycles[0].polyline
        x_lo = min(float(poly[:, 1].min()) * 1.2, -1.0)
        x_hi = max(float(poly[:, 1].max()) * 1.2, 1.0)
        y_lo = min(float(poly[:, 2].min()) * 1.2, -1.0)
        y_hi = max(float(poly[:, 2].max()) * 1.2, 1.0)
    else:
        x_lo, x_hi, y_lo, y_hi = -5.0, 5.0, -5.0, 5.0

    fig, (ax, axp) = plt.subplots(1, 2, figsize=(10, 5))
    ax.axvline(0.0, color="k", lw=0.8)
    xs_r = np.linspace(0.0, x_hi, 200)
    xs_l = np.linspace(x_lo, 0.0, 200)
    ax.plot(xs_r, [sys.plus.F(x) for x in xs_r], "C2--", lw=1, label="y=F(x)")
    ax.plot(xs_l, [sys.minus.F(x) for x in xs_l], "C2--", lw=1)
    from .model import equilibrium_census

    for rec in equilibrium_census(sys, xmax=max(abs(x_lo), abs(x_hi)) + 1.0):
        ax.plot(*rec.location, "ko", ms=4)
    stars = solve_star(sys, xmax=xmax)
    for s in stars:
        ax.axvline(s.x_plus, color="C3", lw=0.8, ls=":")
        ax.axvline(s.x_minus, color="C3", lw=0.8, ls=":")
    for c in rep.cycles:
        ax.plot(c.polyline[:, 1], c.polyline[:, 2], "C0-", lw=1.5)
    ax.set_xlim(x_lo, x_hi)
    ax.set_ylim(y_lo, y_hi)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("xy plane")

    axp.axvline(0.0, color="k", lw=0.8)
    for c in rep.cycles:
        ps = [
            sys.plus.F(x) if s > 0 else sys.minus.F(x)
            for x, s in zip(c.polyline[:, 1], c.polyline[:, 3])
        ]
        axp.plot(ps, c.polyline[:, 2], "C0-", lw=1.5)
    for s in stars:
        axp.axvline(s.p, color="C3", lw=0.8, ls=":")
    axp.set_xlabel("p")
    axp.set_ylabel("y")
    axp.set_title("p-coordinate transport")

    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------------------
# Subcommands


def _analysis_args(args, analysis: dict[str, float]) -> dict[str, float]:
    merged = dict(analysis)
    if getattr(args, "xmax", None) is not None:
        merged["xmax"] = args.xmax
    if getattr(args, "bracket_cap", None) is not None:
        merged["bracket_cap"] = args.bracket_cap
    merged.setdefault("xmax", 100.0)
    merged.setdefault("bracket_cap", 1e6)
    return merged


def _run_full(args) -> tuple[classify.FullReport, LienardSpec, dict[str, float]]:
    system, analysis = load_config(args.config)
    opts = _analysis_args(args, analysis)
    rep = classify.full_report(
        system, bracket_cap=opts["bracket_cap"], xmax=opts["xmax"]
    )
    if isinstance(system, PwlSpec):
        from .canonical import as_lienard

        lsys = as_lienard(rep.canonical) if rep.canonical is not None else None
    else:
        lsys = system
    return rep, lsys, opts


def cmd_classify(args) -> int:
    rep, _, _ = _run_full(args)
    _print_report(rep)
    doc = report_document(rep)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_hypotheses(args) -> int:
    system, analysis = load_config(args.config)
    opts = _analysis_args(args, analysis)
    if isinstance(system, PwlSpec):
        from .canonical import as_lienard, canonicalize, sliding_set

        intervals = sliding_set(system)
        if intervals:
            raise SlidingPresent(None, intervals)
        system = as_lienard(canonicalize(system))
    from .hypotheses import hypothesis_report

    rep = hypothesis_report(system, xmax=opts["xmax"])
    doc = _hyp_json(rep)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_find_cycle(args) -> int:
    rep, lsys, _ = _run_full(args)
    if not rep.cycles:
        print("no cycle found", file=_sys.stderr)
        return 3
    for i, c in enumerate(rep.cycles):
        csv_path = args.csv if len(rep.cycles) == 1 else _numbered(args.csv, i)
        poincare.cycle_csv(c, csv_path)
        print(f"cycle polyline written to {csv_path}")
    if lsys is not None:
        render_svg(lsys, rep, args.svg)
        print(f"phase portrait written to {args.svg}")
    _print_report(rep)
    return 0


def _numbered(path: str, i: int) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.{i}{ext}"


_EXPECTED_ENCLOSED = {"1": 1, "0": 2, "eps": 3}


def cmd_reproduce_example(args) -> int:
    chis = ["1", "0", "eps"] if args.chi == "all" else [args.chi]
    all_ok = True
    for label in chis:
        chi = {"1": 1.0, "0": 0.0, "eps": args.eps}[label]
        rep = classify.full_report(demo_system(chi))
        checks = []
        checks.append(("exactly one cycle", len(rep.cycles) == 1))
        checks.append(
            ("verdict at-most-one-stable", rep.verdict.kind is VerdictKind.AT_MOST_ONE_STABLE)
        )
        if rep.cycles:
            c = rep.cycles[0]
            expect = _EXPECTED_ENCLOSED[label]
            checks.append(
                (f"encloses {expect} equilibria", c.enclosed_count == expect)
            )
            checks.append(("cycle stable (|P'| < 1)", abs(c.map_derivative) < 1.0))
            checks.append(
                (
                    "map derivative matches exp(lambda) to 1%",
                    abs(c.map_derivative - math.exp(c.lambda_gamma))
                    <= 0.01 * math.exp(c.lambda_gamma),
                )
            )
        for name, ok in checks:
            print(f"{'PASS' if ok else 'FAIL'} chi={label}: {name}")
            all_ok &= ok
    return 0 if all_ok else 1


def cmd_sweep(args) -> int:
    system, analysis = load_config(args.config)
    if not isinstance(system, LienardSpec) or not system.params:
        raise ConfigError("sweep needs an expression config with a [params] section")
    if args.param not in system.params:
        raise ConfigError(f"unknown sweep parameter {args.param!r}")
    values = [float(v) for v in args.values.split(",")]
    opts = _analysis_args(args, analysis)
    rows = []
    for v in values:
        params = dict(system.params)
        params[args.param] = v
        swept = LienardSpec(
            plus=type(system.plus).from_expressions(
                _expr_source(args.config, "right", "f"),
                _expr_source(args.config, "right", "g"),
                params,
            ),
            minus=type(system.minus).from_expressions(
                _expr_source(args.config, "left", "f"),
                _expr_source(args.config, "left", "g"),
                params,
            ),
            params=params,
        )
        rep = classify.full_report(
            swept, bracket_cap=opts["bracket_cap"], xmax=opts["xmax"]
        )
        n = len(rep.cycles)
        rows.append((v, rep.verdict.kind.value, n))
        print(f"{args.param}={v:g}: {rep.verdict.kind.value}, {n} cycle(s)")
    if args.out:
        import csv as _csv

        with open(args.out, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow([args.param, "verdict", "cycles"])
            w.writerows(rows)
    return 0


def _expr_source(config_path: str, section: str, key: str) -> str:
    cp = configparser.ConfigParser()
    cp.read(_resolve_path(config_path))
    return cp[section][key]


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwlienard",
        description="Crossing limit cycle analysis for planar piecewise-smooth systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="INI config file")
        p.add_argument("--xmax", type=float, default=None, help="half-plane scan range")
        p.add_argument(
            "--bracket-cap", type=float, default=None, help="largest |y0| in the cycle scan"
        )

    p = sub.add_parser("classify", help="verdict plus hypothesis report")
    add_common(p)
    p.add_argument("--json", default=None, help="write the structured report here")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("hypotheses", help="hypothesis report dump")
    add_common(p)
    p.set_defaults(func=cmd_hypotheses)

    p = sub.add_parser("find-cycle", help="locate cycles, emit CSV and SVG")
    add_common(p)
    p.add_argument("--csv", default="cycle.csv")
    p.add_argument("--svg", default="portrait.svg")
    p.set_defaults(func=cmd_find_cycle)

    p = sub.add_parser("reproduce-example", help="run the built-in demo checks")
    p.add_argument("--chi", choices=["1", "0", "eps", "all"], default="all")
    p.add_argument("--eps", type=float, default=-0.01)
    p.set_defaults(func=cmd_reproduce_example)

    p = sub.add_parser("sweep", help="re-run classification over parameter values")
    add_common(p)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default=None, help="summary CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ExprError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    except DegenerateSystem as exc:
        print(f"degenerate system: {exc}", file=_sys.stderr)
        return 2
    except SlidingPresent as exc:
        spans = ", ".join(f"({lo:g}, {hi:g})" for lo, hi in (exc.intervals or []))
        print(
            f"sliding set nonempty on y in {spans or '(unbounded)'}; analysis refused",
            file=_sys.stderr,
        )
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
