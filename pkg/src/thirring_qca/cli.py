"""Command-line front end.

Subcommands ``evolve``, ``amplitude``, ``compare``, ``spectrum``, ``lemmas``
and ``classes`` share one set of global flags.  Values are layered as
built-in defaults, then a ``key=value`` config file, then explicit flags.
Output is deterministic: floats are written with 17 significant digits.

Exit codes: 0 success, 1 usage error, 2 numeric or tolerance failure,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from typing import Any, Optional, Sequence

import numpy as np

from .core import GradedAmplitude, WalkParams
from .errors import ResourceCapError, ThirringError
from .sector import CHIRALITY_NAMES, SectorState

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


# -- configuration ---------------------------------------------------------------

@dataclass
class RunConfig:
    """Every global setting, in the form written to and read from config files."""

    mass: float = 0.6
    chi: float = 0.0
    steps: int = 4
    modes_in: str = "0:R,4:L"
    out_modes: str = ""
    format: str = "json"
    graded: bool = False
    max_k: int = -1
    truncation: int = 200
    p_grid: int = 64
    tolerance: float = 1e-9
    seed: int = 0

    _KEYS = {"in": "modes_in", "out-modes": "out_modes", "max-k": "max_k", "p-grid": "p_grid"}

    @classmethod
    def field_for(cls, key: str) -> str:
        key = key.strip()
        name = cls._KEYS.get(key, key.replace("-", "_"))
        if name not in {f.name for f in fields(cls)}:
            raise UsageError(f"unknown config key {key!r}")
        return name

    def update(self, name: str, raw: Any) -> None:
        kind = {f.name: f.type for f in fields(self)}[name]
        try:
            if kind == "bool":
                value = raw if isinstance(raw, bool) else str(raw).strip().lower() in ("1", "true", "yes")
            elif kind == "int":
                value = int(raw)
            elif kind == "float":
                value = float(raw)
            else:
                value = str(raw).strip()
        except ValueError as exc:
            raise UsageError(f"bad value for {name}: {raw!r}") from exc
        setattr(self, name, value)

    def to_text(self) -> str:
        inverse = {v: k for k, v in self._KEYS.items()}
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            text = _num(value) if isinstance(value, float) else str(value).lower() if isinstance(value, bool) else str(value)
            lines.append(f"{inverse.get(f.name, f.name.replace('_', '-'))}={text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {line!r}")
            key, value = line.split("=", 1)
            cfg.update(cls.field_for(key), value)
        return cfg

    def params(self) -> WalkParams:
        try:
            return WalkParams(self.mass, self.chi)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def parse_modes(text: str) -> list[tuple[int, int]]:
    """``"0:R,4:L"`` to ``[(0, 0), (4, 1)]``; chirality may also be 0 or 1."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        try:
            site, chir = item.split(":")
            a = {"R": 0, "L": 1, "0": 0, "1": 1}[chir.strip().upper()]
            out.append((int(site), a))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad mode {item!r}; expected SITE:R or SITE:L") from exc
    if not out:
        raise UsageError("no modes given")
    return out


# -- output ----------------------------------------------------------------------

def _num(v: float, allow_inf: bool = False) -> str:
    if allow_inf and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if not math.isfinite(v):
        raise NumericFailure(f"non-finite value {v!r}")
    return f"{v:.17g}"


def dumps(obj: Any) -> str:
    """JSON text with every float at 17 significant digits; keys keep insertion order."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(float(v), allow_inf=True) if isinstance(v, (float, np.floating)) else v
                    for v in row])
    return buf.getvalue()


def _modes_json(key) -> list:
    return [[x, CHIRALITY_NAMES[a]] for x, a in key]


def _modes_text(key) -> str:
    return " ".join(f"{x}:{CHIRALITY_NAMES[a]}" for x, a in key)


def _terms(g: GradedAmplitude) -> list[list[int]]:
    return [[f, j, c] for (f, j), c in sorted(g.terms.items())]


def _params_json(p: WalkParams) -> dict:
    return {"m": p.m, "n": p.n, "chi": p.chi}


# -- subcommands -------------------------------------------------------------------

def cmd_evolve(cfg: RunConfig, ring: Optional[int] = None) -> str:
    from .thirring import evolve, graded_evolve

    params = cfg.params()
    modes = parse_modes(cfg.modes_in)
    if cfg.graded:
        state = graded_evolve(SectorState.basis(modes, ring, graded=True), cfg.steps)
        keys = sorted(state.amplitudes)
        if cfg.format == "csv":
            rows = [(_modes_text(k), f, j, c) for k in keys for f, j, c in _terms(state.amplitudes[k])]
            return _csv(["modes", "f", "j", "coeff"], rows)
        doc = {"params": _params_json(params), "N": state.N, "T": cfg.steps, "graded": True,
               "amplitudes": [{"modes": _modes_json(k), "terms": _terms(state.amplitudes[k])}
                              for k in keys]}
        return dumps(doc) + "\n"
    state = evolve(SectorState.basis(modes, ring), params, cfg.steps, allow_wrap=ring is not None)
    norm = math.sqrt(state.norm_sq())
    if abs(norm - 1) > 1e-8:
        raise NumericFailure(f"norm drift {abs(norm - 1):.3e}")
    keys = sorted(state.amplitudes)
    if cfg.format == "csv":
        rows = [(_modes_text(k), complex(state.amplitudes[k]).real, complex(state.amplitudes[k]).imag)
                for k in keys]
        return _csv(["modes", "re", "im"], rows)
    doc = {"params": _params_json(params), "N": state.N, "T": cfg.steps, "norm": norm,
           "amplitudes": [{"modes": _modes_json(k), "re": complex(state.amplitudes[k]).real,
                           "im": complex(state.amplitudes[k]).imag} for k in keys]}
    return dumps(doc) + "\n"


def cmd_amplitude(cfg: RunConfig) -> str:
    from .thirring import evolve, graded_evolve

    params = cfg.params()
    modes_in = parse_modes(cfg.modes_in)
    if not cfg.out_modes:
        raise UsageError("amplitude needs --out-modes")
    modes_out = parse_modes(cfg.out_modes)
    if len(modes_out) != len(modes_in):
        raise UsageError("--in and --out-modes must list the same number of particles")
    amp = complex(evolve(SectorState.basis(modes_in), params, cfg.steps).amplitude(modes_out))
    doc: dict = {"params": _params_json(params), "T": cfg.steps,
                 "in": _modes_json(modes_in), "out": _modes_json(modes_out),
                 "re": amp.real, "im": amp.imag}
    if cfg.graded:
        g = graded_evolve(SectorState.basis(modes_in, graded=True), cfg.steps).amplitude(modes_out)
        doc["terms"] = _terms(g)
    if cfg.format == "csv":
        text = _csv(["re", "im"], [(amp.real, amp.imag)])
        if cfg.graded:
            text += _csv(["f", "j", "coeff"], doc["terms"])
        return text
    return dumps(doc) + "\n"


def _compare_pathsum(cfg: RunConfig) -> dict:
    from .free_walk import Lattice1PState, evolve_free, pathsum_propagator

    params = cfg.params()
    worst, count = 0.0, 0
    for x, a in parse_modes(cfg.modes_in):
        state = evolve_free(Lattice1PState.delta(x, a), params, cfg.steps)
        for x_out in range(x - cfg.steps, x + cfg.steps + 1):
            for b in (0, 1):
                d = abs(pathsum_propagator(x, a, x_out, b, cfg.steps, params) - state[(x_out, b)])
                worst, count = max(worst, d), count + 1
    return {"scheme": "pathsum", "cases": count, "max_abs_diff": worst}


def _output_pairs(modes_in, T):
    (x_in, _), (y_in, _) = modes_in
    outs_x = [(x, s) for x in range(x_in - T, x_in + T + 1) for s in (0, 1)]
    outs_y = [(y, s) for y in range(y_in - T, y_in + T + 1) for s in (0, 1)]
    seen = set()
    for o1 in outs_x:
        for o2 in outs_y:
            key = tuple(sorted((o1, o2)))
            if o1 != o2 and key not in seen:
                seen.add(key)
                yield key


def _compare_pert_int(cfg: RunConfig) -> dict:
    from .interaction_pert import order_k_amplitude_pathsum
    from .thirring import evolve

    params = cfg.params()
    modes_in = parse_modes(cfg.modes_in)
    if len(modes_in) != 2:
        raise UsageError("pert-int compares two-particle amplitudes")
    T = cfg.steps
    max_k = T if cfg.max_k < 0 else min(cfg.max_k, T)
    state = evolve(SectorState.basis(modes_in), params, T)
    worst, count = 0.0, 0
    for out in _output_pairs(modes_in, T):
        total = sum(order_k_amplitude_pathsum(modes_in, out, T, k, params) for k in range(max_k + 1))
        worst, count = max(worst, abs(total - complex(state.amplitude(out)))), count + 1
    return {"scheme": "pert-int", "max_k": max_k, "cases": count, "max_abs_diff": worst}


def _compare_pert_mass(cfg: RunConfig, regime: str) -> dict:
    from .mass_pert import compare_with_oracle

    modes_in = sorted(parse_modes(cfg.modes_in))
    if len(modes_in) != 2:
        raise UsageError("pert-mass compares two-particle amplitudes")
    rows = compare_with_oracle(modes_in, cfg.steps, regime)
    counts = {s: sum(r["status"] == s for r in rows) for s in ("match", "mismatch", "unsupported")}
    return {"scheme": "pert-mass", "regime": regime, **counts,
            "max_abs_diff": 0.0 if counts["mismatch"] == 0 else 1.0,
            "mismatches": [r for r in rows if r["status"] == "mismatch"][:20]}


def _compare_hybrid(cfg: RunConfig) -> dict:
    from .hybrid import hybrid_position_mismatch

    params = cfg.params()
    rng = np.random.default_rng(cfg.seed)
    L = 24
    worst = 0.0
    indices = [int(i) for i in rng.integers(0, L, size=5)]
    for i in indices:
        worst = max(worst, hybrid_position_mismatch(i, params, ring_size=L, seed=cfg.seed))
    return {"scheme": "hybrid", "p_indices": indices, "ring_size": L, "max_abs_diff": worst}


def cmd_compare(cfg: RunConfig, scheme: str, regime: str = "low-mass") -> tuple[str, bool]:
    if scheme == "pathsum":
        report = _compare_pathsum(cfg)
    elif scheme == "pert-int":
        report = _compare_pert_int(cfg)
    elif scheme == "pert-mass":
        report = _compare_pert_mass(cfg, regime)
    elif scheme == "hybrid":
        report = _compare_hybrid(cfg)
    else:
        raise UsageError(f"unknown scheme {scheme!r}")
    report["tolerance"] = cfg.tolerance
    ok = report["max_abs_diff"] <= cfg.tolerance
    report["passed"] = ok
    if cfg.format == "csv":
        keys = [k for k in report if not isinstance(report[k], (list, dict))]
        return _csv(keys, [[report[k] for k in keys]]), ok
    return dumps(report) + "\n", ok


def cmd_spectrum(cfg: RunConfig, check_doubling: bool = False) -> str:
    from .hybrid import bound_state_scan, default_p_grid

    states = bound_state_scan(default_p_grid(cfg.p_grid), cfg.params(), Y=cfg.truncation,
                              check_doubling=check_doubling)
    if cfg.format == "csv":
        header = ["p", "omega", "loc_length", "residual"]
        rows = [s.as_row() for s in states]
        if check_doubling:
            header.append("stability")
            rows = [s.as_row() + (s.stability,) for s in states]
        return _csv(header, rows)
    doc = [{"p": s.p, "omega": s.omega,
            "loc_length": s.loc_length if math.isfinite(s.loc_length) else None,
            "residual": s.residual, "boundary": s.boundary, "stability": s.stability}
           for s in states]
    return dumps({"params": _params_json(cfg.params()), "Y": cfg.truncation, "states": doc}) + "\n"


def cmd_lemmas(cfg: RunConfig, t_max: Optional[int]) -> tuple[str, bool]:
    from .path_lab import find_pauli_violations, run_all

    reports = [r.as_dict() for r in run_all(t_max)]
    pauli2 = find_pauli_violations(2, min(t_max or 8, 8))
    reports.append({"lemma_id": "pauli-two-particle-empty", "passed": not pauli2,
                    "universe_size": None, "universe": "connected two-particle configurations",
                    "parameters": {"T": min(t_max or 8, 8)},
                    "violations": [v.as_dict() for v in pauli2]})
    ok = all(r["passed"] for r in reports)
    if cfg.format == "csv":
        rows = [(r["lemma_id"], r["universe_size"], len(r["violations"]), r["passed"]) for r in reports]
        return _csv(["lemma_id", "universe_size", "violations", "passed"], rows), ok
    return dumps({"passed": ok, "reports": reports}) + "\n", ok


def cmd_classes(cfg: RunConfig, order: Optional[int], regime: Optional[str]) -> str:
    from .mass_pert import Boundaries, admissible_f, class_report

    modes_in = sorted(parse_modes(cfg.modes_in))
    if not cfg.out_modes:
        raise UsageError("classes needs --out-modes for the final sites")
    outs = parse_modes(cfg.out_modes)
    if len(modes_in) != 2 or len(outs) != 2:
        raise UsageError("classes takes two initial and two final modes")
    (x_in, _), (y_in, _) = modes_in
    b = Boundaries(x_in, y_in, outs[0][0], outs[1][0], cfg.steps)
    orders = [order] if order is not None else sorted(
        {f1 + f2 for f1 in admissible_f(x_in, b.x_out, b.T) for f2 in admissible_f(y_in, b.y_out, b.T)})
    reports = [class_report(b, n, regime) for n in orders]
    if cfg.format == "csv":
        rows = []
        for rep in reports:
            for c in rep["classes"]:
                for t in c.get("terms", []):
                    rows.append((rep["order_f"], c["f1"], c["f2"], t["labels"][0], t["labels"][1],
                                 t["j"], t["integer_coeff"]))
        return _csv(["f", "f1", "f2", "label1", "label2", "j", "coeff"], rows)
    return dumps(reports) + "\n"


# -- parser ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("global")
    g.add_argument("--mass", type=float)
    g.add_argument("--chi", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--in", dest="modes_in", metavar="MODES", help='initial modes, e.g. "0:R,4:L"')
    g.add_argument("--out-modes", dest="out_modes", metavar="MODES")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--graded", action="store_true")
    g.add_argument("--max-k", dest="max_k", type=int)
    g.add_argument("--truncation", type=int, help="relative-coordinate radius Y")
    g.add_argument("--p-grid", dest="p_grid", type=int, help="number of momenta in [-pi, pi)")
    g.add_argument("--tolerance", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--config", metavar="FILE", help="key=value lines; flags override")

    parser = _Parser(prog="thirring-qca", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    ev = sub.add_parser("evolve", parents=[common], help="evolve basis state")
    ev.add_argument("--ring", type=int, help="periodic ring size (default: infinite lattice)")
    sub.add_parser("amplitude", parents=[common], help="single transition amplitude")
    cmp_ = sub.add_parser("compare", parents=[common], help="scheme vs exact evolution")
    cmp_.add_argument("--scheme", choices=("pathsum", "pert-int", "pert-mass", "hybrid"),
                      default="pathsum")
    cmp_.add_argument("--regime", choices=("low-mass", "high-mass"), default="low-mass")
    sp_ = sub.add_parser("spectrum", parents=[common], help="bound-state scan")
    sp_.add_argument("--doubling", action="store_true", help="record the eigenphase shift at 2Y")
    lem = sub.add_parser("lemmas", parents=[common], help="exhaustive lemma suite")
    lem.add_argument("--t-max", dest="t_max", type=int)
    cl = sub.add_parser("classes", parents=[common], help="mass-expansion class report")
    cl.add_argument("--order", type=int)
    cl.add_argument("--regime", choices=("low-mass", "high-mass"))
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    else:
        cfg = RunConfig()
    for f in fields(RunConfig):
        value = getattr(ns, f.name, None)
        if value is not None:
            cfg.update(f.name, value)
    if cfg.format not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    return cfg


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """Entry point returning the exit code; output goes to ``out`` (stdout by default)."""
    out = sys.stdout if out is None else out
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns)
        ok = True
        if ns.command == "evolve":
            text = cmd_evolve(cfg, ns.ring)
        elif ns.command == "amplitude":
            text = cmd_amplitude(cfg)
        elif ns.command == "compare":
            text, ok = cmd_compare(cfg, ns.scheme, ns.regime)
        elif ns.command == "spectrum":
            text = cmd_spectrum(cfg, ns.doubling)
        elif ns.command == "lemmas":
            text, ok = cmd_lemmas(cfg, ns.t_max)
        else:
            text = cmd_classes(cfg, ns.order, ns.regime)
        out.write(text)
        return EXIT_OK if ok else EXIT_NUMERIC
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ThirringError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
