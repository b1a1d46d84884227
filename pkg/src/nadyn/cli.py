"""Scenario files and the ``nadyn`` command.

A scenario is a JSON document naming a phase space, a family of maps and a
list of analyses. Numbers are exact: rationals are written as "p/q"
strings, angles on the circle as "p/q + r/s a" with ``a`` an irrational
unit. Reports are JSON with sorted keys, so two runs of one scenario give
identical bytes.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

from . import analysis, entropy
from .engine import DEFAULT_BUDGET, Family, find_periodic_points, identity_collapse, reduce_to_autonomous
from .errors import BudgetExceeded, NadynError, ParseError, ValidationError
from .exact import parse_qalpha, parse_rat
from .intervals import parse_interval_set
from .plmap import PLMap
from .serialize import jsonable
from .spaces import CirclePoint, RotationMap, ShiftMap, TwistMap, parse_cyl_point, parse_shift_point

VERSION = "0.1.0"
SPACES = ("interval", "circle", "shift", "cylinder")

# detector name -> spaces it accepts
APPLICABLE = {
    "check_transitivity": {"interval", "shift"},
    "check_weak_mixing": {"interval", "shift"},
    "check_topological_mixing": {"interval", "shift"},
    "check_dense_periodicity": set(SPACES),
    "check_minimality": set(SPACES),
    "check_sensitivity": {"interval", "cylinder"},
    "find_scrambled_pairs": set(SPACES),
    "find_invariant_trap": {"interval"},
    "find_periodic_points": set(SPACES),
    "omega_identity": set(SPACES),
    "lap_entropy": {"interval"},
    "cover_entropy": {"interval"},
    "mesh_ladder": {"interval"},
    "compare_family_vs_composition": {"interval"},
}

EXPLAIN = {
    "check_transitivity": "Every ordered pair of mesh cells (U, V) must have omega_n(U) meet V for some n <= N. "
    "CertifiedFalse comes with an identity omega_p or an invariant trap.",
    "check_weak_mixing": "Looks for one index r <= N that brings every given set (default: all mesh cells) "
    "within eps of the whole space at once.",
    "check_topological_mixing": "Each mesh cell must stay within eps of the whole space for every n in [K, N]; "
    "reports the K profile.",
    "check_dense_periodicity": "Each mesh cell must contain an exactly verified periodic point "
    "(omega_{nk}(x) = x for k <= multiple_cap).",
    "check_minimality": "Dense-orbit check: each sample orbit must visit every mesh cell by step N. "
    "Necessary for minimality, not sufficient.",
    "check_sensitivity": "Each mesh cell must reach diameter > delta under some omega_n; "
    "the cofinite flag asks for all n in [K, N].",
    "find_scrambled_pairs": "Tail-window limsup/liminf of orbit distances for candidate pairs, "
    "plus a period-3 certificate for g on interval families.",
    "find_invariant_trap": "Proper closed set A with interior and g(A) inside A, for the target map.",
    "find_periodic_points": "Exact periodic points with period <= period_cap.",
    "omega_identity": "Reports p when omega_p is exactly the identity.",
    "lap_entropy": "(1/k) log lap(omega_k) for k <= K with exact lap counts.",
    "cover_entropy": "Open-cover entropy with exact minimal subcovers of the joined pullback covers.",
    "mesh_ladder": "cover_entropy over the widened mesh covers m = 2, 4, 8.",
    "compare_family_vs_composition": "Lap estimates for the family and for g; checks h_F >= h_g / n - tolerance.",
}


# parsing ------------------------------------------------------------------


def _rat(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError(f"expected an exact rational string, got {value!r}", where)
    try:
        return parse_rat(value) if isinstance(value, str) else Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc), where) from None


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", where)
    return value


def parse_point(space: str, text, where: str = "point"):
    try:
        if space == "interval":
            return _rat(text, where)
        if not isinstance(text, str):
            raise ParseError(f"expected a point string, got {text!r}", where)
        if space == "circle":
            return CirclePoint(parse_qalpha(text))
        if space == "shift":
            return parse_shift_point(text)
        return parse_cyl_point(text)
    except ParseError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc), where) from None


def _parse_map(space: str, spec, where: str):
    if not isinstance(spec, dict):
        raise ParseError("a map must be an object", where)
    if space == "interval":
        pts = spec.get("points")
        if not isinstance(pts, list) or not all(isinstance(p, list) and len(p) == 2 for p in pts):
            raise ParseError("interval maps need 'points': [[x, y], ...]", where)
        nodes = [(_rat(x, f"{where}.points[{i}][0]"), _rat(y, f"{where}.points[{i}][1]")) for i, (x, y) in enumerate(pts)]
        return PLMap.from_points(nodes)
    if space == "circle":
        if "rotate" not in spec:
            raise ParseError("circle maps need 'rotate'", where)
        try:
            return RotationMap(parse_qalpha(str(spec["rotate"])))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), where) from None
    if space == "shift":
        if "shift" in spec:
            if spec["shift"] not in ("left", "right"):
                raise ParseError("'shift' must be 'left' or 'right'", where)
            return ShiftMap.of(spec["shift"])
        if "shift_steps" in spec:
            return ShiftMap(_int(spec["shift_steps"], where))
        raise ParseError("shift maps need 'shift' or 'shift_steps'", where)
    if "twist" not in spec:
        raise ParseError("cylinder maps need 'twist'", where)
    return TwistMap(_int(spec["twist"], where))


def _map_to_dict(f) -> dict:
    if isinstance(f, PLMap):
        return {"points": [[str(x), str(y)] for x, y in f.to_points()]}
    if isinstance(f, RotationMap):
        return {"rotate": str(f.delta)}
    if isinstance(f, ShiftMap):
        return {"shift_steps": f.steps}
    return {"twist": f.rate}


def _parse_family(space: str, spec, budget: int) -> Family:
    where = "family"
    if not isinstance(spec, dict):
        raise ParseError("'family' must be an object", where)
    kind = spec.get("kind", "cyclic")
    if kind == "cyclic":
        maps = spec.get("maps")
        if not isinstance(maps, list) or not maps:
            raise ParseError("a cyclic family needs a nonempty 'maps' list", where)
        return Family.cyclic([_parse_map(space, m, f"{where}.maps[{i}]") for i, m in enumerate(maps)], budget=budget)
    if kind == "rotation_sequence":
        if space != "circle":
            raise ValidationError("space", "rotation sequences live on the circle")
        try:
            theta = parse_qalpha(str(spec.get("theta", "")))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), f"{where}.theta") from None
        base = _int(spec.get("base", 3), f"{where}.base")
        if base < 2:
            raise ValidationError("base", "rotation base must be >= 2")
        return Family.rotation_sequence(theta, base)
    if kind == "constants":
        if space != "interval":
            raise ValidationError("space", "constant families live on the interval")
        rule = spec.get("rule", "calkin-wilf")
        if rule != "calkin-wilf":
            raise ValidationError("rule", f"unknown constant rule {rule!r}")
        return Family.constants(rule)
    raise ParseError(f"unknown family kind {kind!r}", f"{where}.kind")


def _family_to_dict(F: Family) -> dict:
    if F.kind == "cyclic":
        return {"kind": "cyclic", "maps": [_map_to_dict(f) for f in F.maps]}
    if F.kind == "constants":
        return {"kind": "constants", "rule": F.rule}
    return {"kind": "rotation_sequence", "theta": str(F.theta), "base": F.base}


@dataclass
class Analysis:
    detector: str
    target: str = "family"
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"detector": self.detector, "target": self.target, "params": self.params}


@dataclass(eq=False)
class Scenario:
    name: str
    space: str
    family: Family
    analyses: list
    description: str = ""
    display: Optional[tuple] = None  # (scale, shift): shown value = scale * x + shift
    output: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "description": self.description,
            "space": self.space,
            "family": _family_to_dict(self.family),
            "analyses": [a.to_dict() for a in self.analyses],
        }
        if self.display is not None:
            d["display"] = {"scale": str(self.display[0]), "shift": str(self.display[1])}
        if self.output is not None:
            d["output"] = self.output
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.to_dict() == other.to_dict()


def _canonical_params(detector: str, space: str, params: dict, where: str) -> dict:
    """Check parameter types and normalize every value to its exact text form."""
    if not isinstance(params, dict):
        raise ParseError("'params' must be an object", where)
    out = {}
    for key, value in params.items():
        at = f"{where}.{key}"
        if key in ("m", "N", "tail", "K", "period_cap", "multiple_cap", "denominator"):
            out[key] = _int(value, at)
        elif key in ("eps", "eps_prime", "delta", "tolerance"):
            out[key] = str(_rat(value, at))
        elif key == "sets":
            try:
                out[key] = [str(parse_interval_set(s)) for s in value]
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), at) from None
        elif key in ("samples", "candidates"):
            if not isinstance(value, list):
                raise ParseError(f"'{key}' must be a list", at)
            out[key] = [str(parse_point(space, v, f"{at}[{i}]")) for i, v in enumerate(value)]
        elif key == "cover":
            if not isinstance(value, list):
                raise ParseError("'cover' must be a list of [lo, hi] pairs", at)
            out[key] = [[str(_rat(lo, at)), str(_rat(hi, at))] for lo, hi in value]
        elif key == "meshes":
            out[key] = [_int(v, at) for v in value]
        else:
            raise ParseError(f"unknown parameter {key!r} for {detector}", at)
    return out


def parse_scenario(text: str, budget: int = DEFAULT_BUDGET) -> Scenario:
    """Parse and validate a scenario document.

    Raises ParseError (with a line/column or JSON path) for malformed input
    and ValidationError naming the failed invariant otherwise.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("a scenario must be a JSON object", "$")
    space = doc.get("space")
    if space not in SPACES:
        raise ValidationError("space", f"space must be one of {', '.join(SPACES)}")
    family = _parse_family(space, doc.get("family"), budget)
    if family.space != space:
        raise ValidationError("space", f"family maps act on {family.space}, scenario declares {space}")
    raw = doc.get("analyses", [])
    if not isinstance(raw, list):
        raise ParseError("'analyses' must be a list", "analyses")
    analyses = []
    for i, a in enumerate(raw):
        where = f"analyses[{i}]"
        if not isinstance(a, dict) or "detector" not in a:
            raise ParseError("an analysis needs a 'detector'", where)
        det = a["detector"]
        if det not in APPLICABLE:
            raise ValidationError("detector", f"unknown detector {det!r} in {where}")
        if space not in APPLICABLE[det]:
            raise ValidationError("applicability", f"{det} does not apply to the {space} space ({where})")
        target = a.get("target", "family")
        if target != "family":
            if not family.is_finite:
                raise ValidationError("target", f"{target!r} needs a finite family ({where})")
            if target.startswith("member:"):
                try:
                    idx = int(target.split(":", 1)[1])
                except ValueError:
                    raise ParseError(f"bad member target {target!r}", where) from None
                if not 1 <= idx <= family.period:
                    raise ValidationError("target", f"member index {idx} out of range ({where})")
            elif target != "composition":
                raise ParseError(f"unknown target {target!r}", where)
        analyses.append(Analysis(det, target, _canonical_params(det, space, a.get("params", {}), f"{where}.params")))
    display = None
    if doc.get("display") is not None:
        d = doc["display"]
        if space != "interval" or not isinstance(d, dict):
            raise ValidationError("display", "a display transform needs an interval scenario and an object")
        display = (_rat(d.get("scale", 1), "display.scale"), _rat(d.get("shift", 0), "display.shift"))
        if display[0] == 0:
            raise ValidationError("display", "display scale must be nonzero")
    return Scenario(
        name=str(doc.get("name", "")),
        space=space,
        family=family,
        analyses=analyses,
        description=str(doc.get("description", "")),
        display=display,
        output=doc.get("output"),
    )


# built-in scenarios ---------------------------------------------------------


def builtin_names() -> list[str]:
    files = resources.files("nadyn") / "scenarios"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def builtin_text(name: str) -> str:
    path = resources.files("nadyn") / "scenarios" / f"{name}.json"
    if not path.is_file():
        raise KeyError(name)
    return path.read_text()


def load_builtin(name: str, budget: int = DEFAULT_BUDGET) -> Scenario:
    return parse_scenario(builtin_text(name), budget)


# running --------------------------------------------------------------------


@dataclass(frozen=True)
class RunSettings:
    mesh: int = 16
    horizon: int = 64
    seed: int = 0
    budget: int = DEFAULT_BUDGET


def _target_family(s: Scenario, target: str) -> Family:
    F = s.family
    if target == "family":
        return F
    if target == "composition":
        return Family.autonomous(reduce_to_autonomous(F).g, budget=F.budget)
    return Family.autonomous(F.maps[int(target.split(":")[1]) - 1], budget=F.budget)


def _mesh(params: dict, settings: RunSettings) -> analysis.MeshParams:
    kw = {"m": params.get("m", settings.mesh), "N": params.get("N", settings.horizon)}
    for key in ("eps", "tail", "eps_prime"):
        if key in params:
            kw[key] = params[key] if key == "tail" else Fraction(params[key])
    return analysis.MeshParams(**kw)


def _default_samples(F: Family, rng: random.Random, count: int = 3) -> list:
    # seeded rational samples, one per call site, so reports stay reproducible
    if F.space == "interval":
        return [Fraction(rng.randrange(1, 97), 97) for _ in range(count)]
    if F.space == "circle":
        return [CirclePoint(Fraction(rng.randrange(0, 97), 97)) for _ in range(count)]
    if F.space == "shift":
        return [parse_shift_point(format(rng.randrange(0, 16), "04b") + "@0") for _ in range(count)]
    return [parse_cyl_point(f"{rng.randrange(0, 9)}/8; {rng.randrange(0, 97)}/97") for _ in range(count)]


def _display(s: Scenario, x):
    scale, shift = s.display
    return scale * x + shift


def _run_one(s: Scenario, a: Analysis, settings: RunSettings, rng: random.Random):
    F = _target_family(s, a.target)
    P = a.params
    det = a.detector
    if det in ("check_transitivity", "check_topological_mixing"):
        return getattr(analysis, det)(F, _mesh(P, settings))
    if det == "check_weak_mixing":
        sets = [parse_interval_set(x) for x in P["sets"]] if "sets" in P else None
        return analysis.check_weak_mixing(F, sets, _mesh(P, settings))
    if det == "check_dense_periodicity":
        return analysis.check_dense_periodicity(
            F, _mesh(P, settings), period_cap=P.get("period_cap"), multiple_cap=P.get("multiple_cap", 4)
        )
    if det == "check_minimality":
        samples = [parse_point(F.space, x) for x in P["samples"]] if "samples" in P else _default_samples(F, rng)
        return analysis.check_minimality(F, samples, _mesh(P, settings))
    if det == "check_sensitivity":
        return analysis.check_sensitivity(F, _mesh(P, settings), Fraction(P.get("delta", "1/2")))
    if det == "find_scrambled_pairs":
        cands = [parse_point(F.space, x) for x in P["candidates"]] if "candidates" in P else None
        report = analysis.find_scrambled_pairs(F, cands, _mesh(P, settings))
        out = report.to_json()
        if s.display is not None:
            out["period3_cycles_display"] = [[str(_display(s, x)) for x in c] for c in report.period3_cycles]
        return out
    if det == "find_invariant_trap":
        g = reduce_to_autonomous(F).g
        trap = analysis.find_invariant_trap(g, P.get("denominator", 64))
        out = {"trap": None if trap is None else str(trap)}
        if trap is not None and s.display is not None:
            out["trap_display"] = " U ".join(
                f"[{_display(s, c.lo)}, {_display(s, c.hi)}]" for c in trap
            )
        return out
    if det == "find_periodic_points":
        ws = find_periodic_points(F, P.get("period_cap", 4), P.get("multiple_cap", 4))
        return {"witnesses": [w.to_json() for w in ws]}
    if det == "omega_identity":
        return {"omega_identity_index": identity_collapse(F)}
    if det == "lap_entropy":
        return entropy.lap_entropy(F, P.get("K", 10))
    if det == "cover_entropy":
        cover = entropy.Cover(tuple((Fraction(lo), Fraction(hi)) for lo, hi in P["cover"])) if "cover" in P else entropy.mesh_cover(2)
        return entropy.cover_entropy(F, cover, P.get("K", 8))
    if det == "mesh_ladder":
        res = entropy.mesh_ladder(F, P.get("K", 8), P.get("meshes", (2, 4, 8)))
        return {
            "per_mesh": {str(m): e.to_json() for m, e in res["per_mesh"].items()},
            "best_m": res["best_m"],
            "best_limsup": res["best_limsup"],
        }
    if det == "compare_family_vs_composition":
        return entropy.compare_family_vs_composition(F, P.get("K", 10), float(Fraction(P.get("tolerance", "1/20"))))
    raise ValidationError("detector", det)


def run(s: Scenario, settings: RunSettings = RunSettings(), timings: Optional[dict] = None) -> dict:
    """Run every analysis in order and assemble the report.

    Errors inside one analysis are recorded in its block and never stop
    the others. Wall-clock times go into ``timings`` (when given) rather
    than the report, which keeps the report byte-for-byte reproducible.
    """
    rng = random.Random(settings.seed)
    blocks = []
    for a in s.analyses:
        block = {"detector": a.detector, "target": a.target, "params": a.params}
        t0 = time.perf_counter()
        try:
            block["result"] = jsonable(_run_one(s, a, settings, rng))
        except (NadynError, ValueError, TypeError, ArithmeticError) as exc:
            block["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if timings is not None:
            timings[f"{len(blocks)}:{a.detector}:{a.target}"] = time.perf_counter() - t0
        blocks.append(block)
    return {
        "artifact": {"name": "nadyn", "version": VERSION},
        "scenario": s.to_dict(),
        "family": s.family.describe(),
        "settings": {"mesh": settings.mesh, "horizon": settings.horizon, "seed": settings.seed, "budget_breakpoints": settings.budget},
        "analyses": blocks,
    }


def render(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# command line ---------------------------------------------------------------

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_RESOURCE = 5


def _load(source: str, budget: int) -> Scenario:
    if source in builtin_names():
        return load_builtin(source, budget)
    with open(source, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), budget)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nadyn", description="Exact finite-scale analysis of non-autonomous systems.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file or a built-in scenario")
    r.add_argument("scenario", help="path to a scenario JSON file, or a built-in name")
    r.add_argument("--horizon", type=int, default=64, help="iteration horizon N (default 64)")
    r.add_argument("--mesh", type=int, default=16, help="mesh resolution m (default 16)")
    r.add_argument("--seed", type=int, default=0, help="seed for default sample points (default 0)")
    r.add_argument("--budget-breakpoints", type=int, default=DEFAULT_BUDGET, help="breakpoint budget for composed maps")
    r.add_argument("--output", help="write the report here as well (overrides the scenario's 'output')")
    r.add_argument("--timings", action="store_true", help="print per-analysis wall-clock times to stderr")
    sub.add_parser("list-builtins", help="list the built-in scenarios")
    e = sub.add_parser("explain", help="describe a detector")
    e.add_argument("detector")
    return ap


def main(argv: Optional[list] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-builtins":
        for name in builtin_names():
            print(f"{name}\t{json.loads(builtin_text(name)).get('description', '')}")
        return EXIT_OK
    if args.command == "explain":
        if args.detector not in EXPLAIN:
            print(f"unknown detector {args.detector!r}; known: {', '.join(sorted(EXPLAIN))}", file=sys.stderr)
            return EXIT_USAGE
        spaces = ", ".join(sorted(APPLICABLE[args.detector]))
        print(f"{args.detector}: {EXPLAIN[args.detector]}\nspaces: {spaces}")
        return EXIT_OK
    if args.mesh < 2 or args.horizon < 1 or args.budget_breakpoints < 1:
        print("error: --mesh must be >= 2, --horizon and --budget-breakpoints >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario = _load(args.scenario, args.budget_breakpoints)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetExceeded as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    settings = RunSettings(args.mesh, args.horizon, args.seed, args.budget_breakpoints)
    timings = {} if args.timings else None
    text = render(run(scenario, settings, timings))
    out = args.output or scenario.output
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    if timings:
        for key, secs in timings.items():
            print(f"{key}\t{secs:.3f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
