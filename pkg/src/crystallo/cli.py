"""Command-line entry point: ``crystallo <subcommand> ...``.

Exit codes: 0 result computed (including FAILS / REFUTED), 1 usage error,
2 input rejected, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .algebra import FiniteAlgebra, enumerate_models
from .congruences import (
    all_congruences,
    check_chyper_span,
    check_lattice_laws,
    check_shifting_lemma,
    product_span,
)
from .constructions import (
    SAMPLE_SETS,
    apply_functor,
    builtin_algebra,
    builtin_variety,
    pad_chyper,
    sample_set,
    _group_by_name,
)
from .errors import BudgetExhausted, CrystalloError, MultipleCooperators, ValidationError
from .graphs import (
    classify_structure,
    congruence_graph,
    discrete_graph,
    enumerate_category_structures,
    indiscrete_graph,
    relation_graph,
)
from .internal import (
    STRUCTURE_NAMES,
    brute_force_internal,
    builtin_structure,
    cooperator,
    crystallography_report,
)
from .search import DEFAULT_BUDGET
from .specs import VarietyPresentation, check_identities, format_algebra, format_variety, parse_document

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------- resolution


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def resolve_variety(ref: str) -> VarietyPresentation:
    """``builtin:Name``, a bare catalog name, or a file holding one variety block."""
    if ref.startswith("builtin:"):
        return builtin_variety(ref[len("builtin:"):])
    if Path(ref).is_file():
        varieties, _ = parse_document(_read(ref))
        if len(varieties) != 1:
            raise ValidationError(f"{ref}: expected exactly one variety block, found {len(varieties)}")
        return varieties[0]
    return builtin_variety(ref)


def _algebras_from_file(path: str, variety: VarietyPresentation | None = None) -> list[FiniteAlgebra]:
    varieties, raws = parse_document(_read(path))
    local = {v.name.lower(): v for v in varieties}
    out = []
    for raw in raws:
        key = raw.variety_tok.text.lower()
        v = local.get(key)
        if v is None and variety is not None and variety.name.lower() == key:
            v = variety
        if v is None:
            v = builtin_variety(raw.variety_tok.text)
        out.append(raw.build(v))
    if not out:
        raise ValidationError(f"{path}: no algebra block")
    return out


def resolve_algebra(ref: str, variety: VarietyPresentation | None = None) -> FiniteAlgebra:
    if ref.startswith("builtin:"):
        return builtin_algebra(ref[len("builtin:"):])
    algs = _algebras_from_file(ref, variety)
    if len(algs) != 1:
        raise ValidationError(f"{ref}: expected one algebra, found {len(algs)}")
    return algs[0]


def resolve_samples(ref: str, variety: VarietyPresentation | None = None) -> list[FiniteAlgebra]:
    """Comma-separated list of sample-set names, built-in algebras and files."""
    out = []
    for part in ref.split(","):
        part = part.strip()
        if part.startswith("builtin:"):
            name = part[len("builtin:"):]
            out.extend(sample_set(name) if name in SAMPLE_SETS else [builtin_algebra(name)])
        else:
            out.extend(_algebras_from_file(part, variety))
    return out


def _elements(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            a, b = item.split("-")
            out.append((int(a), int(b)))
        except ValueError:
            raise ValidationError(f"expected pairs like 0-1,1-2; got {item!r}") from None
    return out


# ------------------------------------------------------------- subcommands


def cmd_validate(args):
    varieties, raws = parse_document(_read(args.file))
    local = {v.name.lower(): v for v in varieties}
    algs = []
    for raw in raws:
        v = local.get(raw.variety_tok.text.lower()) or builtin_variety(raw.variety_tok.text)
        a = raw.build(v)
        rep = check_identities(a, v.equations, limit=1)
        algs.append({"name": a.name, "variety": v.name, "size": a.size, "satisfies": rep.satisfied})
    out = {
        "varieties": [
            {
                "name": v.name,
                "ops": [[n, k] for n, k in v.signature.ops],
                "consts": list(v.signature.consts),
                "equations": [str(eq) for eq in v.equations],
            }
            for v in varieties
        ],
        "algebras": algs,
    }
    return out, EXIT_OK


def cmd_check(args):
    v = resolve_variety(args.variety) if args.variety else None
    a = resolve_algebra(args.algebra, v)
    if v is None:
        raise UsageError("check: --variety is required")
    rep = check_identities(a, v.equations, limit=args.limit)
    return {
        "algebra": a.name,
        "variety": v.name,
        "verdict": "SATISFIED" if rep.satisfied else "VIOLATED",
        "violations": [x.to_json() for x in rep.violations],
    }, EXIT_OK


def cmd_congruences(args):
    a = resolve_algebra(args.algebra)
    cs = all_congruences(a)
    return {"algebra": a.name, "size": a.size, "count": len(cs), "congruences": [c.to_json() for c in cs]}, EXIT_OK


def cmd_laws(args):
    a = resolve_algebra(args.algebra)
    lattice = all_congruences(a)
    return {"algebra": a.name, **check_lattice_laws(a, args.law, lattice).to_json()}, EXIT_OK


def cmd_shifting(args):
    a = resolve_algebra(args.algebra)
    return {"algebra": a.name, **check_shifting_lemma(a).to_json()}, EXIT_OK


def cmd_chyper_span(args):
    x = resolve_algebra(args.left)
    y = resolve_algebra(args.right) if args.right else x
    span = product_span(x, y)
    return {"W": span.W.name, **check_chyper_span(span).to_json()}, EXIT_OK


def cmd_internal(args):
    a = resolve_algebra(args.algebra)
    s = builtin_structure(args.structure)
    if args.brute_force:
        found, truncated = brute_force_internal(a, s), False
    else:
        from .internal import enumerate_internal

        res = enumerate_internal(a, s, args.budget)
        found, truncated = res.structures, res.truncated
    out = {
        "algebra": a.name,
        "spec": s.name,
        "count": len(found),
        "structures": [st.to_json() for st in found],
        "truncated": truncated,
    }
    return out, EXIT_BUDGET if truncated else EXIT_OK


def cmd_cooperator(args):
    a = resolve_algebra(args.algebra)
    u = _elements(args.u) if args.u else list(a.elements)
    v = _elements(args.v) if args.v else list(a.elements)
    out = {"algebra": a.name, "u": sorted(set(u)), "v": sorted(set(v))}
    try:
        phi = cooperator(a, u, v, args.budget)
    except MultipleCooperators as exc:
        out.update(status="MULTIPLE", maps=[list(m.map) for m in exc.maps])
        return out, EXIT_OK
    out.update(status="FOUND" if phi else "NONE", map=list(phi.map) if phi else None)
    return out, EXIT_OK


def cmd_report(args):
    v = resolve_variety(args.variety)
    samples = resolve_samples(args.samples, v) if args.samples else []
    for a in samples:
        if a.signature != v.signature:
            raise ValidationError(f"sample {a.name} is not in the signature of {v.name}")
    if args.sweep:
        for n in range(1, args.sweep + 1):
            stream = enumerate_models(v, n, args.budget)
            for i, a in enumerate(stream):
                samples.append(a.renamed(f"{v.name}[{n}]#{i}"))
            if stream.truncated:
                raise BudgetExhausted(f"model sweep of size {n} exceeded the budget")
    if not samples:
        raise UsageError("report: no samples (give --samples or --sweep)")
    rep = crystallography_report(samples, args.structure, args.budget, jobs=args.jobs)
    return rep.to_json(), EXIT_BUDGET if rep.verdict == "INCONCLUSIVE" else EXIT_OK


def cmd_graphs(args):
    x = resolve_algebra(args.algebra)
    if args.relation:
        graphs = [relation_graph(x, _pairs(args.relation))]
    else:
        kinds = args.kind
        graphs = []
        if kinds in ("all", "discrete"):
            graphs.append(discrete_graph(x))
        if kinds in ("all", "indiscrete"):
            graphs.append(indiscrete_graph(x))
        if kinds in ("all", "congruences"):
            graphs += [congruence_graph(x, c) for c in all_congruences(x)[1:-1]]
    out, code = [], EXIT_OK
    for g in graphs:
        res = enumerate_category_structures(g, args.budget)
        if res.truncated:
            code = EXIT_BUDGET
        out.append(
            {
                "graph": g.to_json(),
                "count": len(res),
                "structures": [{**c.to_json(), **classify_structure(c).to_json()} for c in res],
                "truncated": res.truncated,
            }
        )
    return {"algebra": x.name, "graphs": out}, code


def cmd_construct(args):
    if args.functor in ("h", "m"):
        if not args.group:
            raise UsageError("construct: --group is required for h and m")
        g = _group_by_name(args.group)
        if args.functor == "m":
            from .constructions import group_maltsev

            a = apply_functor("m", group_maltsev(g))
        else:
            a = apply_functor("h", g)
    else:
        if args.p is None:
            raise UsageError("construct: --p is required for w and a")
        a = apply_functor(args.functor, args.p, args.d)
    target = "Hex3" if args.functor in ("h", "w") else "CM3"
    return {
        "name": a.name,
        "variety": target,
        "size": a.size,
        "tables": {op: list(t) for op, t in a.tables.items()},
        "consts": dict(a.consts),
        "source": format_algebra(a.renamed(re.sub(r"\W", "_", a.name).strip("_")), target),
    }, EXIT_OK


def cmd_pad_chyper(args):
    v = resolve_variety(args.variety)
    models = resolve_samples(args.models, v) if args.models else []
    steps = []
    for _ in range(args.times):
        res = pad_chyper(v, models)
        steps.append(res.to_json())
        v = res.presentation
        models = []
    return {"steps": steps, "presentation": format_variety(v), "verified": all(s["verified"] for s in steps)}, EXIT_OK


def cmd_models(args):
    v = resolve_variety(args.variety)
    pins = {}
    for item in args.pin or ():
        name, _, value = item.partition("=")
        if not value:
            raise UsageError(f"--pin expects NAME=VALUE, got {item!r}")
        pins[name] = int(value)
    stream = enumerate_models(v, args.size, args.budget, pins=pins, canonical=args.canonical)
    models = []
    for a in stream:
        models.append({"tables": {op: list(t) for op, t in a.tables.items()}, "consts": dict(a.consts)})
        if args.limit and len(models) >= args.limit:
            break
    out = {"variety": v.name, "size": args.size, "count": len(models), "models": models, "truncated": stream.truncated}
    return out, EXIT_BUDGET if stream.truncated else EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget (default 10^7)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes; output does not depend on it")

    p = _Parser(prog="crystallo", description="Finite universal-algebra workbench.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("validate", cmd_validate, "parse a source file and check each algebra against its variety")
    sp.add_argument("file")

    sp = add("check", cmd_check, "check the equations of a variety on an algebra")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--variety")
    sp.add_argument("--limit", type=int, default=10)

    sp = add("congruences", cmd_congruences, "list the congruence lattice")
    sp.add_argument("--algebra", required=True)

    sp = add("laws", cmd_laws, "modular / distributive / weakly-distributive law on the congruence lattice")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--law", required=True, choices=("modular", "distributive", "weakly-distributive"))

    sp = add("shifting", cmd_shifting, "Shifting Lemma on the congruence lattice")
    sp.add_argument("--algebra", required=True)

    sp = add("chyper-span", cmd_chyper_span, "span condition on the product span X <- X x Y -> Y")
    sp.add_argument("--left", required=True)
    sp.add_argument("--right")

    sp = add("internal", cmd_internal, "enumerate internal structures")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--structure", required=True, choices=STRUCTURE_NAMES)
    sp.add_argument("--brute-force", action="store_true")

    sp = add("cooperator", cmd_cooperator, "cooperator of two subalgebras (default: the whole algebra twice)")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--u")
    sp.add_argument("--v")

    sp = add("report", cmd_report, "crystallography verdict over a sample set")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--structure", required=True, choices=STRUCTURE_NAMES)
    sp.add_argument("--samples")
    sp.add_argument("--sweep", type=int, default=2, help="also use every model of size 1..N (default 2, 0 disables)")

    sp = add("graphs", cmd_graphs, "internal category structures on reflexive graphs")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--kind", choices=("all", "discrete", "indiscrete", "congruences"), default="all")
    sp.add_argument("--relation", help="reflexive relation as pairs 0-1,1-2 (diagonal added)")

    sp = add("construct", cmd_construct, "apply the h, w, m or a construction")
    sp.add_argument("--functor", required=True, choices=("h", "w", "m", "a"))
    sp.add_argument("--group")
    sp.add_argument("--p", type=int)
    sp.add_argument("--d", type=int, default=1)

    sp = add("pad-chyper", cmd_pad_chyper, "pad a type 2k+1 presentation to type 2k+3 and justify it")
    sp.add_argument("--variety", default="Hex3")
    sp.add_argument("--times", type=int, default=1)
    sp.add_argument("--models")

    sp = add("models", cmd_models, "enumerate all models of a given size")
    sp.add_argument("--variety", required=True)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--pin", action="append", help="NAME=VALUE, fixes a constant")
    sp.add_argument("--canonical", action="store_true")
    sp.add_argument("--limit", type=int, default=0)
    return p


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, str)) for x in v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}:")
                lines.extend(pad + "  " + line for line in v.rstrip().splitlines())
            else:
                lines.append(f"{pad}{k}: {json.dumps(v) if not isinstance(v, str) else v}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(_text(x, indent) if isinstance(x, (dict, list)) else f"{pad}- {x}" for x in obj)
    return f"{pad}{obj}"


def load_schema() -> dict:
    from importlib.resources import files

    return json.loads(files("crystallo").joinpath("data/report.schema.json").read_text(encoding="utf-8"))


def render(out: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(out, indent=2, sort_keys=True)
    return _text(out)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "fn", None):
            raise UsageError("crystallo: a subcommand is required (see --help)")
        if args.budget <= 0 or args.jobs <= 0:
            raise UsageError("--budget and --jobs must be positive")
        out, code = args.fn(args)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=stderr)
        return EXIT_BUDGET
    except CrystalloError as exc:
        print(f"input rejected: {exc}", file=stderr)
        return EXIT_INPUT
    out = {"command": args.command, **out}
    print(render(out, args.format), file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
