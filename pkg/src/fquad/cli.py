"""Command-line front end.

    fquad space H0+H1
    fquad hom H0 H0 --by-rank
    fquad compose 'H0>H0#27' 'H0>H0#20'
    fquad eval Mix01 H0 --format json
    fquad verify ph0-decomposition --max-dim 4
    fquad table dims

Exit status is 0 on success, 1 when a verification fails and 2 on a usage
error. Output is deterministic for fixed arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .checks import CHECKS, CheckResult, run_check
from .decomp import delta_dims, site_spaces
from .functors.names import SHIPPED, functor_by_name
from .gf2 import bitstring
from .quad import (QuadSpace, arf, describe, gram, is_nondegenerate, load_space,
                   orthogonal_group_order, radical)
from .tq import InvalidMorphism, TqMorphism, compose, hom_set, morphism_from_json

SCHEMA = "fquad.cli/1"
MAX_DIM_ENV = "FQUAD_MAX_DIM"


class UsageError(Exception):
    pass


# --- output -------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return "" if v is None else str(v)


def _columns(rows: list[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def markdown_table(rows: list[dict]) -> str:
    if not rows:
        return "(no rows)\n"
    cols = _columns(rows)
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for r in rows:
        lines.append("| " + " | ".join(_cell(r.get(c)) for c in cols) + " |")
    return "\n".join(lines) + "\n"


def csv_table(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = _columns(rows)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def emit(payload: dict, rows: list[dict], fmt: str, title: str | None = None) -> str:
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n"
    if fmt == "csv":
        return csv_table(rows)
    head = f"## {title}\n\n" if title else ""
    return head + markdown_table(rows)


# --- argument helpers ---------------------------------------------------------------------

def _space(spec: str) -> QuadSpace:
    try:
        return load_space(spec)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot parse space {spec!r}: {e}") from None


def _functor(name: str):
    try:
        return functor_by_name(name)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _morphism(ref: str) -> TqMorphism:
    """``SRC>TGT#k`` (k-th morphism in canonical order), a JSON object or ``@file``."""
    if "#" in ref and ">" in ref and not ref.lstrip().startswith("{"):
        pair, _, k = ref.partition("#")
        src, _, tgt = pair.partition(">")
        hs = hom_set(_space(src), _space(tgt))
        try:
            i = int(k)
        except ValueError:
            raise UsageError(f"bad morphism index in {ref!r}") from None
        if not 0 <= i < len(hs):
            raise UsageError(f"index {i} out of range: Hom({src},{tgt}) has {len(hs)} elements")
        return hs.morphism(i)
    text = ref
    if ref.startswith("@"):
        try:
            with open(ref[1:]) as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(str(e)) from None
    try:
        return morphism_from_json(json.loads(text))
    except (ValueError, KeyError, InvalidMorphism) as e:
        raise UsageError(f"cannot read morphism: {e}") from None


def max_dim(value: int | None) -> int:
    if value is None:
        env = os.environ.get(MAX_DIM_ENV)
        try:
            value = int(env) if env else 4
        except ValueError:
            raise UsageError(f"{MAX_DIM_ENV} must be an integer") from None
    if value < 2 or value % 2:
        raise UsageError("--max-dim must be even and at least 2")
    return value


# --- verbs ------------------------------------------------------------------------------

def _morphism_row(t: TqMorphism, index: int | None = None) -> dict:
    row = {} if index is None else {"index": index}
    row.update({"rank": t.rank, "label": t.label(),
                "A": t.A.to_bitstrings(), "K": [bitstring(v, t.source.dim) for v in t.K.basis]})
    return row


def cmd_space(args) -> tuple[str, int]:
    s = _space(args.spec)
    nondeg = is_nondegenerate(s)
    info = {"space": s.name, "dim": s.dim, "type": describe(s),
            "q_on_basis": bitstring(s.q_basis, s.dim) if s.dim else "",
            "gram": gram(s).to_bitstrings(), "radical_dim": radical(s).dim,
            "nondegenerate": nondeg, "arf": arf(s) if nondeg else None}
    if s.dim <= 6:
        info["orthogonal_group"] = orthogonal_group_order(s)
    rows = [{"field": k, "value": v} for k, v in info.items()]
    return emit(info, rows, args.format, f"space {s.name}"), 0


def cmd_hom(args) -> tuple[str, int]:
    V, W = _space(args.source), _space(args.target)
    if not (is_nondegenerate(V) and is_nondegenerate(W)):
        raise UsageError("hom sets are defined between nondegenerate spaces")
    hs = hom_set(V, W)
    counts = hs.rank_counts()
    payload = {"source": V.name, "target": W.name, "total": len(hs), "by_rank": counts}
    if args.list:
        items = [_morphism_row(hs.morphism(i), i) for i in range(len(hs))
                 if args.max_rank is None or int(hs.rank[i]) <= args.max_rank]
        payload["morphisms"] = items
        return emit(payload, items, args.format, f"Hom({V.name}, {W.name})"), 0
    rows = [{"rank": r, "count": c} for r, c in enumerate(counts)
            if args.max_rank is None or r <= args.max_rank]
    if not args.by_rank:
        rows.append({"rank": "total", "count": len(hs)})
    return emit(payload, rows, args.format, f"Hom({V.name}, {W.name})"), 0


def cmd_compose(args) -> tuple[str, int]:
    t2, t1 = _morphism(args.second), _morphism(args.first)
    try:
        c = compose(t2, t1)
    except ValueError as e:
        raise UsageError(str(e)) from None
    payload = {"composite": c.to_json(), "rank": c.rank, "label": c.label()}
    rows = [{"morphism": name, **_morphism_row(t)} for name, t in
            (("second", t2), ("first", t1), ("composite", c))]
    return emit(payload, rows, args.format, "composite"), 0


def cmd_eval(args) -> tuple[str, int]:
    F = _functor(args.functor)
    S = _space(args.space)
    if not is_nondegenerate(S):
        raise UsageError("functors are evaluated on nondegenerate spaces")
    val = F.value(S)
    payload = val.to_json()
    if args.labels:
        rows = [{"index": i, "label": lab} for i, lab in enumerate(val.labels)]
    else:
        rows = [{"functor": F.name, "space": S.name, "dim": val.dim}]
    return emit(payload, rows, args.format, f"{F.name}({S.name})"), 0


def _render_check(res: CheckResult, fmt: str) -> str:
    status = "PASS" if res.ok else "FAIL"
    if fmt == "csv":
        return f"# {res.id},{status}\n" + csv_table(res.rows)
    out = [f"## {res.id}: {status}", "", CHECKS[res.id][0], "", markdown_table(res.rows)]
    failed = [k for k, v in res.checks.items() if not v]
    if failed:
        out.append("failed: " + ", ".join(failed) + "\n")
    if res.failure:
        out.append("offending: " + json.dumps(res.failure, separators=(",", ":")) + "\n")
    if res.note:
        out.append(f"note: {res.note}\n")
    return "\n".join(out)


def cmd_verify(args) -> tuple[str, int]:
    md = max_dim(args.max_dim)
    ids = list(CHECKS) if args.check == "all" else [args.check]
    for cid in ids:
        if cid not in CHECKS:
            raise UsageError(f"unknown check {cid!r}; known: all, " + ", ".join(CHECKS))
    site = site_spaces(md)
    jobs = max(1, args.jobs)
    if jobs > 1 and len(ids) > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda c: run_check(c, site), ids))
    else:
        results = [run_check(c, site) for c in ids]
    code = 0 if all(r.ok for r in results) else 1
    if args.format == "json":
        payload = {"max_dim": md, "site": [s.name for s in site],
                   "ok": code == 0, "results": [r.to_json() for r in results]}
        return json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n", code
    text = "\n".join(_render_check(r, args.format) for r in results)
    if len(results) > 1:
        summary = "\n".join(f"{'PASS' if r.ok else 'FAIL'} {r.id}" for r in results)
        text += ("\n" if args.format == "csv" else "\n## summary\n\n") + summary + "\n"
    return text, code


TABLES = ("dims", "hom", "delta", "checks")


def cmd_table(args) -> tuple[str, int]:
    md = max_dim(args.max_dim)
    site = site_spaces(md)
    names = args.functors.split(";") if args.functors else SHIPPED
    rows: list[dict] = []
    if args.name == "dims":
        for n in names:
            F = _functor(n)
            rows.append({"functor": n, **{S.name: F.dim(S) for S in site}})
    elif args.name == "hom":
        for V in site:
            for W in site:
                hs = hom_set(V, W)
                rows.append({"source": V.name, "target": W.name, "total": len(hs),
                             "by_rank": hs.rank_counts()})
    elif args.name == "delta":
        for n in names:
            F = _functor(n)
            for eps in (0, 1):
                rows.append({"functor": n, "delta": f"H{eps}",
                             **dict(zip((S.name for S in site), delta_dims(F, eps, site)))})
    elif args.name == "checks":
        rows = [{"id": cid, "description": desc} for cid, (desc, _) in CHECKS.items()]
    else:
        raise UsageError(f"unknown table {args.name!r}; known: " + ", ".join(TABLES))
    payload = {"table": args.name, "max_dim": md, "site": [S.name for S in site], "rows": rows}
    return emit(payload, rows, args.format, f"{args.name} (site up to dim {md})"), 0


# --- parser ------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("md", "json", "csv"), default="md")
    common.add_argument("--max-dim", type=int, default=None,
                        help=f"largest site dimension (even, default 4 or ${MAX_DIM_ENV})")
    p = _Parser(prog="fquad", description="Quadratic spaces over GF(2) and functors on them.")
    p.add_argument("--version", action="version", version=f"fquad {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("space", parents=[common], help="describe a quadratic space")
    s.add_argument("spec")
    s.set_defaults(run=cmd_space)

    h = sub.add_parser("hom", parents=[common], help="enumerate a hom set")
    h.add_argument("source")
    h.add_argument("target")
    h.add_argument("--by-rank", action="store_true", help="counts per rank only")
    h.add_argument("--list", action="store_true", help="list every morphism")
    h.add_argument("--max-rank", type=int, default=None)
    h.set_defaults(run=cmd_hom)

    c = sub.add_parser("compose", parents=[common], help="compose two morphisms (second after first)")
    c.add_argument("second", help="SRC>TGT#k, a JSON morphism or @file")
    c.add_argument("first")
    c.set_defaults(run=cmd_compose)

    e = sub.add_parser("eval", parents=[common], help="evaluate a functor on a space")
    e.add_argument("functor")
    e.add_argument("space")
    e.add_argument("--labels", action="store_true", help="list the basis labels")
    e.set_defaults(run=cmd_eval)

    v = sub.add_parser("verify", parents=[common], help="run a named check, or all")
    v.add_argument("check", help="check id or 'all'")
    v.add_argument("--jobs", type=int, default=1, help="checks run in parallel threads")
    v.set_defaults(run=cmd_verify)

    t = sub.add_parser("table", parents=[common], help="dimension tables over the site")
    t.add_argument("name", help="dims, hom, delta or checks")
    t.add_argument("--functors", default=None, help="';'-separated functor names")
    t.set_defaults(run=cmd_table)
    return p


def run(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        text, code = args.run(args)
    except UsageError as e:
        print(f"fquad: error: {e}", file=sys.stderr)
        return 2
    out.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
