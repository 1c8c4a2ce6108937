"""Named verifications with tabular reports.

Each check takes the site (the list of test spaces) and returns a
``CheckResult``: a verdict, a table of rows and a dict of sub-verdicts. The
registry order is the order ``verify all`` reports in.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .decomp import (SIMPLES, delta_dims, end_ring, find_idempotents, identity_coords,
                     right_multiplication_e, simple_survey, swap, verify_ph0, verify_ph1,
                     verify_split, verify_top_quotient)
from .functors.names import SHIPPED, functor_by_name
from .functors.nat import check_naturality
from .gf2 import BitMat, all_subspaces, enumerate_linear_maps
from .quad import (QuadSpace, arf, is_isometric, is_nondegenerate, isometric_embeddings,
                   orthogonal_group_order, orthogonal_sum, parse_space, restrict, witt_extend)
from .tq import (MorphismBatch, TqMorphism, classify_generator, compose, compose_batch,
                 compose_realized, generator, hom_set, idempotent_e, identity, orth_sum_morphism,
                 t_of)


@dataclass
class CheckResult:
    id: str
    ok: bool
    rows: list[dict] = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    note: str = ""
    failure: dict | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "ok": self.ok, "checks": self.checks, "rows": self.rows}
        if self.note:
            out["note"] = self.note
        if self.failure:
            out["failure"] = self.failure
        return out


def _result(cid: str, rows: list[dict], checks: dict, note: str = "") -> CheckResult:
    return CheckResult(cid, all(checks.values()), rows, checks, note)


# --- certificates ------------------------------------------------------------------

def _certificate_check(cid: str, build) -> Callable[[Sequence[QuadSpace]], CheckResult]:
    def run(site):
        cert = build(site)
        res = _result(cid, cert.dims, dict(cert.checks))
        res.failure = cert.failure
        return res
    return run


# --- composition with generators ---------------------------------------------------

def predict_composite(T: TqMorphism, kind: str, v: int, w: int) -> tuple[str, TqMorphism]:
    """``T ∘ g`` for a generator ``g`` out of a hyperbolic plane, by case analysis.

    ``T`` sends x into the target summand exactly when x lies in its kernel
    subspace, and the projection to the target is its linear part.
    """
    inside = T.K.contains
    Av, Aw = T.A.apply(v), T.A.apply(w)
    if kind == "t":
        out = "t"
    elif kind == "A":
        out = "A" if inside(v) else "t"
    elif kind == "B":
        out = "B" if inside(w) else "t"
    elif kind == "C":
        out = "C" if inside(v ^ w) else "t"
    elif kind == "D":
        if inside(v) and inside(w):
            out = "D"
        elif inside(v):
            out = "A"
        elif inside(w):
            out = "B"
        elif inside(v ^ w):
            out = "C"
        else:
            out = "t"
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return f"{kind}->{out}", generator(out, Av, Aw, T.target)


def _plane_generators(V: QuadSpace) -> list[tuple[str, int, int, TqMorphism]]:
    return [classify_generator(g) + (g,) for g in hom_set(parse_space("H0"), V)]


def _case_table_objects(W: QuadSpace, tally: dict) -> int:
    """Three-way comparison for every ``T: H0 -> W`` and generator into H0."""
    gens = _plane_generators(parse_space("H0"))
    bad = 0
    for T in hom_set(parse_space("H0"), W):
        for kind, v, w, g in gens:
            label, predicted = predict_composite(T, kind, v, w)
            tally[label] = tally.get(label, 0) + 1
            c = compose(T, g)
            if c != predicted or compose_realized(T, g) != c:
                bad += 1
    return bad


def _case_table_batch(V: QuadSpace, W: QuadSpace, tally: dict) -> int:
    """Vectorised comparison for every ``T: V -> W`` and generator into V."""
    hs = hom_set(V, W)
    bad = 0
    for kind, v, w, g in _plane_generators(V):
        gb = MorphismBatch.from_morphisms([g])
        n = len(hs)
        rep = MorphismBatch(gb.source, gb.target, np.repeat(gb.cols, n, 0),
                            np.repeat(gb.img, n, 0), np.repeat(gb.kin, n, 0))
        c = compose_batch(hs, rep)
        ka, kb, kc = hs.kin[:, v], hs.kin[:, w], hs.kin[:, v ^ w]
        # kernel of the predicted composite, as membership of a, b, a+b
        if kind == "t":
            pa = pb = pc = np.zeros(n, dtype=bool)
            labels = np.zeros(n, dtype=np.int64)
        elif kind in "ABC":
            hit = {"A": ka, "B": kb, "C": kc}[kind]
            pa, pb, pc = (hit & (kind == "A"), hit & (kind == "B"), hit & (kind == "C"))
            labels = hit.astype(np.int64)
        else:
            labels = np.select([ka & kb, ka, kb, kc], [4, 1, 2, 3], 0)
            pa, pb, pc = np.isin(labels, (1, 4)), np.isin(labels, (2, 4)), np.isin(labels, (3, 4))
        ok = ((c.cols[:, 0] == hs.img[:, v]) & (c.cols[:, 1] == hs.img[:, w])
              & (c.kin[:, 1] == pa) & (c.kin[:, 2] == pb) & (c.kin[:, 3] == pc))
        bad += int((~ok).sum())
        names = "tABCD" if kind == "D" else ("t" + kind)
        for lab, cnt in zip(*np.unique(labels, return_counts=True)):
            key = f"{kind}->{names[lab]}"
            tally[key] = tally.get(key, 0) + int(cnt)
    return bad


def _case_table_sample(V: QuadSpace, W: QuadSpace, count: int, seed: int = 0) -> int:
    """Explicit-cospan composition on a random sample, against the normal-form rule."""
    rng = random.Random(seed)
    hs = hom_set(V, W)
    gens = _plane_generators(V)
    bad = 0
    for _ in range(count):
        T = hs.morphism(rng.randrange(len(hs)))
        kind, v, w, g = gens[rng.randrange(len(gens))]
        _, predicted = predict_composite(T, kind, v, w)
        if compose_realized(T, g) != predicted:
            bad += 1
    return bad


def check_case_table(site: Sequence[QuadSpace]) -> CheckResult:
    rows, checks = [], {}
    h0 = parse_space("H0")
    for W in site:
        tally: dict = {}
        bad = _case_table_objects(W, tally)
        rows.append({"source": "H0", "target": W.name, "pairs": sum(tally.values()),
                     "mismatches": bad, "cases": dict(sorted(tally.items()))})
        checks[f"H0->{W.name}"] = bad == 0
    hh = orthogonal_sum(h0, h0)
    if any(S == hh for S in site):
        for W in (h0, hh):
            tally = {}
            bad = _case_table_batch(hh, W, tally)
            bad += _case_table_sample(hh, W, 200)
            rows.append({"source": hh.name, "target": W.name, "pairs": sum(tally.values()),
                         "mismatches": bad, "cases": dict(sorted(tally.items()))})
            checks[f"{hh.name}->{W.name}"] = bad == 0
    return _result("lemma3.9-table", rows, checks)


# --- top quotients -----------------------------------------------------------------

def _top_quotient(spec: str):
    def run(site):
        rep = verify_top_quotient(parse_space(spec), site)
        checks = {"natural": rep.natural, "bijective": rep.bijective,
                  "dims_match_embeddings": all(r["top"] == r["embeddings"] for r in rep.rows)}
        return _result(f"top-quotient-{spec}", rep.rows, checks)
    return run


# --- endomorphism rings --------------------------------------------------------------

def check_mix_indecomposable(site: Sequence[QuadSpace]) -> CheckResult:
    rows, checks, rings = [], {}, {}
    for name in ("Mix01", "Mix11", "const"):
        ring = rings[name] = end_ring(functor_by_name(name), site)
        idem = find_idempotents(ring)
        one = identity_coords(ring)
        rows.append({"functor": name, "end_dim": ring.dim, "idempotents": len(idem),
                     "table": ring.table})
        checks[f"{name}:only_trivial_idempotents"] = sorted(idem) == sorted({0, one})
    ring01 = rings["Mix01"]
    checks["Mix01:dim2"] = ring01.dim == 2
    tau = ring01.coordinates(swap(0))
    one = identity_coords(ring01)
    checks["Mix01:swap_is_square_root_of_identity"] = (
        tau not in (0, one) and ring01.multiply(tau, tau) == one)
    # the four elements 0, Id, tau, Id+tau are closed under composition
    elems = {0, one, tau, one ^ tau}
    checks["Mix01:closed"] = all(ring01.multiply(x, y) in elems for x in elems for y in elems)
    checks["const:dim1"] = rows[2]["end_dim"] == 1
    note = f"hom spaces computed over the site truncated at dimension {max(s.dim for s in site)}"
    return _result("mix-indecomposable", rows, checks, note)


# --- idempotent calculus ---------------------------------------------------------------

def check_e_idempotent(site: Sequence[QuadSpace]) -> CheckResult:
    planes = [parse_space("H0"), parse_space("H1")]
    rows, checks = [], {}
    for V in planes:
        e = idempotent_e(V)
        checks[f"e_{V.name}^2=e"] = compose(e, e) == e
    count = bad = 0
    for U in planes:
        for V in planes:
            for W in planes:
                for g in enumerate_linear_maps(U.dim, V.dim):
                    for f in enumerate_linear_maps(V.dim, W.dim):
                        count += 1
                        if compose(t_of(f, V, W), t_of(g, U, V)) != t_of(f @ g, U, W):
                            bad += 1
    rows.append({"relation": "t_f t_g = t_fg", "pairs": count, "mismatches": bad})
    checks["t_f t_g = t_fg"] = bad == 0
    # right multiplication by e is a nontrivial idempotent endomorphism of the representable
    h0 = planes[0]
    r = right_multiplication_e(h0)
    rep = check_naturality(r, site)
    idem = all(r.after(r).component(S) == r.component(S) for S in site)
    nontrivial = (not r.is_zero_on(site)) and any(
        r.component(S) != BitMat.identity(r.source.dim(S)) for S in site)
    rows.append({"relation": "g -> g e_H0 on P:H0", "pairs": rep.checked,
                 "mismatches": 0 if rep.ok else 1})
    checks["right_e:natural"] = rep.ok
    checks["right_e:idempotent"] = idem
    checks["right_e:nontrivial"] = nontrivial
    return _result("e-idempotent", rows, checks)


def check_orthsum_e(site: Sequence[QuadSpace]) -> CheckResult:
    planes = [parse_space("H0"), parse_space("H1")]
    rows, checks = [], {}
    rng = random.Random(1)
    for V in planes:
        for W in planes:
            VW = orthogonal_sum(V, W)
            lhs = idempotent_e(VW)
            rhs = orth_sum_morphism(idempotent_e(V), idempotent_e(W))
            ok_e = lhs == rhs
            ok_id = orth_sum_morphism(identity(V), identity(W)) == identity(VW)
            hv, hw = hom_set(V, V), hom_set(W, W)
            ranks_ok = all(orth_sum_morphism(s, t).rank == s.rank + t.rank for s in hv for t in hw)
            # interchange law on a sample
            inter = 0
            for _ in range(300):
                s1, s2 = hv.morphism(rng.randrange(len(hv))), hv.morphism(rng.randrange(len(hv)))
                t1, t2 = hw.morphism(rng.randrange(len(hw))), hw.morphism(rng.randrange(len(hw)))
                if compose(orth_sum_morphism(s2, t2), orth_sum_morphism(s1, t1)) != \
                        orth_sum_morphism(compose(s2, s1), compose(t2, t1)):
                    inter += 1
            key = f"{V.name}+{W.name}"
            rows.append({"spaces": key, "e_sum": ok_e, "id_sum": ok_id,
                         "rank_additive": ranks_ok, "interchange_failures": inter})
            checks[key] = ok_e and ok_id and ranks_ok and inter == 0
    return _result("orthsum-e", rows, checks)


# --- difference functors --------------------------------------------------------------

def check_delta(site: Sequence[QuadSpace]) -> CheckResult:
    rows, checks = [], {}
    dims = {}
    for name in SHIPPED:
        F = functor_by_name(name)
        d0, d1 = delta_dims(F, 0, site), delta_dims(F, 1, site)
        dims[name] = (d0, d1)
        z0, z1 = not any(d0), not any(d1)
        rows.append({"functor": name, "delta0": d0, "delta1": d1,
                     "delta0_zero": z0, "delta1_zero": z1})
        checks[f"{name}:zero0<->zero1"] = z0 == z1
    # additivity on the shipped direct sum
    a, b = dims["Mix01"], dims["iso:x1"]
    s = dims["sum(Mix01,iso:x1)"]
    checks["additive_on_sum"] = all(
        s[e][i] == a[e][i] + b[e][i] for e in (0, 1) for i in range(len(site)))
    checks["const:delta0_zero"] = not any(dims["const"][0])
    for name in SIMPLES:
        checks[f"{name}:delta0_nonzero"] = any(dims[name][0])
    return _result("delta-lemma4.4", rows, checks)


def check_simple_survey(site: Sequence[QuadSpace]) -> CheckResult:
    rows = simple_survey(site, ["const", *SIMPLES])
    checks = {"const:delta_zero": not rows[0]["delta0_nonzero"] and not rows[0]["delta1_nonzero"]}
    for r in rows[1:]:
        checks[f"{r['functor']}:delta0_nonzero"] = r["delta0_nonzero"]
        checks[f"{r['functor']}:delta1_nonzero"] = r["delta1_nonzero"]
    note = "R:H0, R:H1, S:H1 and the degenerate iso functors are reconstructions"
    return _result("simple-survey", rows, checks, note)


# --- forms --------------------------------------------------------------------------------

def check_witt(site: Sequence[QuadSpace]) -> CheckResult:
    rows, checks = [], {}
    for X in site:
        if X.dim == 0 or not is_nondegenerate(X):
            continue
        count = bad = 0
        for d in all_subspaces(X.dim):
            for emb in isometric_embeddings(restrict(X, d), X):
                f_bar = emb.map
                ext = witt_extend(X, d, emb.image(), f_bar)
                count += 1
                if any(ext(v) != f_bar.columns[i] for i, v in enumerate(d.basis)):
                    bad += 1
        rows.append({"space": X.name, "extensions": count, "failures": bad})
        checks[X.name] = bad == 0
    return _result("witt-roundtrip", rows, checks)


def check_arf(site: Sequence[QuadSpace]) -> CheckResult:
    specs = ["H0", "H1", "H0+H0", "H0+H1", "H1+H1"]
    expected_orders = {"H0": 2, "H1": 6, "H0+H0": 72, "H0+H1": 120, "H1+H1": 72}
    expected_arf = {"H0": 0, "H1": 1, "H0+H0": 0, "H0+H1": 1, "H1+H1": 0}
    rows, checks = [], {}
    for s in specs:
        S = parse_space(s)
        a, order = arf(S), orthogonal_group_order(S)
        rows.append({"space": s, "dim": S.dim, "arf": a, "orthogonal_group": order})
        checks[f"{s}:arf"] = a == expected_arf[s]
        checks[f"{s}:order"] = order == expected_orders[s]
    iso = is_isometric(parse_space("H0+H0"), parse_space("H1+H1"))
    checks["H0+H0~H1+H1"] = iso is not None and all(
        iso.target.q(iso(v)) == iso.source.q(v) for v in range(1 << iso.source.dim))
    checks["H0!~H1"] = is_isometric(parse_space("H0"), parse_space("H1")) is None
    checks["H0+H0!~H0+H1"] = is_isometric(parse_space("H0+H0"), parse_space("H0+H1")) is None
    if iso is not None:
        rows.append({"space": "H0+H0 -> H1+H1", "isometry": iso.map.to_bitstrings()})
    return _result("arf-classification", rows, checks)


# --- registry --------------------------------------------------------------------------------

CHECKS: dict[str, tuple[str, Callable[[Sequence[QuadSpace]], CheckResult]]] = {
    "ph0-split": ("rank filtration of P:H0 splits",
                  _certificate_check("ph0-split", lambda s: verify_split(0, s))),
    "ph1-split": ("rank filtration of P:H1 splits",
                  _certificate_check("ph1-split", lambda s: verify_split(1, s))),
    "ph0-decomposition": ("P:H0 = iota(PF2) + Mix01 + Mix01 + Mix11 + iso:H0",
                          _certificate_check("ph0-decomposition", verify_ph0)),
    "ph1-decomposition": ("P:H1 = iota(PF2) + 3 Mix11 + iso:H1",
                          _certificate_check("ph1-decomposition", verify_ph1)),
    "lemma3.9-table": ("composites with plane generators follow the case table", check_case_table),
    "top-quotient-H0": ("top layer of P:H0 is iso:H0", _top_quotient("H0")),
    "top-quotient-H1": ("top layer of P:H1 is iso:H1", _top_quotient("H1")),
    "mix-indecomposable": ("Mix01 and Mix11 have only trivial idempotents", check_mix_indecomposable),
    "e-idempotent": ("e_V is idempotent and t_f t_g = t_fg", check_e_idempotent),
    "orthsum-e": ("e of an orthogonal sum is the sum of the e's", check_orthsum_e),
    "delta-lemma4.4": ("Delta0 F vanishes iff Delta1 F does", check_delta),
    "simple-survey": ("dims and difference functors of the simples", check_simple_survey),
    "witt-roundtrip": ("isometries between subspaces extend", check_witt),
    "arf-classification": ("Arf invariant classifies nondegenerate spaces", check_arf),
}


def check_ids() -> list[str]:
    return list(CHECKS)


def run_check(cid: str, site: Sequence[QuadSpace]) -> CheckResult:
    if cid not in CHECKS:
        raise KeyError(cid)
    return CHECKS[cid][1](site)
