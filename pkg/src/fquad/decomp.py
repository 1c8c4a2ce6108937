"""Splittings of representable functors, endomorphism rings and idempotents.

Summands of the representable at a hyperbolic plane are embedded by explicit
injections. A certificate records the injections at every site space; it is
valid when each injection is natural over all site morphisms, the combined
map is invertible at every space, and the resulting idempotents are
orthogonal and sum to the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gf2 import BitMat, Subspace, _echelon, bits_of, inverse
from .functors.base import ComputableFunctor
from .functors.library import (DirectSumFunctor, IsoFunctor, MixFunctor, ProjectiveFunctor, iso_nondeg,
                               layer_summand, mix, projective, projective_layer)
from .functors.names import functor_by_name
from .functors.nat import NatTransform, check_naturality, hom_space, identity_transform
from .quad import QuadSpace, count_embeddings, hyperbolic, load_space, parse_space
from .tq import _subspace_index, hom_set

SCHEMA = "fquad.certificate/1"

DEFAULT_SITE_SPECS = ("0", "H0", "H1", "H0+H0", "H0+H1")


def site_spaces(max_dim: int = 4) -> list[QuadSpace]:
    """One space per isometry class of nondegenerate spaces of even dim <= max_dim."""
    specs = ["0"]
    for k in range(1, max_dim // 2 + 1):
        specs.append("+".join(["H0"] * k))
        specs.append("+".join(["H0"] * (k - 1) + ["H1"]))
    return [parse_space(s) for s in specs]


# --- morphism codes out of a hyperbolic plane ---------------------------------

_K = {"t": Subspace.zero(2), "A": Subspace.span(2, [0b01]), "B": Subspace.span(2, [0b10]),
      "C": Subspace.span(2, [0b11]), "D": Subspace.full(2)}


def _codes(eps: int, W: QuadSpace, kind: str, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    hs = hom_set(hyperbolic(eps), W)
    kidx = _subspace_index(2)[_K[kind]]
    rows = hs.find(((v | (w << W.dim)) * hs.nsub + kidx).astype(np.int64))
    if np.any(rows < 0):
        raise ArithmeticError(f"no {kind}-type morphism for some pair")
    return rows


def _columns_matrix(rows_per_col: Sequence[np.ndarray], nrows: int) -> BitMat:
    """Column j is the sum of unit vectors at ``rows_per_col[k][j]`` over k."""
    ncols = len(rows_per_col[0]) if rows_per_col else 0
    cols = [0] * ncols
    for rows in rows_per_col:
        for j, r in enumerate(rows.tolist()):
            cols[j] ^= 1 << r
    return BitMat.from_columns(cols, nrows)


def _mix_pairs(F: MixFunctor, W: QuadSpace) -> tuple[np.ndarray, np.ndarray]:
    c = F.codes(W)
    return c >> W.dim, c & ((1 << W.dim) - 1)


def _top_pairs(F: IsoFunctor, W: QuadSpace) -> tuple[np.ndarray, np.ndarray]:
    c = F.cols(W)
    return c[:, 0], c[:, 1]


# rank-one type -> pair in the representable for a mixed pair (x, y)
_LIFT = {
    "A": lambda x, y: (x ^ y, x),
    "B": lambda x, y: (x, x ^ y),
    "C": lambda x, y: (x, y),
}
_H1_TYPES = {"E": "A", "F": "B", "G": "C"}


def rank0_injection(eps: int) -> NatTransform:
    """Linear maps from GF(2)^2 to rank-0 morphisms."""
    target = projective(hyperbolic(eps))
    source = functor_by_name("iota:PF2")

    def build(W):
        keys = np.arange(1 << (2 * W.dim), dtype=np.int64)
        v, w = keys & ((1 << W.dim) - 1), keys >> W.dim
        return _columns_matrix([_codes(eps, W, "t", v, w)], target.dim(W))
    return NatTransform(source, target, builder=build, name="rank0")


def mix_injection(eps: int, kind: str) -> NatTransform:
    """Mixed pairs onto one rank-one type, lifted off the rank-0 part."""
    k = _H1_TYPES.get(kind, kind)
    alpha = 1 if (eps == 1 or k == "C") else 0
    source = mix(alpha)
    target = projective(hyperbolic(eps))

    def build(W):
        x, y = _mix_pairs(source, W)
        v, w = _LIFT[k](x, y)
        return _columns_matrix([_codes(eps, W, k, v, w), _codes(eps, W, "t", v, w)], target.dim(W))
    return NatTransform(source, target, builder=build, name=f"mix{kind}")


def top_section(eps: int, source: ComputableFunctor | None = None) -> NatTransform:
    """Section of the top quotient: D_f -> D_f + (the three rank-one types at f)."""
    h = hyperbolic(eps)
    target = projective(h)
    src = source or iso_nondeg(h)

    def build(W):
        if isinstance(src, IsoFunctor):
            v, w = _top_pairs(src, W)
        else:
            hs = hom_set(h, W)
            r = src.rows(W)
            v, w = hs.cols[r, 0], hs.cols[r, 1]
        parts = [_codes(eps, W, kd, v, w) for kd in "DABC"]
        return _columns_matrix(parts, target.dim(W))
    return NatTransform(src, target, builder=build, name="top-section")


def layer_lift(eps: int) -> NatTransform:
    """Rank-one layer into the representable: g -> g + (rank-0 part of g)."""
    h = hyperbolic(eps)
    source = projective_layer(h, 1, "layer")
    target = projective(h)

    def build(W):
        hs = hom_set(h, W)
        r = source.rows(W)
        t_rows = hs.find(hs.akey[r] * hs.nsub)
        return _columns_matrix([r, t_rows], target.dim(W))
    return NatTransform(source, target, builder=build, name="lift")


def inclusion(sub: ProjectiveFunctor, full: ProjectiveFunctor) -> NatTransform:
    def build(W):
        r = sub.rows(W)
        return _columns_matrix([full.positions(W)[r]], full.dim(W))
    return NatTransform(sub, full, builder=build, name="incl")


def quotient_map(full: ProjectiveFunctor, layer: ProjectiveFunctor) -> NatTransform:
    """Projection of the representable onto a rank layer (kills other ranks)."""
    def build(W):
        r = layer.rows(W)
        rows = [0] * layer.dim(W)
        for k, row in enumerate(r.tolist()):
            rows[k] = 1 << int(full.positions(W)[row])
        return BitMat(layer.dim(W), full.dim(W), tuple(rows))
    return NatTransform(full, layer, builder=build, name="quot")


def layer_to_mix(which: int, eps: int = 0) -> NatTransform:
    """Identification of one rank-one type with mixed pairs.

    which=1: (v, w) -> (w, v + w); which=2: (v, w) -> (v, v + w);
    which=3: (v, w) -> (v, w). Kernel types are a, b, a + b respectively.
    """
    kind = "ABC"[which - 1]
    source = layer_summand(eps, kind)
    alpha = 1 if (eps == 1 or kind == "C") else 0
    target = mix(alpha)
    h = hyperbolic(eps)

    def build(W):
        hs = hom_set(h, W)
        r = source.rows(W)
        v, w = hs.cols[r, 0], hs.cols[r, 1]
        x, y = {1: (w, v ^ w), 2: (v, v ^ w), 3: (v, w)}[which]
        codes = (x << W.dim) | y
        idx = np.searchsorted(target.codes(W), codes)
        return _columns_matrix([idx], target.dim(W))
    return NatTransform(source, target, builder=build, name=f"layer{kind}->mix")


def top_to_iso(v: QuadSpace) -> NatTransform:
    """Top rank layer -> embeddings: D_f -> f."""
    source = projective_layer(v, v.dim, "quotient_top")
    target = iso_nondeg(v)

    def build(W):
        hs = hom_set(v, W)
        r = source.rows(W)
        idx = np.searchsorted(target.codes(W), hs.akey[r])
        return _columns_matrix([idx], target.dim(W))
    return NatTransform(source, target, builder=build, name="top-to-iso")


def swap(alpha: int) -> NatTransform:
    """(v1, v2) -> (v2, v1) on mixed pairs."""
    F = mix(alpha)

    def build(W):
        x, y = _mix_pairs(F, W)
        idx = np.searchsorted(F.codes(W), (y << W.dim) | x)
        return _columns_matrix([idx], F.dim(W))
    return NatTransform(F, F, builder=build, name="swap")


def right_multiplication_e(v: QuadSpace) -> NatTransform:
    """g -> g ∘ e on the representable at v; lands on the rank-0 morphisms."""
    P = projective(v)

    def build(W):
        hs = hom_set(v, W)
        return _columns_matrix([hs.find(hs.akey * hs.nsub)], P.dim(W))
    return NatTransform(P, P, builder=build, name="e")


# --- certificates -----------------------------------------------------------

@dataclass
class DecompCertificate:
    target: str
    site: list[str]
    summands: list[tuple[str, str, NatTransform]]
    dims: list[dict] = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    verdict: bool = False
    failure: dict | None = None

    def to_json(self) -> dict:
        spaces = [load_space(s) for s in self.site]
        return {
            "schema": SCHEMA,
            "target": self.target,
            "site": self.site,
            "summands": [
                {"name": name, "functor": fname,
                 "components": {s.name: inj.component(s).to_bitstrings() for s in spaces}}
                for name, fname, inj in self.summands
            ],
            "dims": self.dims,
            "checks": self.checks,
            "verdict": self.verdict,
            "failure": self.failure,
        }


def _hstack(blocks: Sequence[BitMat], rows: int) -> BitMat:
    J = BitMat.zero(rows, 0)
    for b in blocks:
        J = J.hstack(b)
    return J


def _audit_space(blocks: Sequence[BitMat], n: int) -> tuple[bool, bool, bool]:
    """(invertible, orthogonal idempotents, idempotents sum to 1) at one space."""
    J = _hstack(blocks, n)
    if J.cols != n:
        return False, False, False
    try:
        Jinv = inverse(J)
    except ValueError:
        return False, False, False
    idems, off = [], 0
    for b in blocks:
        proj = BitMat(b.cols, n, Jinv.data[off:off + b.cols])
        idems.append(b @ proj)
        off += b.cols
    orth = True
    total = BitMat.zero(n, n)
    for i, e in enumerate(idems):
        total = total + e
        for j, f in enumerate(idems):
            prod = e @ f
            if not (prod == e if i == j else prod.is_zero()):
                orth = False
    return True, orth, total == BitMat.identity(n)


def _certify(target: ComputableFunctor, summands, site: Sequence[QuadSpace],
             target_name: str) -> DecompCertificate:
    # naturality is column by column, so the summands can be checked in one pass
    combined = NatTransform(
        DirectSumFunctor(*(inj.source for _, _, inj in summands)), target,
        builder=lambda W: _hstack([inj.component(W) for _, _, inj in summands], target.dim(W)),
        name="combined")
    report = check_naturality(combined, site)
    dims, audits, bad = [], [], []
    for W in site:
        n = target.dim(W)
        row = {"space": W.name}
        for name, _, inj in summands:
            row[name] = inj.source.dim(W)
        row["total"] = n
        dims.append(row)
        audit = _audit_space([inj.component(W) for _, _, inj in summands], n)
        audits.append(audit)
        if not all(audit):
            bad.append(W.name)
    checks = {
        "natural": report.ok,
        "invertible": all(a[0] for a in audits),
        "orthogonal_idempotents": all(a[1] for a in audits),
        "idempotents_sum_to_identity": all(a[2] for a in audits),
    }
    cert = DecompCertificate(target_name, [s.name for s in site], list(summands), dims, checks)
    if not report.ok:
        cert.failure = {"morphism": report.failure.to_json()}
    elif bad:
        cert.failure = {"spaces": bad}
    cert.verdict = all(checks.values())
    return cert


def verify_split(eps: int, site: Sequence[QuadSpace]) -> DecompCertificate:
    """Rank-0 part, rank-one layer and top layer as direct summands."""
    h = hyperbolic(eps)
    P = projective(h)
    sub0 = projective_layer(h, 0, "sub")
    top = projective_layer(h, 2, "quotient_top")
    summands = [
        ("rank0", sub0.name, inclusion(sub0, P)),
        ("layer1", f"P:{h.name}:layer1", layer_lift(eps)),
        ("top", top.name, top_section(eps, top)),
    ]
    cert = _certify(P, summands, site, P.name)
    # the lifts really are sections of the quotient maps
    layer1 = projective_layer(h, 1, "layer")
    for name, layer, inj in (("layer1", layer1, summands[1][2]), ("top", top, summands[2][2])):
        q = quotient_map(P, layer)
        cert.checks[f"section:{name}"] = q.after(inj).equals_on(identity_transform(layer), site)
    cert.verdict = all(cert.checks.values())
    return cert


def _decomposition(eps: int, site: Sequence[QuadSpace]) -> DecompCertificate:
    h = hyperbolic(eps)
    P = projective(h)
    kinds = "ABC" if eps == 0 else "EFG"
    summands = [("rank0", "iota:PF2", rank0_injection(eps))]
    for kd in kinds:
        inj = mix_injection(eps, kd)
        summands.append((f"type{kd}", inj.source.name, inj))
    summands.append(("top", f"iso:{h.name}", top_section(eps)))
    cert = _certify(P, summands, site, P.name)
    for which in (1, 2, 3):
        iso = layer_to_mix(which, eps)
        ok = check_naturality(iso, site).ok
        for W in site:
            m = iso.component(W)
            ok &= m.rows == m.cols and m.rank() == m.rows
        cert.checks[f"type{kinds[which - 1]}_to_mix_natural_iso"] = ok
    cert.verdict = all(cert.checks.values())
    return cert


def verify_ph0(site: Sequence[QuadSpace]) -> DecompCertificate:
    return _decomposition(0, site)


def verify_ph1(site: Sequence[QuadSpace]) -> DecompCertificate:
    return _decomposition(1, site)


def certificate_from_json(obj: dict) -> DecompCertificate:
    if obj.get("schema") != SCHEMA:
        raise ValueError("not a decomposition certificate")
    site = [load_space(s) for s in obj["site"]]
    by_name = {s.name: s for s in site}
    target = functor_by_name(obj["target"])
    summands = []
    for entry in obj["summands"]:
        src = functor_by_name(entry["functor"])
        comps = {}
        for sname, rows in entry["components"].items():
            S = by_name[sname]
            comps[S] = BitMat.from_bitstrings(rows, src.dim(S)) if rows else \
                BitMat.zero(0, src.dim(S))
        summands.append((entry["name"], entry["functor"], NatTransform(src, target, comps, name=entry["name"])))
    return DecompCertificate(obj["target"], obj["site"], summands, obj.get("dims", []),
                             obj.get("checks", {}), bool(obj.get("verdict")))


def reverify(cert: dict | DecompCertificate) -> DecompCertificate:
    """Recheck a (possibly deserialised) certificate from its stored components alone."""
    c = certificate_from_json(cert) if isinstance(cert, dict) else cert
    site = [load_space(s) for s in c.site]
    return _certify(functor_by_name(c.target), c.summands, site, c.target)


# --- endomorphism rings ----------------------------------------------------------

def _flatten(eta: NatTransform, site: Sequence[QuadSpace]) -> int:
    out, shift = 0, 0
    for S in site:
        m = eta.component(S)
        for r in m.data:
            out |= r << shift
            shift += m.cols
    return out


def _unflatten(x: int, F: ComputableFunctor, site, name: str) -> NatTransform:
    comps, shift = {}, 0
    for S in site:
        n = F.dim(S)
        rows = []
        for _ in range(n):
            rows.append((x >> shift) & ((1 << n) - 1))
            shift += n
        comps[S] = BitMat(n, n, tuple(rows))
    return NatTransform(F, F, comps, name=name)


@dataclass
class EndRing:
    functor: ComputableFunctor
    site: list[QuadSpace]
    basis: list[NatTransform]
    table: list[list[int]]
    vectors: list[int]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, eta: NatTransform) -> int:
        x = _flatten(eta, self.site)
        c = 0
        for k, (v, p) in enumerate(zip(self.vectors, self._pivots)):
            if (x >> p) & 1:
                x ^= v
                c |= 1 << k
        if x:
            raise ValueError("not an element of the ring")
        return c

    @property
    def _pivots(self) -> list[int]:
        return [(v & -v).bit_length() - 1 for v in self.vectors]

    def multiply(self, x: int, y: int) -> int:
        out = 0
        for i in bits_of(x):
            for j in bits_of(y):
                out ^= self.table[i][j]
        return out

    def element(self, c: int) -> NatTransform:
        v = 0
        for k in bits_of(c):
            v ^= self.vectors[k]
        return _unflatten(v, self.functor, self.site, f"c{c}")


_RINGS: dict = {}


def end_ring(F: ComputableFunctor, site: Sequence[QuadSpace]) -> EndRing:
    """Endomorphisms of ``F`` over the site, with structure constants."""
    key = (id(F), tuple(site))
    if key not in _RINGS:
        _RINGS[key] = (F, _end_ring(F, site))
    return _RINGS[key][1]


def _end_ring(F: ComputableFunctor, site: Sequence[QuadSpace]) -> EndRing:
    raw = hom_space(F, F, site)
    vecs = _echelon(_flatten(b, site) for b in raw)
    basis = [_unflatten(v, F, site, f"b{k}") for k, v in enumerate(vecs)]
    ring = EndRing(F, list(site), basis, [], vecs)
    ring.table = [[ring.coordinates(bi.after(bj)) for bj in basis] for bi in basis]
    return ring


def find_idempotents(r: EndRing, limit: int = 20) -> list[int]:
    """Coordinates of every idempotent element (exhaustive)."""
    if r.dim > limit:
        raise ValueError(f"ring of dimension {r.dim} is too large to enumerate")
    return [c for c in range(1 << r.dim) if r.multiply(c, c) == c]


def identity_coords(r: EndRing) -> int:
    return r.coordinates(identity_transform(r.functor))


# --- top quotients and the simple survey ---------------------------------------------

@dataclass
class TopQuotientReport:
    space: str
    rows: list[dict]
    natural: bool
    bijective: bool

    @property
    def ok(self) -> bool:
        return self.natural and self.bijective and all(r["top"] == r["embeddings"] for r in self.rows)


def verify_top_quotient(v: QuadSpace, site: Sequence[QuadSpace]) -> TopQuotientReport:
    eta = top_to_iso(v)
    rows = []
    bij = True
    for W in site:
        top = eta.source.dim(W)
        rows.append({"space": W.name, "top": top, "embeddings": count_embeddings(v, W)})
        m = eta.component(W)
        bij &= m.rows == m.cols and m.rank() == m.rows
    return TopQuotientReport(v.name, rows, check_naturality(eta, site).ok, bij)


SIMPLES = ["iota:Lambda1", "iota:Lambda2", "iso:x0", "iso:x1", "R:H0", "R:H1", "S:H1"]


def delta_dims(F: ComputableFunctor, eps: int, site: Sequence[QuadSpace]) -> list[int]:
    from .functors.delta import delta
    D = delta(eps, F)
    return [D.dim(V) for V in site]


def simple_survey(site: Sequence[QuadSpace], names: Sequence[str] = SIMPLES) -> list[dict]:
    h0, h1 = parse_space("H0"), parse_space("H1")
    rows = []
    for n in names:
        F = functor_by_name(n)
        d0, d1 = delta_dims(F, 0, site), delta_dims(F, 1, site)
        rows.append({
            "functor": n, "dim_H0": F.dim(h0), "dim_H1": F.dim(h1),
            "delta0": d0, "delta1": d1,
            "delta0_nonzero": any(d0), "delta1_nonzero": any(d1),
        })
    return rows
