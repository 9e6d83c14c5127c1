"""Audit driver: run every spectral-triple check over a configured surface and battery."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from .algebra import SurfaceElement, _dense, _is_exact, truncate
from .algebra import TruncatedOperator
from .dirac import (build_dirac, commutator_D, fredholm_index, iterated_delta, represent, spectrum,
                    summability_scan)
from .fourier import U, UBAR, decay_report, trig
from .geometry import (HochschildChain, PairingInput, ParityObstruction, finiteness_isometry_check,
                       k0_battery, orientation_obstruction, pairing_report)
from .real_structure import (build_J, commutant_dimension, conjugate_by_J, first_order_defect,
                             j_gamma_relation, support_bound)
from .scalars import ExactMatrix, GaussianRational
from .surfaces import SurfacePreset, is_member, loop_generator

__all__ = [
    "ConfigError",
    "AuditConfig",
    "AxiomRecord",
    "AxiomReport",
    "ANCHORS",
    "DEFAULT_TOLERANCES",
    "resolve_element",
    "resolve_with_report",
    "parse_chain",
    "run_audit",
    "canonical_hash",
]

ANCHORS = {
    "spectrum": "spectral triple theorem: spectrum of D is Z with simple eigenvalues",
    "commutator": "spectral triple theorem: [S*N, T_f] = -i T_(ubar f') and [NS, T_f] = -i T_(u f')",
    "regularity": "spectral triple theorem: delta_N^m(T_f) = (-i)^m T_(f^(m))",
    "summability": "spectral triple theorem: 1+ summability",
    "index": "spectral triple theorem: ind(D) = ind(S*) = 1",
    "real_structure": "real structure: J^2 = 1, JD = -DJ, J pi(T_f) J^-1 = pi(T_(f hat))",
    "first_order": "real structure: first-order condition up to rapid-decay matrices",
    "commutant": "real structure: commutant of the diagonal action is 4-dimensional",
    "finiteness": "finiteness: Phi(x) = x e_0 is an isometry for <<b, a>> = psi_0(b* a)",
    "orientation": "orientation: the diagonal entries of pi_D(omega) coincide",
    "pairing": "Poincare duality: pairings with compact classes have index 0",
    "surface": "surface algebra: boundary identification and smooth loop generators",
}

DEFAULT_TOLERANCES = {
    "spectrum": 1e-9,
    "commutator": 1e-10,
    "regularity": 1e-10,
    "summability": 1e-3,
    "summability_log_slope": 0.05,
    "summability_tail": 4e-2,
    "index": 0.0,
    "real_structure": 1e-10,
    "first_order": 1e-10,
    "commutant": 1e-9,
    "finiteness": 0.0,
    "orientation": 1e-9,
    "pairing": 1e-9,
    "surface": 1e-8,
}

DEFAULT_BATTERY = ("one", "p_e0", "p_e1", "T_u", "T_ubar")
DEFAULT_CHAINS = ("one,one,T_u,T_ubar", "one,one,T_u", "p_e0,one,T_u,T_ubar + one,T_u,T_ubar,T_u", "")
CONFIG_KEYS = {"surface", "truncations", "tolerances", "battery", "chains", "summability",
               "summability_terms", "random_elements", "output", "seed"}


class ConfigError(ValueError):
    """Malformed audit configuration, element name, or chain text."""


@dataclass(frozen=True)
class AuditConfig:
    surface: SurfacePreset
    truncations: tuple[int, ...] = (16, 64)
    tolerances: dict = field(default_factory=dict)
    battery: tuple[str, ...] = DEFAULT_BATTERY
    chains: tuple[str, ...] = DEFAULT_CHAINS
    summability: tuple[float, ...] = (1.0, 1.5, 2.0)
    summability_terms: int = 10 ** 6
    random_elements: int = 2
    output: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.surface, SurfacePreset):
            raise ConfigError("surface must be a SurfacePreset")
        ns = tuple(sorted(int(n) for n in self.truncations))
        if not ns or ns[0] < 4:
            raise ConfigError("truncations must be a non-empty list of sizes >= 4")
        object.__setattr__(self, "truncations", ns)
        tol = dict(DEFAULT_TOLERANCES)
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance names: {sorted(unknown)}")
        tol.update({k: float(v) for k, v in self.tolerances.items()})
        object.__setattr__(self, "tolerances", tol)
        object.__setattr__(self, "battery", tuple(self.battery))
        object.__setattr__(self, "chains", tuple(self.chains))
        object.__setattr__(self, "summability", tuple(float(s) for s in self.summability))
        fmt = self.output.get("format", "json")
        if fmt not in ("json", "csv"):
            raise ConfigError(f"output format must be json or csv, got {fmt!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "AuditConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "surface" not in d:
            raise ConfigError("config is missing the required 'surface' entry")
        try:
            surface = SurfacePreset.from_config(d["surface"])
        except (ValueError, TypeError, AttributeError) as exc:
            raise ConfigError(f"bad surface: {exc}") from exc
        kwargs = {k: d[k] for k in CONFIG_KEYS - {"surface"} if k in d}
        return cls(surface=surface, **kwargs)

    @classmethod
    def from_file(cls, path) -> "AuditConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "surface": self.surface.to_config(),
            "truncations": list(self.truncations),
            "tolerances": dict(sorted(self.tolerances.items())),
            "battery": list(self.battery),
            "chains": list(self.chains),
            "summability": list(self.summability),
            "summability_terms": self.summability_terms,
            "random_elements": self.random_elements,
            "output": dict(self.output),
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# named elements and chains

_LOOP = re.compile(r"^loop\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(-?\d+)\s*\)$")
_PROJ = re.compile(r"^p_e(\d+)$")


def resolve_element(name: str, surface: SurfacePreset | None = None) -> SurfaceElement:
    """Element for a battery name: one, p_e<i>, T_u, T_ubar, or loop(g,k,m).

    ``loop(g,k,m)`` is the smooth loop generator on arc pair k with winding m
    on the genus-g surface of the configured kind (genus 0 means the sphere).
    """
    return resolve_with_report(name, surface)[0]


def resolve_with_report(name: str, surface: SurfacePreset | None = None):
    """Like :func:`resolve_element`, also returning the decay report of the symbol.

    Loop generators report decay over every DFT mode of their samples; the
    stored series keeps only |k| <= 256, too few modes to see the asymptotic
    regime of a narrow arc.
    """
    m = _LOOP.match(name.strip())
    if not m:
        a = _resolve(name, surface)
        return a, decay_report(a.symbol)
    g, k, w = (int(x) for x in m.groups())
    kind = surface.kind if surface is not None else "orientable"
    try:
        preset = SurfacePreset.sphere() if g == 0 else SurfacePreset(
            kind if kind != "sphere" else "orientable", g)
        f, rep = loop_generator(preset, k, w)
        return SurfaceElement.toeplitz(f, preset, label=name.strip()), rep
    except ValueError as exc:
        raise ConfigError(f"bad loop element {name!r}: {exc}") from exc


def _resolve(name: str, surface: SurfacePreset | None = None) -> SurfaceElement:
    name = name.strip()
    if name == "one":
        return SurfaceElement.identity()
    if name == "T_u":
        return SurfaceElement.toeplitz(U, label="T_u")
    if name == "T_ubar":
        return SurfaceElement.toeplitz(UBAR, label="T_ubar")
    m = _PROJ.match(name)
    if m:
        return SurfaceElement.projection(int(m.group(1)))
    raise ConfigError(f"unknown element name {name!r}")


def parse_chain(chain_text: str, surface: SurfacePreset | None = None) -> HochschildChain:
    """Chain from ``'a0,b,a1,...,an + ...'``; a leading '-' negates a term.

    The empty string is the empty chain of degree 0.
    """
    chain_text = chain_text.strip()
    if not chain_text:
        return HochschildChain(0, ())
    terms = []
    degree = None
    for raw in chain_text.split("+"):
        raw = raw.strip()
        sign = 1
        if raw.startswith("-"):
            sign, raw = -1, raw[1:].strip()
        slots = [s.strip() for s in raw.split(",")]
        if len(slots) < 2 or any(not s for s in slots):
            raise ConfigError(f"malformed chain term {raw!r}: need a0,b,a1,...")
        if degree is None:
            degree = len(slots) - 2
        elif degree != len(slots) - 2:
            raise ConfigError("all chain terms must have the same degree")
        elems = [resolve_element(s, surface) for s in slots]
        if sign < 0:
            elems[0] = -elems[0]
        terms.append(tuple(elems))
    return HochschildChain(degree, terms)


def _random_elements(seed: int, count: int) -> list[tuple[str, SurfaceElement]]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        deg = int(rng.integers(1, 5))
        coeffs = {}
        for k in range(-deg, deg + 1):
            re_, im_ = (int(x) for x in rng.integers(-3, 4, size=2))
            if re_ or im_:
                coeffs[k] = GaussianRational(re_, im_)
        f = trig(coeffs)
        out.append((f"random_trig_{i}", SurfaceElement.toeplitz(f, label=f"random_trig_{i}")))
    return out


# ---------------------------------------------------------------------------
# report


@dataclass
class AxiomRecord:
    name: str
    paper_anchor: str
    status: str  # pass | fail | obstructed-as-predicted
    metrics: dict
    n: int
    tolerance: float

    def to_dict(self) -> dict:
        return {"name": self.name, "paper_anchor": self.paper_anchor, "status": self.status,
                "metrics": _jsonable(self.metrics), "n": self.n, "tolerance": self.tolerance}


@dataclass
class AxiomReport:
    config: dict
    records: list[AxiomRecord]
    timestamp: str = ""

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.records)

    def to_dict(self) -> dict:
        body = {"config": self.config, "records": [r.to_dict() for r in self.records]}
        body["canonical_hash"] = canonical_hash(body)
        body["timestamp"] = self.timestamp
        return body

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def canonical_hash(body: dict) -> str:
    core = {"config": body["config"], "records": body["records"]}
    blob = json.dumps(_jsonable(core), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, GaussianRational):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# ---------------------------------------------------------------------------
# individual checks


def _interior_equal(a, b, m: int, tol: float) -> tuple[bool, float]:
    a, b = a[:m, :m], b[:m, :m]
    if _is_exact(a) and _is_exact(b):
        return a == b, 0.0
    diff = float(np.max(np.abs(_dense(a) - _dense(b)), initial=0.0))
    return diff <= tol, diff


def _check_spectrum(n: int, tol: float) -> tuple[str, dict]:
    rep = spectrum(n, tol)
    expected = {k: 1 for k in range(-(n - 1), n)}
    ok = rep.max_deviation < tol and rep.multiplicities == expected and len(rep.boundary_artifacts) == 1
    return ("pass" if ok else "fail",
            {"max_deviation": rep.max_deviation, "eigenvalue_count": len(rep.eigenvalues),
             "boundary_artifacts": len(rep.boundary_artifacts), "simple": rep.simple})


def _check_commutator(a: SurfaceElement, n: int, tol: float) -> tuple[str, dict]:
    res = commutator_D(a, n)
    m = res.interior
    ok_u, du = _interior_equal(res.operator[0, 1], truncate(res.upper, n).matrix, m, tol)
    ok_l, dl = _interior_equal(res.operator[1, 0], truncate(res.lower, n).matrix, m, tol)
    norm = res.operator.norm(m)
    ok = ok_u and ok_l and math.isfinite(norm)
    return ("pass" if ok else "fail",
            {"interior": m, "interior_norm": norm, "upper_deviation": du, "lower_deviation": dl})


def _check_regularity(a: SurfaceElement, n: int, tol: float, depth: int = 5) -> tuple[str, dict]:
    res = iterated_delta(a, depth, n)
    m = res.interior
    worst, ok = 0.0, True
    for it, sym in zip(res.iterates, res.symbolic):
        same, d = _interior_equal(it.matrix, truncate(sym, n).matrix, m, tol * max(1.0, n ** depth))
        ok, worst = ok and same, max(worst, d)
    graded = iterated_delta(commutator_D(a, n).operator, depth)
    norms = res.norms + graded.norms
    ok = ok and all(math.isfinite(x) for x in norms)
    return ("pass" if ok else "fail",
            {"depth": depth, "interior": m, "max_deviation": worst, "norms": res.norms,
             "commutator_norms": graded.norms})


def _check_summability(s: float, terms: int, tols: dict) -> tuple[str, dict]:
    scan = summability_scan(s, terms)
    metrics = {"s": s, "final_partial_sum": scan.partial_sums[-1], "converges": scan.converges}
    if s <= 1.0:
        c = scan.growth_fit["c"]
        metrics.update({"log_slope": c, "fit_residual": scan.growth_fit["max_residual"]})
        ok = s < 1.0 or abs(c - 2.0) <= tols["summability_log_slope"]
        return ("pass" if ok else "fail"), metrics
    tails = scan.growth_fit["decade_tails"]
    metrics.update({"decade_tails": [t["tail"] for t in tails], "decreasing": scan.growth_fit["decreasing"],
                    "tail_bound": scan.growth_fit["tail_bound_at_last"]})
    ok = scan.growth_fit["decreasing"]
    if s == 2.0:
        gap = abs(scan.partial_sums[-1] - (math.pi ** 2 / 3 - 1))
        metrics["distance_to_limit"] = gap
        ok = ok and gap <= tols["summability"]
    if s == 1.5:
        ok = ok and all(t["tail"] < tols["summability_tail"] for t in tails if t["from"] >= 10 ** 4)
    return ("pass" if ok else "fail"), metrics


def _check_real_structure(elems, n: int) -> tuple[str, dict]:
    J = build_J(n)
    triple = build_dirac(n)
    sq = J.square() == ExactMatrix.identity(2 * n)
    anti = J.conjugate(triple.D).equals(triple.D.scale(-1))
    hats = []
    for name, a in elems:
        res = conjugate_by_J(a, n, J)
        hats.append(res.operator.equals(represent(res.symbolic, n)))
    ok = sq and anti and all(hats)
    return ("pass" if ok else "fail",
            {"J_squared_is_identity": sq, "JD_equals_minus_DJ": anti,
             "J_gamma_relation": j_gamma_relation(J), "hat_checks": len(hats), "hat_failures": hats.count(False)})


def _check_index(n: int) -> tuple[str, dict]:
    S = build_dirac(n).S.matrix
    v = fredholm_index(TruncatedOperator(n, S.H, "S*"))
    return ("pass" if v == 1 else "fail"), {"index": v}


def _check_first_order(a, b, n: int) -> tuple[str, dict]:
    res = first_order_defect(a, b, n)
    bound = support_bound(a, b)
    ok = res.agrees and res.support <= bound and res.report.verdict == "finite-support"
    return ("pass" if ok else "fail",
            {"support": res.support, "bound": bound, "verdict": res.report.verdict, "interior": res.interior})


def _check_orientation(chain_text: str, chain: HochschildChain, n: int, tol: float) -> tuple[str, dict]:
    try:
        res = orientation_obstruction(chain, None, n, tol)
    except ParityObstruction as exc:
        return "obstructed-as-predicted", {"chain": chain_text, "degree": chain.degree, "obstruction": "parity",
                                           "detail": str(exc)}
    ok = res.diagonals_agree and res.verdict == "obstructed"
    return ("obstructed-as-predicted" if ok else "fail",
            {"chain": chain_text, "degree": chain.degree, "diagonals_agree": res.diagonals_agree,
             "residual": res.residual, "interior": res.interior, "obstruction": res.verdict})


# ---------------------------------------------------------------------------
# driver


def run_audit(config: AuditConfig) -> AxiomReport:
    """Run every check at every configured truncation; check errors become failed records."""
    tols = config.tolerances
    records: list[AxiomRecord] = []

    def record(name: str, anchor: str, n: int, tol_key: str, fn: Callable[[], tuple[str, dict]]):
        try:
            status, metrics = fn()
        except Exception as exc:  # recorded, not fatal
            status, metrics = "fail", {"error": f"{type(exc).__name__}: {exc}"}
        records.append(AxiomRecord(name, ANCHORS[anchor], status, metrics, n, tols[tol_key]))

    named, reports = [], {}
    for name in config.battery:
        a, reports[name] = resolve_with_report(name, config.surface)
        named.append((name, a))
    named += _random_elements(config.seed, config.random_elements)
    exact = [(nm, a) for nm, a in named if a.exact]
    chains = [(chain_text, parse_chain(chain_text, config.surface)) for chain_text in config.chains]
    battery = {p.name: p for p in k0_battery()}

    for nm, a in named:
        if a.preset is not None:
            def surface_check(a=a, rep=reports.get(nm)):
                mem = is_member(a.preset, a.symbol, tol=tols["surface"])
                return ("pass" if mem.member and rep.verdict in ("rapid", "finite-support") else "fail",
                        {"max_deviation": mem.max_deviation, "decay": rep.verdict})
            record(f"surface/{nm}", "surface", a.degree, "surface", surface_check)

    for s in config.summability:
        key = "summability_log_slope" if s <= 1.0 else "summability_tail" if s == 1.5 else "summability"
        record(f"summability/s={s:g}", "summability", config.summability_terms, key,
               lambda s=s: _check_summability(s, config.summability_terms, tols))

    for n in config.truncations:
        record("spectrum", "spectrum", n, "spectrum", lambda n=n: _check_spectrum(n, tols["spectrum"]))
        record("index/S*", "index", n, "index", lambda n=n: _check_index(n))
        for nm, a in named:
            if a.corner_size > n:
                continue
            record(f"commutator/{nm}", "commutator", n, "commutator",
                   lambda a=a, n=n: _check_commutator(a, n, tols["commutator"]))
            record(f"regularity/{nm}", "regularity", n, "regularity",
                   lambda a=a, n=n: _check_regularity(a, n, tols["regularity"]))
        record("real_structure", "real_structure", n, "real_structure",
               lambda n=n: _check_real_structure(exact, n))
        for i, (na, a) in enumerate(exact):
            for nb, b in exact[i:]:
                nf = max(n, 4 * support_bound(a, b))
                record(f"first_order/{na},{nb}", "first_order", nf, "first_order",
                       lambda a=a, b=b, nf=nf: _check_first_order(a, b, nf))
        nc = min(n, 16)
        gens = [resolve_element(x) for x in ("p_e0", "p_e1", "T_u")]
        record("commutant", "commutant", nc, "commutant",
               lambda: (lambda d: ("pass" if d == 4 else "fail", {"dimension": d}))(
                   commutant_dimension(gens, nc, tol=tols["commutant"])))
        for nm, a in exact:
            def fin(a=a, n=n):
                chk = finiteness_isometry_check(a, n)
                return ("pass" if chk.equal else "fail", {"lhs": chk.lhs, "rhs": chk.rhs})
            if a.corner_size + a.degree + 1 <= n:
                record(f"finiteness/{nm}", "finiteness", n, "finiteness", fin)
        no = min(n, 32)
        for chain_text, chain in chains:
            record(f"orientation/{chain_text or 'empty'}", "orientation", no, "orientation",
                   lambda chain_text=chain_text, chain=chain: _check_orientation(chain_text, chain, no, tols["orientation"]))
        npair = min(n, 32)
        for q in battery.values():
            def pair(q=q):
                res = pairing_report(PairingInput(battery["p_e0"], q), None, npair)
                status = "obstructed-as-predicted" if res.index == 0 else "fail"
                return status, {"P": "p_e0", "Q": q.name, "index": res.index, "stabilized": list(res.indices),
                                "phase": res.phase}
            record(f"pairing/p_e0,{q.name}", "pairing", npair, "pairing", pair)

        def unit_pair():
            res = pairing_report(PairingInput(battery["one"], battery["one"]), None, npair)
            return ("pass" if res.index == 1 else "fail",
                    {"P": "one", "Q": "one", "index": res.index, "stabilized": list(res.indices), "phase": res.phase})
        record("pairing/one,one", "pairing", npair, "pairing", unit_pair)

    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return AxiomReport(config.to_dict(), records, stamp)
