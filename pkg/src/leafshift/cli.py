"""Command-line front end.

Every command reads a shift spec (and optionally a potential), runs one
pipeline, and writes a JSON report ``{command, inputs_digest, results,
checks, timing}``.  Exit codes: 0 success, 1 computational failure or a
failed check, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catmap, leaf, ledrappier, thermo
from .errors import InputError, LeafShiftError, NoConvergence
from .potentials import (
    LocallyConstantPotential,
    cohomology_residual,
    lex_anchors,
    periodic_cohomology_residual,
    sinai_reduce,
)
from .ruelle import apply_ruelle, build_component_model, log_harmonic_regularity
from .shift_core import ShiftGraph, load_graph, maximal_irreducible_components


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    timing: float = 0.0

    def check(self, name: str, residual: float, bound: float, passed: bool | None = None):
        if passed is None:
            passed = bool(residual <= bound)
        self.checks.append({
            "name": name,
            "status": "pass" if passed else "fail",
            "residual": float(residual),
            "bound": float(bound),
        })

    def skip(self, name: str, reason: str):
        self.checks.append({"name": name, "status": "skipped", "residual": 0.0,
                            "bound": 0.0, "reason": reason})

    @property
    def failed(self) -> list[str]:
        return [c["name"] for c in self.checks if c["status"] == "fail"]

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "results": self.results,
            "checks": self.checks,
            "timing": round(self.timing, 6),
        }
        return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


# -- input ----------------------------------------------------------------------


class Inputs:
    """Parsed files plus the raw bytes that feed the digest."""

    def __init__(self):
        self.blobs: list[bytes] = []
        self.graph: ShiftGraph | None = None
        self.potential: LocallyConstantPotential | None = None
        self.anchors = None

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        for b in self.blobs:
            h.update(len(b).to_bytes(8, "little"))
            h.update(b)
        return h.hexdigest()


def _read_json(path: str, inputs: Inputs):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None
    inputs.blobs.append(raw)
    text = raw.decode("utf-8", errors="replace")
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _anchored(path: str, text: str, exc: Exception) -> InputError:
    """Prefix a validation message with the line of the first quoted token."""
    msg = str(exc)
    line = None
    for token in re.findall(r"'([^']*)'", msg):
        # exact JSON string first, then any string containing the token
        m = re.search(r'"' + re.escape(token) + r'"', text) or \
            re.search(r'"[^"\n]*' + re.escape(token) + r'[^"\n]*"', text)
        if m:
            line = text.count("\n", 0, m.start()) + 1
            break
    where = f"{path}:{line}" if line else path
    out = type(exc)(f"{where}: {type(exc).__name__}: {msg}") if isinstance(exc, InputError) \
        else InputError(f"{where}: {msg}")
    return out


def load_inputs(args) -> Inputs:
    inputs = Inputs()
    doc, text = _read_json(args.spec, inputs)
    try:
        inputs.graph = load_graph(doc)
    except InputError as exc:
        raise _anchored(args.spec, text, exc) from None
    if getattr(args, "potential", None):
        pdoc, ptext = _read_json(args.potential, inputs)
        try:
            inputs.potential = LocallyConstantPotential.from_json(inputs.graph, pdoc)
        except (InputError, ValueError, TypeError, AttributeError) as exc:
            raise _anchored(args.potential, ptext, exc) from None
    else:
        inputs.potential = LocallyConstantPotential.constant(inputs.graph, 0.0)
    anchor = getattr(args, "anchor", "lex") or "lex"
    if anchor.startswith("explicit:"):
        path = anchor[len("explicit:"):]
        adoc, atext = _read_json(path, inputs)
        try:
            if not isinstance(adoc, dict):
                raise InputError("anchor file must map symbols to words")
            inputs.anchors = {
                inputs.graph.ids([k])[0]: inputs.graph.parse_word(v) for k, v in adoc.items()
            }
        except InputError as exc:
            raise _anchored(path, atext, exc) from None
    elif anchor != "lex":
        raise InputError(f"unknown anchor policy {anchor!r}; use lex or explicit:PATH")
    return inputs


def _components(g: ShiftGraph, args) -> list[tuple[int, ...]]:
    dec = maximal_irreducible_components(g)
    if getattr(args, "component", None):
        k = g.ids([args.component])[0]
        c = dec.component_of(k)
        if c is None:
            raise InputError(f"symbol {args.component!r} lies on no cycle")
        return [tuple(sorted(dec.components[c]))]
    if not dec.components:
        raise InputError("the graph has no irreducible component")
    return [tuple(sorted(c)) for c in dec.components]


def _single(g: ShiftGraph, args) -> tuple[int, ...]:
    comps = _components(g, args)
    if len(comps) > 1:
        names = [g.format_word(c) for c in comps]
        raise InputError(f"graph has several irreducible components {names}; pass --component")
    return comps[0]


def _model(inputs: Inputs, comp):
    return build_component_model(inputs.potential, comp, anchors=inputs.anchors)


def _names(cm, letters) -> str:
    return cm.graph.format_word(letters)


def _block_names(cm) -> list[str]:
    return [cm.graph.format_word(b) for b in cm.model.blocks]


def _stem(cm, text: str | None) -> leaf.Stem:
    if text is None:
        return leaf.Stem(tuple(int(x) for x in cm.model.blocks[0]))
    letters = cm.graph.parse_word(text)
    return leaf.Stem(tuple(letters))


# -- commands -------------------------------------------------------------------


def cmd_pressure(args, inputs: Inputs, report: RunReport):
    g = inputs.graph
    out = []

    def one(comp):
        cm = _model(inputs, comp)
        exact = thermo.gurevich_pressure(inputs.potential, model=cm, nmax=args.nmax)
        extra = thermo.gurevich_pressure(inputs.potential, model=cm, nmax=args.nmax,
                                         method="sequence-extrapolation")
        rec = thermo.classify_recurrence(inputs.potential, model=cm, nmax=args.nmax)
        ps = thermo.periodic_point_sum(inputs.potential, model=cm, nmax=args.nmax)
        return comp, cm, exact, extra, rec, ps

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        rows = list(pool.map(one, _components(g, args)))
    for comp, cm, exact, extra, rec, ps in rows:
        name = g.format_word(comp)
        out.append({
            "component": list(g.names(comp)),
            "period": cm.period,
            "pressure": exact.value,
            "extrapolated": {
                "value": extra.value,
                "error": extra.error_bound,
                "sequence": [[n, v] for n, v in extra.partial_sequence],
            },
            "recurrence": rec.cls,
            "periodic_sums": ps.partial_sums,
        })
        tol = max(1e-6, 10 * (extra.error_bound or 0.0))
        report.check(f"pressure-routes[{name}]", abs(exact.value - extra.value), tol)
    report.results["components"] = out
    if len(out) == 1:
        report.results["pressure"] = out[0]["pressure"]


def cmd_classify(args, inputs: Inputs, report: RunReport):
    g = inputs.graph
    out = []
    for comp in _components(g, args):
        cm = _model(inputs, comp)
        rec = thermo.classify_recurrence(inputs.potential, model=cm, nmax=args.nmax)
        out.append({
            "component": list(g.names(comp)),
            "class": rec.cls,
            "exact": rec.exact,
            "evidence": rec.evidence,
            "recurrence_partial_sums": rec.recurrence_partial_sums,
            "positive_recurrence_partial_sums": rec.positive_recurrence_partial_sums,
        })
    report.results["components"] = out


def cmd_reduce(args, inputs: Inputs, report: RunReport):
    pot = inputs.potential
    g = inputs.graph
    anchors = inputs.anchors
    if anchors is None:
        anchors = lex_anchors(g, pot.future_window + 1)
    red = sinai_reduce(pot, anchors)
    report.results.update({
        "past_potential": red.past_potential.to_json(),
        "transfer": red.transfer.to_json(),
        "transfer_sup": red.transfer_sup,
        "anchors": {g.symbols[s]: g.format_word(w) for s, w in sorted(red.anchors.items())},
    })
    bound = pot.future_window * 2 * pot.sup_norm
    report.check("transfer-bound", red.transfer_sup, bound + 1e-12)
    report.check("past-window", red.past_potential.past_window,
                 pot.past_window + pot.future_window)
    report.check("cohomology-pointwise", cohomology_residual(red, pot), 1e-12)
    report.check("cohomology-periodic", periodic_cohomology_residual(red, pot, 8), 1e-12)


def cmd_spectral(args, inputs: Inputs, report: RunReport):
    cm = _model(inputs, _single(inputs.graph, args))
    sp = cm.spectral
    report.results.update({
        "pressure": sp.pressure,
        "blocks": _block_names(cm),
        "psi": sp.psi,
        "p": sp.p,
        "recurrence": sp.recurrence,
    })
    _spectral_checks(cm, report)


def _spectral_checks(cm, report: RunReport):
    sp = cm.spectral
    report.check("eigen-residual", sp.residual, 1e-12)
    if sp.crosscheck is not None:
        report.check("dense-crosscheck", sp.crosscheck, 1e-9)
    lpsi = apply_ruelle(cm.model, sp.psi)
    report.check("harmonic", float(np.max(np.abs(lpsi - sp.eigenvalue * sp.psi)) /
                                   (sp.eigenvalue * sp.psi.max())), 1e-12)
    report.check("positivity", 0.0, 0.0, bool(np.all(sp.psi > 0) and np.all(sp.p > 0)))
    fam = leaf.LeafFamily.from_model(cm)
    rows = fam.kernel.sum(axis=1)
    report.check("normalized-kernel", float(np.max(np.abs(rows - 1))), 1e-12)
    reg = log_harmonic_regularity(sp, cm.model)
    report.check("log-psi-regularity", reg[-1], 1e-12)


def cmd_leaf(args, inputs: Inputs, report: RunReport):
    cm = _model(inputs, _single(inputs.graph, args))
    fam = leaf.LeafFamily.from_model(cm)
    stem = _stem(cm, args.stem)
    lm = leaf.leaf_measure(fam, stem, args.depth, limit=args.max_cylinders)
    report.results.update({
        "stem": _names(cm, stem.letters),
        "total": lm.total,
        "masses": {_names(cm, w): m for w, m in lm.masses.items()},
    })
    report.check("consistency", lm.consistency_residual(), 1e-12)
    d = min(args.depth, 6)
    report.check("pushforward-invariance",
                 leaf.pushforward_invariance_residual(fam, stem, d), 1e-10)
    worst, bound = 1.0, 1.0
    for other in leaf.all_stems(fam):
        if other.last == stem.last and other != stem:
            w, b = leaf.holonomy_ratio_check(fam, stem, other, d)
            report.check(f"holonomy[{_names(cm, other.letters)}]", w, b)
            worst, bound = max(worst, w), max(bound, b)
    report.results["holonomy"] = {"worst_ratio": worst, "bound": bound}
    table = leaf.assemble_equilibrium(fam, max(min(args.depth, 8), cm.model.block_length),
                                      limit=args.max_cylinders)
    gibbs = leaf.gibbs_bound_check(table, fam)
    report.results["gibbs"] = {"worst_ratio": gibbs.worst_ratio, "constant": gibbs.constant}
    report.check("gibbs", gibbs.spread, gibbs.spread_bound, gibbs.passed)


def cmd_equilibrium(args, inputs: Inputs, report: RunReport):
    cm = _model(inputs, _single(inputs.graph, args))
    fam = leaf.LeafFamily.from_model(cm)
    depth = max(args.depth, cm.potential.window_length)
    table = leaf.assemble_equilibrium(fam, depth, limit=args.max_cylinders)
    report.results["cylinders"] = {
        _names(cm, w): m for (k, w), m in sorted(table.masses.items()) if k == 0
    }
    report.results["pressure"] = cm.pressure
    _equilibrium_checks(cm, fam, table, report)


def _equilibrium_checks(cm, fam, table, report: RunReport):
    report.check("total-mass", abs(table.total - 1.0), 1e-12)
    report.check("shift-invariance", table.shift_invariance_residual(), 1e-12)
    gibbs = leaf.gibbs_bound_check(table, fam)
    report.check("gibbs", gibbs.spread, gibbs.spread_bound, gibbs.passed)
    ent = leaf.entropy_pressure_identity(table, fam)
    report.results["entropy"] = ent["entropy"]
    report.results["integral"] = ent["integral"]
    report.check("entropy-identity", ent["residual"], 1e-9)


def cmd_ledrappier(args, inputs: Inputs, report: RunReport):
    cm = _model(inputs, _single(inputs.graph, args))
    fam = leaf.LeafFamily.from_model(cm)
    stem = _stem(cm, args.stem)
    lm = leaf.leaf_measure(fam, stem, args.depth, limit=args.max_cylinders)
    conf = ledrappier.build_conformal_family(cm)
    dens = ledrappier.density_bounds(lm, conf, leaf_family=fam)
    report.results.update({
        "stem": _names(cm, stem.letters),
        "inf_ratio": dens.inf_ratio,
        "sup_ratio": dens.sup_ratio,
        "inf_normalized": dens.inf_normalized,
        "sup_normalized": dens.sup_normalized,
        "certificate": dens.certificate,
        "coding_multiplicity": ledrappier.CODING_MULTIPLICITY,
    })
    report.check("density-bounds", dens.sup_ratio, dens.certificate, dens.passed)
    report.check("conformality", conf.conformality_residual(min(args.depth, 6)), 1e-12)


def cmd_verify(args, inputs: Inputs, report: RunReport):
    """Full invariant suite on every component."""
    pot = inputs.potential
    g = inputs.graph
    depth = args.depth
    sub = min(depth, 6)
    comps = _components(g, args)
    report.results["components"] = []
    for comp in comps:
        cm = _model(inputs, comp)
        tag = g.format_word(comp)
        red = cm.reduction
        r = RunReport("", "")
        r.check("cohomology-pointwise", cohomology_residual(red, cm.potential), 1e-12)
        r.check("cohomology-periodic", periodic_cohomology_residual(red, cm.potential, 8), 1e-12)
        r.check("past-window", red.past_potential.past_window,
                cm.potential.past_window + cm.potential.future_window)
        r.check("transfer-bound", red.transfer_sup,
                cm.potential.future_window * 2 * cm.potential.sup_norm + 1e-12)
        _spectral_checks(cm, r)
        sp = cm.spectral
        rng = np.random.default_rng(0)
        h = rng.random((cm.model.size, 16))
        dual = np.max(np.abs(sp.p @ (cm.model.weights @ h) - sp.eigenvalue * (sp.p @ h)))
        r.check("duality", float(dual), 1e-12 * sp.eigenvalue)
        extra = thermo.gurevich_pressure(pot, model=cm, nmax=args.nmax,
                                         method="sequence-extrapolation")
        r.check("pressure-routes", abs(extra.value - cm.pressure),
                max(1e-6, 10 * (extra.error_bound or 0.0)))
        bases = [thermo.gurevich_pressure(pot, model=cm, nmax=args.nmax, base=b,
                                          method="sequence-extrapolation")
                 for b in comp]
        vals = [e.value for e in bases]
        slack = 10 * max(e.error_bound or 0.0 for e in bases)
        r.check("base-independence", max(vals) - min(vals), max(1e-9, slack))
        rec = thermo.classify_recurrence(pot, model=cm, nmax=args.nmax)
        r.check("positive-recurrence", 0.0, 0.0, rec.cls == thermo.POSITIVE)
        ps = thermo.periodic_point_sum(pot, model=cm, nmax=args.nmax)
        r.check("periodic-sum-divergence", max(0.0, -ps.slope), 0.0, ps.slope > 0)
        fam = leaf.LeafFamily.from_model(cm)
        stems = leaf.all_stems(fam)
        worst_push = max(leaf.pushforward_invariance_residual(fam, s, sub) for s in stems)
        r.check("pushforward-invariance", worst_push, 1e-10)
        worst_cons = max(leaf.leaf_measure(fam, s, sub).consistency_residual() for s in stems)
        r.check("leaf-consistency", worst_cons, 1e-12)
        hol_ok, hol_worst = True, 1.0
        for i, s in enumerate(stems):
            for t in stems[i + 1:]:
                if s.last == t.last:
                    w, b = leaf.holonomy_ratio_check(fam, s, t, sub)
                    hol_ok &= w <= b * (1 + 1e-12)
                    hol_worst = max(hol_worst, w / b)
        r.check("holonomy-envelope", hol_worst, 1.0, hol_ok)
        tdepth = max(depth, cm.model.block_length + sub - 1, cm.potential.window_length)
        table = leaf.assemble_equilibrium(fam, tdepth, limit=args.max_cylinders)
        _equilibrium_checks(cm, fam, table, r)
        r.check("uniqueness", leaf.uniqueness_residual(fam, table, stems[0], sub), 1e-11)
        conf = ledrappier.build_conformal_family(cm)
        r.check("conformality", conf.conformality_residual(sub), 1e-12)
        dens = ledrappier.density_bounds(leaf.leaf_measure(fam, stems[0], sub), conf,
                                         table=table, leaf_family=fam)
        r.check("density-bounds", dens.sup_ratio, dens.certificate, dens.passed)
        for c in r.checks:
            c["name"] = f"{c['name']}[{tag}]"
        report.checks.extend(r.checks)
        report.results["components"].append({
            "component": list(g.names(comp)),
            "pressure": cm.pressure,
            "entropy": r.results["entropy"],
            "integral": r.results["integral"],
            "recurrence": rec.cls,
            "periodic_sum_slope": ps.slope,
        })


def cmd_catmap_demo(args, inputs: Inputs, report: RunReport):
    model, pot, cm = catmap.build_catmap_model(args.t)
    expected = (1 - args.t) * math.log(model.lam)
    report.results.update({
        "t": args.t,
        "lambda": model.lam,
        "symbols": list(model.graph.symbols),
        "pressure": cm.pressure,
        "coding_multiplicity": catmap.coding_multiplicity(model, 16),
    })
    report.check("pressure", abs(cm.pressure - expected), 1e-10)
    if args.t == 1.0:
        dev = catmap.srb_comparison(model, cm, args.depth)
        report.results["srb_deviation"] = dev
        report.check("srb", dev, 1e-8)
        div = catmap.periodic_sum_divergence(model, args.nmax)
        report.results["periodic"] = {
            "fixed_point_counts": div.counts,
            "coded_counts": div.coded_counts,
            "partial_sums": div.partial_sums,
            "slope": div.slope,
        }
        report.check("periodic-counts", 0.0, 0.0,
                     div.coded_counts == div.counts[:len(div.coded_counts)])
        report.check("periodic-slope", abs(div.slope - 1.0), 0.05)
    else:
        report.skip("srb", "arclength comparison needs t = 1")


COMMANDS = {
    "pressure": cmd_pressure,
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "spectral": cmd_spectral,
    "leaf": cmd_leaf,
    "equilibrium": cmd_equilibrium,
    "ledrappier": cmd_ledrappier,
    "verify": cmd_verify,
    "catmap-demo": cmd_catmap_demo,
}


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leafshift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "catmap-demo":
            p.add_argument("--spec", required=True, help="shift spec JSON")
            p.add_argument("--potential", help="potential JSON (default: zero)")
            p.add_argument("--anchor", default="lex", help="lex or explicit:PATH")
            p.add_argument("--component", help="any symbol of the component to use")
        else:
            p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--depth", type=_positive, default=leaf.DEFAULT_DEPTH)
        p.add_argument("--nmax", type=_positive, default=20)
        p.add_argument("--out", help="report path (default: stdout)")
        p.add_argument("--threads", type=_positive, default=1)
        p.add_argument("--max-cylinders", type=_positive, default=leaf.MAX_CYLINDERS)
        if name in ("leaf", "ledrappier"):
            p.add_argument("--stem", help="past word (default: first block)")
    return parser


def run(argv=None) -> tuple[int, str]:
    """(exit code, report text or error message)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    t0 = time.perf_counter()
    try:
        if args.command == "catmap-demo":
            inputs = Inputs()
            inputs.blobs.append(json.dumps({"t": args.t}).encode())
        else:
            inputs = load_inputs(args)
        report = RunReport(args.command, inputs.digest)
        COMMANDS[args.command](args, inputs, report)
    except InputError as exc:
        return 2, f"error: {exc}"
    except (NoConvergence, LeafShiftError, ArithmeticError) as exc:
        return 1, f"error: {type(exc).__name__}: {exc}"
    report.timing = time.perf_counter() - t0
    try:
        text = report.to_json()
    except ValueError:
        return 1, "error: report contains NaN or infinite values"
    return (1 if report.failed else 0), text


def main(argv=None) -> int:
    code, text = run(argv)
    if text.startswith("error:"):
        print(text, file=sys.stderr)
        return code
    if text:
        args = build_parser().parse_args(argv)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
