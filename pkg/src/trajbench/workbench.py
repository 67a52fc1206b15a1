"""Instance loading, command dispatch, regime sweeps and report rendering."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import hedging as hg
from .market import (DelayedJump, Explicit, Instance, InstanceError, Regime, Trajectory, as_rational,
                     build_instance, check_complete)
from .martingale import (MartingaleMeasure, TypeIINodeFound, check_duality_bounds, construct_measure,
                         dual_price, expectation, verify_martingale)
from .nodes import compute_reduction, node_table, type_ii_nodes
from .payoff import Payoff, PayoffError, evaluate_payoff
from .portfolio import describe as describe_portfolio
from .scenarios import get_scenario


class InputError(ValueError):
    """Bad input file, flag value or payoff."""


class InvariantViolation(RuntimeError):
    """A certificate or cross-check failed."""


COMMANDS = ("classify", "nullset", "price", "check", "martingale", "sweep", "report")
PRICE_OPS = ("replicate", "ibar", "sigmabar", "norm", "integralK")
CONDITIONS = ("lop", "mon", "L", "nL", "K", "nK-sufficient", "complete", "strict-mia", "null-arbitrage")
ACTIONS = ("construct", "verify", "expect", "dual")


def fmt(v) -> str:
    """Exact rendering: 'p/q' for rationals, '-inf'/'inf' for infinities."""
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "-inf" if v < 0 else "inf"
    return str(v)


# ---------------------------------------------------------------------------
# instance files


def _rat(value, where: str) -> Fraction:
    try:
        return as_rational(value)
    except InstanceError as exc:
        raise InstanceError(f"{where}: {exc}") from None


def _trajectory(item, where: str) -> tuple[Trajectory, str | None]:
    label = None
    if isinstance(item, dict):
        label = item.get("label")
        if "path" in item:
            vals = [_rat(v, f"{where}.path[{k}]") for k, v in enumerate(item["path"])]
            return Trajectory.from_path(vals), label
        if "breakpoints" in item:
            pairs = []
            for k, bp in enumerate(item["breakpoints"]):
                if not (isinstance(bp, list) and len(bp) == 2 and isinstance(bp[0], int)):
                    raise InstanceError(f"{where}.breakpoints[{k}]: expected [time, value]")
                pairs.append((bp[0], _rat(bp[1], f"{where}.breakpoints[{k}]")))
            try:
                return Trajectory.from_breakpoints(pairs), label
            except InstanceError as exc:
                raise InstanceError(f"{where}: {exc}") from None
        raise InstanceError(f"{where}: trajectory needs 'path' or 'breakpoints'")
    if isinstance(item, list):
        return Trajectory.from_path([_rat(v, f"{where}[{k}]") for k, v in enumerate(item)]), None
    raise InstanceError(f"{where}: expected a trajectory object or list")


def parse_instance(doc: dict[str, Any]) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("top level must be an object")
    for key in ("s0", "families", "regime"):
        if key not in doc:
            raise InstanceError(f"missing field {key!r}")
    s0 = _rat(doc["s0"], "s0")
    reg = doc["regime"]
    if not isinstance(reg, dict) or not isinstance(reg.get("N"), int) or not isinstance(reg.get("M"), int):
        raise InstanceError("regime: expected {'N': int, 'M': int}")
    try:
        regime = Regime(reg["N"], reg["M"])
    except InstanceError as exc:
        raise InstanceError(f"regime: {exc}") from None
    fams = []
    if not isinstance(doc["families"], list):
        raise InstanceError("families: expected a list")
    for i, fam in enumerate(doc["families"]):
        where = f"families[{i}]"
        kind = fam.get("kind") if isinstance(fam, dict) else None
        if kind == "explicit":
            trajs, labels = [], []
            for k, t in enumerate(fam.get("trajectories", [])):
                traj, lab = _trajectory(t, f"{where}.trajectories[{k}]")
                trajs.append(traj)
                labels.append(lab)
            fams.append(Explicit(tuple(trajs), tuple(labels) if any(labels) else ()))
        elif kind == "delayed_jump":
            try:
                fams.append(DelayedJump(
                    tuple(_rat(v, f"{where}.prefix[{k}]") for k, v in enumerate(fam["prefix"])),
                    _rat(fam["plateau"], f"{where}.plateau"),
                    _rat(fam["jump_to"], f"{where}.jump_to"),
                    fam.get("label", "U"),
                ))
            except KeyError as exc:
                raise InstanceError(f"{where}: missing field {exc}") from None
        else:
            raise InstanceError(f"{where}.kind: expected 'explicit' or 'delayed_jump', got {kind!r}")
    return build_instance(s0, fams, regime)


def load_instance(path: str | Path) -> Instance:
    """Read an instance JSON file; raises InputError with location details."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_instance(doc)
    except InstanceError as exc:
        raise InputError(f"{path}: {exc}") from None


def instance_to_json(instance: Instance) -> dict[str, Any]:
    """Instance document listing every class explicitly by breakpoints."""
    trajs = [{"label": lab, "breakpoints": [[t, str(v)] for t, v in traj.breakpoints]}
             for lab, traj in zip(instance.labels, instance.classes)]
    return {
        "s0": str(instance.s0),
        "families": [{"kind": "explicit", "trajectories": trajs}],
        "regime": {"N": instance.regime.N, "M": instance.regime.M},
    }


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    title: str
    columns: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    ok: bool = True
    raw: str | None = None

    def add(self, *cells) -> None:
        self.rows.append([c if isinstance(c, str) else fmt(c) for c in cells])

    def render(self, style: str = "txt") -> str:
        if self.raw is not None:
            return self.raw
        if style == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            w.writerows(self.rows)
            return buf.getvalue()
        if style == "md":
            out = [f"## {self.title}", ""]
            if self.columns:
                out.append("| " + " | ".join(self.columns) + " |")
                out.append("|" + "|".join("---" for _ in self.columns) + "|")
                out += ["| " + " | ".join(r) + " |" for r in self.rows]
                out.append("")
            out += [f"- {n}" for n in self.notes]
            return "\n".join(out).rstrip() + "\n"
        out = [self.title]
        if self.columns:
            widths = [max(len(c), *(len(r[k]) for r in self.rows)) if self.rows else len(c)
                      for k, c in enumerate(self.columns)]
            out.append("  ".join(c.ljust(w) for c, w in zip(self.columns, widths)).rstrip())
            out += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in self.rows]
        out += self.notes
        return "\n".join(out) + "\n"


def _payoff_vector(instance: Instance, expr: str | None) -> list[Fraction]:
    if not expr:
        raise InputError("--payoff is required for this command")
    try:
        return evaluate_payoff(Payoff(expr), instance)
    except PayoffError as exc:
        raise InputError(str(exc)) from None


def _measure_str(instance: Instance, q) -> str:
    if q is None:
        return "n/a"
    return " ".join(f"{lab}:{w}" for lab, w in zip(instance.labels, q) if w)


def _certify(res: hg.PriceResult) -> None:
    if res.outcome is not None and not res.certified():
        raise InvariantViolation("LP certificate failed to verify")


def cmd_classify(instance: Instance, args) -> Report:
    rep = Report("node classification", ["node", "depth", "children", "class", "truncation", "members"])
    for row in node_table(instance):
        nd = row.node
        rep.add(nd.label(), str(nd.depth), "{" + ",".join(str(c) for c in nd.children) + "}",
                str(row.cls), "yes" if row.truncation else "", ",".join(instance.labels[c] for c in nd.members))
    return rep


def cmd_nullset(instance: Instance, args) -> Report:
    certs = hg.null_certificates(instance)
    rep = Report("null set", ["class", "path", "null", "certificate"])
    for cid, lab in enumerate(instance.labels):
        cert = certs.get(cid)
        rep.add(lab, str(instance.classes[cid]), cid in certs, describe_portfolio(cert) if cert else "")
    rep.notes.append("A = {" + ",".join(instance.labels[c] for c in sorted(certs)) + "}")
    if len(certs) == instance.n_classes:
        rep.notes.append("warning: degenerate market, every class is null (||1|| = 0)")
    return rep


def cmd_price(instance: Instance, args) -> Report:
    op = args.op
    if op not in PRICE_OPS:
        raise InputError(f"--op must be one of {', '.join(PRICE_OPS)}")
    f = _payoff_vector(instance, args.payoff)
    rep = Report(f"price {op} of {args.payoff}", ["op", "value", "detail"])
    if op == "replicate":
        try:
            r = hg.replicate(instance, f)
            rep.add(op, r.value, describe_portfolio(r.portfolio))
        except hg.NotReplicable as exc:
            rep.add(op, "infeasible", "Farkas certificate " + " ".join(fmt(v) for v in exc.certificate))
    elif op == "sigmabar":
        res = hg.sigma_bar(instance, f)
        _certify(res)
        if res.finite:
            rep.add(op, res.value, describe_portfolio(res.portfolio))
            rep.add("dual", res.value, _measure_str(instance, res.measure))
        else:
            rep.add(op, res.value, "strict arbitrage " + describe_portfolio(res.witness) if res.witness else "")
    elif op == "ibar":
        if any(v < 0 for v in f):
            raise InputError("ibar needs a payoff >= 0 on every class (use norm for |f|)")
        res = hg.i_bar(instance, f)
        _certify(res)
        rep.add(op, res.value, describe_portfolio(res.portfolio))
    elif op == "norm":
        rep.add(op, hg.norm(instance, f), "")
    else:
        v = hg.integral_K(instance, f)
        lo = hg.sigma_under(instance, f).value
        hi = hg.sigma_bar(instance, f).value
        rep.add(op, v if v is not None else "not-integrable", f"inner={fmt(lo)} outer={fmt(hi)}")
    return rep


def cmd_check(instance: Instance, args) -> Report:
    cond = args.condition
    if cond not in CONDITIONS:
        raise InputError(f"--condition must be one of {', '.join(CONDITIONS)}")
    rep = Report(f"check {cond}", ["condition", "verdict", "witness"])
    if cond == "lop":
        rep.add(cond, hg.check_lop(instance), "")
    elif cond == "mon":
        rep.add(cond, hg.check_mon(instance), "")
    elif cond == "L":
        ok = hg.check_L(instance)
        if ok:
            wit = _measure_str(instance, hg.leinert_measure(instance))
        else:
            mia = hg.detect_strict_mia(instance)
            wit = describe_portfolio(mia) if mia else ""
        rep.add(cond, ok, wit)
    elif cond == "nL":
        bad = hg.nodewise_failures(instance)
        rep.add(cond, not bad, ",".join(n.label() for n in bad))
    elif cond == "K":
        res = hg.check_K(instance)
        wit = "" if res.passed else (" ".join(fmt(v) for v in res.counterexample)
                                     + f" (ibar={fmt(res.i_bar)} sigmabar={fmt(res.sigma_bar)})")
        rep.add(cond, "pass" if res.passed else "counterexample", wit)
        rep.notes.append(f"sampled {res.checked} positive payoffs; a pass is not a proof of (K)")
    elif cond == "nK-sufficient":
        comp = check_complete(instance.families)
        t2 = type_ii_nodes(instance, include_truncation=False)
        wit = []
        if not comp.complete:
            wit.append(f"incomplete, limit {comp.witness}")
        if t2:
            wit.append("type-II " + ",".join(n.label() for n in t2))
        rep.add(cond, hg.check_nK_sufficient(instance), "; ".join(wit))
    elif cond == "complete":
        comp = check_complete(instance.families)
        rep.add(cond, comp.complete, str(comp.witness) if comp.witness else "")
    elif cond == "strict-mia":
        p = hg.detect_strict_mia(instance)
        rep.add(cond, "found" if p else "none", describe_portfolio(p) if p else "")
    else:
        if hg.is_degenerate(instance):
            rep.notes.append("warning: degenerate market, every class is null (||1|| = 0)")
            rep.add(cond, "none", "")
        else:
            res = hg.detect_null_arbitrage(instance)
            rep.add(cond, "found" if res else "none",
                    f"{describe_portfolio(res.portfolio)} at {instance.labels[res.class_id]}" if res else "")
    return rep


def _load_measure(instance: Instance, path: str) -> MartingaleMeasure:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read measure {path}: {exc}") from None
    try:
        return MartingaleMeasure.from_mapping(instance, data)
    except (KeyError, InstanceError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_martingale(instance: Instance, args) -> Report:
    action = args.action
    if action not in ACTIONS:
        raise InputError(f"--action must be one of {', '.join(ACTIONS)}")
    rep = Report(f"martingale {action}", ["item", "value"])
    if action == "dual":
        f = _payoff_vector(instance, args.payoff)
        res = dual_price(instance, f, restrict_off_null=not args.unrestricted)
        _certify(res)
        rep.add("dual price", res.value)
        rep.add("measure", _measure_str(instance, res.measure))
        return rep
    if args.measure:
        Q = _load_measure(instance, args.measure)
    else:
        try:
            Q = construct_measure(instance)
        except TypeIINodeFound as exc:
            raise InputError(f"cannot construct a measure: {exc}") from None
    if action == "construct":
        if not verify_martingale(instance, Q):
            raise InvariantViolation("constructed measure is not a martingale")
        for lab, w in zip(instance.labels, Q.weights):
            rep.add(lab, w)
    elif action == "verify":
        rep.add("martingale", verify_martingale(instance, Q))
    else:
        f = _payoff_vector(instance, args.payoff)
        rep.add("E_Q[f]", expectation(instance, Q, f))
        for r in check_duality_bounds(instance, f, Q):
            rep.add("bounds", r.chain() + (" pass" if r.passed else " FAIL: " + "; ".join(r.violations)))
    return rep


# ---------------------------------------------------------------------------
# sweeps


SWEEP_COLUMNS = ["M", "N", "null", "L", "sigmabar", "ibar", "dual", "regime"]


@dataclass
class SweepRow:
    M: int
    N: int
    null_size: int
    leinert: bool
    sigma_bar: object
    i_bar: object
    dual: object
    kind: str

    def cells(self) -> list[str]:
        return [str(self.M), str(self.N), str(self.null_size), fmt(self.leinert), fmt(self.sigma_bar),
                fmt(self.i_bar), fmt(self.dual), self.kind]


@dataclass
class SweepReport:
    scenario: str
    payoff: str
    rows: list[SweepRow]

    def to_report(self) -> Report:
        rep = Report(f"sweep {self.scenario} payoff {self.payoff}", SWEEP_COLUMNS)
        for r in self.rows:
            rep.rows.append(r.cells())
        return rep

    def csv(self) -> str:
        return self.to_report().render("csv")

    def text(self) -> str:
        return self.to_report().render("txt")


def sweep_row(instance: Instance, payoff: str) -> SweepRow:
    f = evaluate_payoff(Payoff(payoff), instance)
    ib = hg.i_bar(instance, f).value if all(v >= 0 for v in f) else None
    return SweepRow(instance.regime.M, instance.regime.N, len(hg.null_set(instance)), hg.check_L(instance),
                    hg.sigma_bar(instance, f).value, ib, dual_price(instance, f).value, instance.regime_kind)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("WORKBENCH_THREADS", "1")))
    except ValueError:
        return 1


def regime_sweep(scenario: str, payoff: str, regimes: Sequence[tuple[int, int]]) -> SweepReport:
    """One row per (M, N) regime, in input order."""
    scn = get_scenario(scenario)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda mn: sweep_row(scn.build(mn[1], mn[0]), payoff), regimes))
    return SweepReport(scn.id, payoff, rows)


def parse_regimes(text: str) -> list[tuple[int, int]]:
    """'3:4,6:4' -> [(3, 4), (6, 4)] as (M, N) pairs."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            m, n = part.split(":")
            out.append((int(m), int(n)))
        except ValueError:
            raise InputError(f"bad regime {part!r}; expected M:N") from None
    if not out:
        raise InputError("no regimes given")
    return out


def cmd_sweep(instance: Instance | None, args) -> Report:
    if not args.scenario:
        raise InputError("sweep needs --scenario")
    payoff = args.payoff or "abs(S[1]-S[0])"
    regimes = parse_regimes(args.regimes) if args.regimes else [(args.M or 1, args.N or 1)]
    return regime_sweep(args.scenario, payoff, regimes).to_report()


def cmd_report(instance: Instance, args) -> Report:
    """Markdown dossier; every part is a sub-report rendered as markdown."""
    payoff = args.payoff or "abs(S[1]-S[0])"
    ns = _Args(payoff=payoff)
    parts = [Report("instance", raw="## instance\n\n```\n" + instance.describe() + "\n```\n")]
    parts.append(cmd_classify(instance, ns))
    parts.append(cmd_nullset(instance, ns))
    conds = Report("conditions", ["condition", "verdict", "witness"])
    for cond in CONDITIONS:
        conds.rows += cmd_check(instance, _Args(condition=cond)).rows
    parts.append(conds)
    prices = Report(f"prices of {payoff}", ["op", "value", "detail"])
    f = _payoff_vector(instance, payoff)
    for op in PRICE_OPS:
        if op == "ibar" and any(v < 0 for v in f):
            continue
        prices.rows += cmd_price(instance, _Args(op=op, payoff=payoff)).rows
    parts.append(prices)
    try:
        parts.append(cmd_martingale(instance, _Args(action="construct")))
    except InputError as exc:
        parts.append(Report("martingale construct", notes=[str(exc)]))
    red = compute_reduction(instance, max(1, min(instance.regime.M, instance.depth)))
    parts.append(Report("reduction", notes=[
        f"n={red.n}",
        "N_n = {" + ",".join(instance.labels[c] for c in sorted(red.removed)) + "}",
    ]))
    body = "\n".join(p.render("md") for p in parts)
    return Report("report", raw="# Trajectory set report\n\n" + body)


@dataclass
class _Args:
    op: str | None = None
    payoff: str | None = None
    condition: str | None = None
    action: str | None = None
    measure: str | None = None
    unrestricted: bool = False
    scenario: str | None = None
    regimes: str | None = None
    N: int | None = None
    M: int | None = None


HANDLERS = {
    "classify": cmd_classify,
    "nullset": cmd_nullset,
    "price": cmd_price,
    "check": cmd_check,
    "martingale": cmd_martingale,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def run_command(command: str, instance: Instance | None, args=None, **kwargs) -> Report:
    """Dispatch ``command``; ``args`` is a namespace or keyword options."""
    if command not in HANDLERS:
        raise InputError(f"unknown command {command!r}")
    if args is None:
        args = _Args(**kwargs)
    if instance is None and command != "sweep":
        raise InputError(f"{command} needs an instance")
    return HANDLERS[command](instance, args)
