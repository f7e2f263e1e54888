"""Command-line front end: ``bienforce <command> ...``.

Artifact arguments are file paths, names registered in the bundled corpus
(``p_g``, ``phi1``, ``e_det``, ``t0`` and so on), or inline surface text.  Every command
prints a human-readable report, or JSON with ``--json``, and exits 0
exactly when every requested verdict holds.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from . import analysis, corpus
from . import formula as fm
from . import monitor as mon
from . import process as proc
from .core import Atom, Int, Universe, action_key, format_trace
from .errors import EnforceError, NotNormalForm
from .instrument import Composite, composite_step, explore_composite
from .parsing import parse_trace_text, parse_value_text
from .synth import SynthesisConfig, synthesize

EXT = {"process": ".proc", "formula": ".shml", "monitor": ".mon", "trace": ".tr"}
_PARSE = {
    "process": proc.parse_process,
    "formula": fm.parse_formula,
    "monitor": mon.parse_monitor,
    "trace": parse_trace_text,
}


class CliError(EnforceError):
    """A usage error detected after argument parsing."""


# -- configuration --------------------------------------------------------


@dataclass
class Config:
    ports: list = field(default_factory=lambda: ["a", "b", "c"])
    values: list = field(default_factory=lambda: [Int(1), Int(2), Atom("cls"), Atom("vdef")])
    default_value: object = Atom("vdef")
    tau_bound: int = 64
    state_bound: int = 10000
    depth: int = 8
    step_bound: int = 256
    seed: int = 0

    def validate(self) -> "Config":
        if self.default_value not in self.values:
            raise CliError(f"default value {self.default_value} is not among the values")
        for name in ("tau_bound", "state_bound", "depth", "step_bound"):
            if getattr(self, name) < 1:
                raise CliError(f"{name} must be at least 1")
        if not self.ports:
            raise CliError("at least one port is required")
        return self

    @property
    def universe(self) -> Universe:
        return Universe(tuple(self.ports), tuple(self.values))


_INT_KEYS = {"tau_bound", "state_bound", "depth", "step_bound", "seed"}
_KEY_ALIASES = {"default": "default_value", "defaultvalue": "default_value"}


def split_list(text: str) -> list:
    """Split on commas that are not nested inside brackets or parentheses."""
    items, depth, cur = [], 0, []
    for ch in text:
        if ch in "<(":
            depth += 1
        elif ch in ">)":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    items.append("".join(cur).strip())
    return [i for i in items if i]


def apply_setting(cfg: Config, key: str, value: str) -> Config:
    key = key.strip().lower().replace("-", "_")
    key = _KEY_ALIASES.get(key, key)
    if key == "ports":
        return replace(cfg, ports=split_list(value))
    if key == "values":
        return replace(cfg, values=[parse_value_text(v) for v in split_list(value)])
    if key == "default_value":
        return replace(cfg, default_value=parse_value_text(value.strip()))
    if key in _INT_KEYS:
        return replace(cfg, **{key: int(value)})
    raise CliError(f"unknown configuration key {key!r}")


def load_config(path: Optional[str]) -> Config:
    """Read a line-oriented ``key = value`` file; ``#`` starts a comment."""
    cfg = Config()
    if path is None:
        return cfg
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        cfg = apply_setting(cfg, key, value)
    return cfg


def config_from_args(args) -> Config:
    cfg = load_config(args.config)
    for key in ("ports", "values", "default", "tau_bound", "state_bound", "depth",
                "step_bound", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            cfg = apply_setting(cfg, key, str(value))
    return cfg.validate()


# -- artifact loading -----------------------------------------------------


def load_artifact(ref: str, kind: str):
    """Parse ``ref`` as a file path, a corpus artifact name, or inline text."""
    path = Path(ref)
    if path.is_file():
        return _PARSE[kind](path.read_text())
    if ref not in corpus.names():
        return _PARSE[kind](ref)
    art = corpus.artifact(ref)
    if art.kind != kind:
        raise CliError(f"corpus artifact {ref!r} is a {art.kind}, expected a {kind}")
    return art.parse()


def load_many(refs, kind: str) -> list:
    """Load artifacts; a directory contributes every file of the matching extension."""
    out = []
    for ref in refs:
        path = Path(ref)
        if path.is_dir():
            out.extend(_PARSE[kind](f.read_text()) for f in sorted(path.glob("*" + EXT[kind])))
        else:
            out.append(load_artifact(ref, kind))
    return out


# -- output ---------------------------------------------------------------


def emit(args, payload: dict, human: str) -> None:
    print(json.dumps(payload, indent=2) if args.json else human)


def _verdict_line(v: analysis.Verdict) -> str:
    line = f"{v.check}: {v.status}"
    if v.witness is not None:
        line += f"  witness: {format_trace(v.witness) or '(initial state)'}"
    if v.detail:
        line += f"  ({v.detail})"
    return line


# -- commands -------------------------------------------------------------


def cmd_check_sat(args, cfg: Config) -> int:
    f = load_artifact(args.formula, "formula")
    p = load_artifact(args.process, "process")
    res = fm.satisfies(proc.explore_lts(p, cfg.universe, cfg.state_bound), f)
    status = analysis.HOLDS if res else "Fails"
    payload = {"check": "satisfaction", "status": status, "bound": cfg.state_bound}
    human = f"satisfaction: {status}"
    if not res:
        payload["witness"] = [str(a) for a in res.witness]
        human += f"  witness: {format_trace(res.witness) or '(initial state)'}"
    emit(args, payload, human)
    return 0 if res else 1


def cmd_nf_check(args, cfg: Config) -> int:
    f = load_artifact(args.formula, "formula")
    report = fm.is_normal_form(f, cfg.universe)
    human = "normal form" if report.ok else f"not in normal form ({report.clause}): {report.message}"
    emit(args, report.to_json(), human)
    return 0 if report.ok else 1


def cmd_synth(args, cfg: Config) -> int:
    f = load_artifact(args.formula, "formula")
    try:
        e = synthesize(f, SynthesisConfig(tuple(cfg.ports), cfg.default_value), cfg.universe)
    except NotNormalForm as exc:
        payload = {"error": "NotNormalForm", "message": str(exc)}
        if exc.witness is not None:
            payload["witness"] = str(exc.witness)
        if args.json:
            print(json.dumps(payload, indent=2))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.simplify:
        e = mon.simplify(e)
    text = mon.format_monitor(e)
    emit(args, {"monitor": text}, text)
    return 0


def sorted_steps(s: Composite, universe: Universe) -> list:
    return sorted(composite_step(s, universe),
                  key=lambda t: (action_key(t[0]), t[2], str(t[1])))


def cmd_simulate(args, cfg: Config) -> int:
    e = load_artifact(args.monitor, "monitor")
    p = load_artifact(args.process, "process")
    script = [int(i) for i in split_list(args.script)] if args.script else None
    state = Composite(e, p)
    log, trace = [], []
    limit = len(script) if script is not None else cfg.step_bound
    for k in range(limit):
        steps = sorted_steps(state, cfg.universe)
        if not steps:
            break
        choice = script[k] if script is not None else 0
        if not 0 <= choice < len(steps):
            raise CliError(f"script index {choice} out of range at step {k} "
                           f"({len(steps)} transitions enabled)")
        a, nxt, rule = steps[choice]
        log.append({
            "step": k,
            "enabled": [f"{i}: {b} [{r}]" for i, (b, _, r) in enumerate(steps)],
            "chosen": choice, "action": str(a), "rule": rule,
        })
        trace.append(a)
        state = nxt
    stuck = not composite_step(state, cfg.universe)
    payload = {"trace": [str(a) for a in trace], "final": str(state), "stuck": stuck, "log": log}
    lines = []
    for entry in log:
        lines.append(f"step {entry['step']}:")
        lines.extend(f"    {t}" for t in entry["enabled"])
        lines.append(f"  -> {entry['action']} [{entry['rule']}]")
    lines.append(f"trace: {format_trace(trace) or '(empty)'}")
    lines.append(f"final: {state}{'  (stuck)' if stuck else ''}")
    emit(args, payload, "\n".join(lines))
    return 0


def cmd_verify(args, cfg: Config) -> int:
    e = load_artifact(args.monitor, "monitor")
    f = load_artifact(args.formula, "formula")
    systems = load_many(args.corpus, "process")
    u = cfg.universe
    verdicts = [
        analysis.check_soundness(e, f, systems, u, cfg.state_bound),
        analysis.check_transparency(e, f, systems, u, cfg.state_bound),
        analysis.check_eventual_transparency(e, f, systems, u, cfg.depth, cfg.state_bound),
    ]
    emit(args, {"verdicts": [v.to_json() for v in verdicts]},
         "\n".join(_verdict_line(v) for v in verdicts))
    return 0 if all(verdicts) else 1


def cmd_mc(args, cfg: Config) -> int:
    e = load_artifact(args.monitor, "monitor")
    t = load_artifact(args.trace, "trace")
    res = analysis.modification_count(e, t, cfg.universe, cfg.step_bound)
    lines = [f"mc = {'Divergent' if res.divergent else res.count}"]
    for tag, a, rule in res.derivation:
        what = "." if a is None else str(a)
        lines.append(f"  {tag:<9} {what}" + (f"  [{rule}]" if rule else ""))
    if res.residual:
        lines.append(f"  residual visible actions: {res.residual}")
    emit(args, res.to_json(), "\n".join(lines))
    return 1 if res.divergent else 0


def cmd_etp(args, cfg: Config) -> int:
    caps = sorted(mon.etp(load_artifact(args.monitor, "monitor")))
    emit(args, {"etp": caps}, "{" + ", ".join(caps) + "}")
    return 0


def _system_lts(ref: str, monitor_ref: Optional[str], cfg: Config):
    p = load_artifact(ref, "process")
    if monitor_ref is None:
        return proc.explore_lts(p, cfg.universe, cfg.state_bound)
    e = load_artifact(monitor_ref, "monitor")
    return explore_composite(Composite(e, p), cfg.universe, cfg.state_bound)


def cmd_bisim(args, cfg: Config) -> int:
    l1 = _system_lts(args.left, args.left_monitor, cfg)
    l2 = _system_lts(args.right, args.right_monitor, cfg)
    res = analysis.bisimilar(l1, l2)
    payload = {"check": "bisimilarity", "status": analysis.HOLDS if res else analysis.FAILS}
    human = f"bisimilarity: {payload['status']}"
    if not res:
        payload["witness"] = [str(a) for a in res.witness]
        human += f"  distinguishing trace: {format_trace(res.witness) or '(initial state)'}"
    emit(args, payload, human)
    return 0 if res else 1


def cmd_compare(args, cfg: Config) -> int:
    cand = load_artifact(args.candidate, "monitor")
    ref = load_artifact(args.reference, "monitor")
    f = load_artifact(args.formula, "formula")
    traces = load_many(args.traces, "trace")
    report = analysis.compare_intrusiveness(cand, ref, f, traces, cfg.universe, cfg.step_bound)
    show = lambda c: "Divergent" if c is None else str(c)  # noqa: E731
    lines = [f"etp candidate {sorted(report.candidate_etp)}, reference {sorted(report.reference_etp)}"
             f" ({'comparable' if report.comparable else 'reference has extra capabilities'})"]
    for t, a, b in report.rows:
        lines.append(f"  {show(a):>9} {show(b):>9}  {format_trace(t)}")
    lines.append(f"violations: {len(report.violations)}")
    emit(args, report.to_json(), "\n".join(lines))
    return 0 if report.comparable and not report.violations else 1


def cmd_export_dot(args, cfg: Config) -> int:
    lts = _system_lts(args.process, args.monitor, cfg)
    if args.format == "json":
        print(json.dumps(lts.to_json(), indent=2))
    else:
        print(lts.to_dot())
    return 0


# -- argument parsing -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--ports", help="comma-separated ports (the unblocking set for synth)")
    common.add_argument("--values", help="comma-separated input values")
    common.add_argument("--default", help="default input value")
    common.add_argument("--tau-bound", dest="tau_bound", type=int)
    common.add_argument("--state-bound", dest="state_bound", type=int)
    common.add_argument("--depth", type=int, help="visible depth for eventual transparency")
    common.add_argument("--step-bound", dest="step_bound", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="bienforce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *positionals):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        for pos, nargs in positionals:
            sp.add_argument(pos, nargs=nargs)
        sp.set_defaults(func=func)
        return sp

    add("check-sat", cmd_check_sat, "does a process satisfy a formula",
        ("formula", None), ("process", None))
    add("nf-check", cmd_nf_check, "is a formula in normal form", ("formula", None))
    sp = add("synth", cmd_synth, "synthesize a disabling monitor", ("formula", None))
    sp.add_argument("--simplify", action="store_true", help="drop unused recursion binders")
    sp = add("simulate", cmd_simulate, "step through an instrumented system",
             ("monitor", None), ("process", None))
    sp.add_argument("--script", help="comma-separated transition indices to follow")
    add("verify", cmd_verify, "soundness and (eventual) transparency over systems",
        ("monitor", None), ("formula", None), ("corpus", "+"))
    add("mc", cmd_mc, "modification count of a monitor on a trace",
        ("monitor", None), ("trace", None))
    add("etp", cmd_etp, "enforcement capabilities of a monitor", ("monitor", None))
    sp = add("bisim", cmd_bisim, "strong bisimilarity of two (instrumented) systems",
             ("left", None), ("right", None))
    sp.add_argument("--left-monitor")
    sp.add_argument("--right-monitor")
    add("compare", cmd_compare, "per-trace intrusiveness of two monitors",
        ("candidate", None), ("reference", None), ("formula", None), ("traces", "+"))
    sp = add("export-dot", cmd_export_dot, "export a (composite) LTS", ("process", None))
    sp.add_argument("--monitor")
    sp.add_argument("--format", choices=("dot", "json"), default="dot")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return args.func(args, cfg)
    except (EnforceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
