"""Registry of the worked-example systems, formulas, monitors and traces.

Each artifact is a plain file in this directory; ``load(name)`` parses it
with the parser for its kind.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .. import formula, monitor, process
from ..core import Atom, Int, Universe
from ..errors import UnknownName
from ..parsing import parse_trace_text

KINDS = {"proc": "process", "shml": "formula", "mon": "monitor", "tr": "trace"}

_PARSERS = {
    "process": process.parse_process,
    "formula": formula.parse_formula,
    "monitor": monitor.parse_monitor,
    "trace": parse_trace_text,
}


@dataclass(frozen=True)
class NamedArtifact:
    name: str
    kind: str
    text: str
    provenance: str
    normal_form: bool = False

    def parse(self):
        return _PARSERS[self.kind](self.text)


_PROVENANCE = {
    "p_g": "request/response server that logs each serviced request on port b",
    "p_bo": "server that may answer a request twice; reconstructed as an internal "
            "choice between a single and a duplicated answer",
    "p_bi": "server that starts with an extra input on port a before serving",
    "phi1": "single answer per request on its port, then a log on port b; the log "
            "port is fixed to b",
    "phi2": "an input on a followed by an input on another port is a violation",
    "phi3": "overlapping output branches (a!4 matches both), not in normal form",
    "phi3_nf": "phi3 with its output branches made disjoint",
    "e_d": "disables every output and every input not on port b",
    "e_dt": "transparent disabler that falls back to e_d after a duplicated answer",
    "e_det": "disabler that unblocks inputs with a default value and keeps enforcing",
    "e_e": "enabler that fabricates an answer and a log for the first request",
    "e_a": "adapter swapping ports a and b",
    "e_ed": "two-branch suppressor of any input and any output",
    "e_1": "disabler for phi2 that unblocks port b only",
    "e_2": "disabler for phi2 that unblocks ports b and c",
    "t0": "run with a duplicated request and a duplicated answer",
    "t1": "run of p_bo with a duplicated answer",
    "t2": "run of p_bi with a duplicated request",
    "t3": "run with an input on b after the first request",
}

_NORMAL_FORM = {"phi1", "phi2", "phi3_nf"}

#: Universe shared by the golden tests: ports a, b, c and default value vdef.
GOLDEN_UNIVERSE = Universe(("a", "b", "c"), (Int(1), Int(2), Atom("cls"), Atom("vdef")))
DEFAULT_VALUE = Atom("vdef")


def _files() -> dict:
    out = {}
    for entry in resources.files(__name__).iterdir():
        stem, _, ext = entry.name.rpartition(".")
        if ext in KINDS:
            out[stem] = entry
    return out


def names(kind: str | None = None) -> list:
    """Registered artifact names, optionally restricted to one kind."""
    return sorted(n for n, f in _files().items()
                  if kind is None or KINDS[f.name.rpartition(".")[2]] == kind)


def artifact(name: str) -> NamedArtifact:
    files = _files()
    if name not in files:
        raise UnknownName(f"no corpus artifact named {name!r}")
    entry = files[name]
    return NamedArtifact(
        name,
        KINDS[entry.name.rpartition(".")[2]],
        entry.read_text(),
        _PROVENANCE.get(name, ""),
        name in _NORMAL_FORM,
    )


def load(name: str):
    """Parse the named artifact."""
    return artifact(name).parse()
