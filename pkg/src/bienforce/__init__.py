"""Bidirectional runtime enforcement workbench.

Value-passing processes, safety HML formulas, symbolic transducer monitors,
their instrumentation, synthesis of disabling monitors from normal-form
formulas, and the analyses used to judge monitors (soundness, transparency,
modification counts).
"""
from . import analysis, core, formula, instrument, monitor, process, synth
from .analysis import (
    bisimilar,
    check_eventual_transparency,
    check_soundness,
    check_transparency,
    compare_intrusiveness,
    modification_count,
)
from .core import TAU, Action, Atom, Cons, Int, Tup, Universe
from .formula import after, is_normal_form, parse_formula, satisfies
from .instrument import Composite, composite_step, explore_composite
from .monitor import etp, parse_monitor
from .parsing import parse_trace_text
from .process import explore_lts, parse_process
from .synth import SynthesisConfig, synthesize

__version__ = "0.1.0"

__all__ = [
    "analysis", "core", "formula", "instrument", "monitor", "process", "synth",
    "bisimilar", "check_eventual_transparency", "check_soundness", "check_transparency",
    "compare_intrusiveness", "modification_count",
    "TAU", "Action", "Atom", "Cons", "Int", "Tup", "Universe",
    "after", "is_normal_form", "parse_formula", "satisfies",
    "Composite", "composite_step", "explore_composite",
    "etp", "parse_monitor", "parse_trace_text", "explore_lts", "parse_process",
    "SynthesisConfig", "synthesize",
]
