"""Deterministic tree transducers: top-down, macro, streaming string, and shared evaluation."""

from .bta import Dbta, check_total, contains_b, contains_letter, run_dbta
from .examples import builtin
from .mtt import (
    MacroTT,
    eliminate_lookahead,
    mtt_unary_to_tdtts,
    run_oi,
    run_oi_open,
    tdtts_to_mtt_unary,
)
from .rules import UNDEFINED, Call, Out, Rule, TransductionError, UndefinedTransition
from .sharing import dedup, growth_report, run_shared
from .sst import OutputUndefined, Sst, is_copyless, remark_example, run_sst, tdtts_unary_to_sst
from .syntax import format_definition, parse_definition
from .tdtt import (
    RegisterMachine,
    TopDownTT,
    check_wellformed,
    run_register_machine,
    run_topdown,
    to_register_machine,
)
from .terms import (
    Context,
    Param,
    RankedAlphabet,
    TermDag,
    Tree,
    dag_stats,
    decode_string,
    encode_string,
    enumerate_trees,
    parse_term,
    substitute,
    tree_size,
    unfold,
    yield_of,
)

from .pipeline import EquivVerdict, Pipeline, check_equiv, run_pipeline
from .dot import export_dot

__version__ = "0.1.0"

__all__ = [
    "Dbta", "check_total", "contains_b", "contains_letter", "run_dbta",
    "builtin",
    "MacroTT", "eliminate_lookahead", "mtt_unary_to_tdtts", "run_oi", "run_oi_open", "tdtts_to_mtt_unary",
    "UNDEFINED", "Call", "Out", "Rule", "TransductionError", "UndefinedTransition",
    "dedup", "growth_report", "run_shared",
    "OutputUndefined", "Sst", "is_copyless", "remark_example", "run_sst", "tdtts_unary_to_sst",
    "format_definition", "parse_definition",
    "RegisterMachine", "TopDownTT", "check_wellformed", "run_register_machine", "run_topdown",
    "to_register_machine",
    "Context", "Param", "RankedAlphabet", "TermDag", "Tree", "dag_stats", "decode_string",
    "encode_string", "enumerate_trees", "parse_term", "substitute", "tree_size", "unfold", "yield_of",
    "EquivVerdict", "Pipeline", "check_equiv", "run_pipeline", "export_dot",
]
