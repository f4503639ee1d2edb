"""Assume-guarantee synthesis for two-process program sketches."""

from .automata import UCW, accepts_lasso, translate_to_ucw
from .checker import AgsReport, Verdict, brute_force_synthesize, check_solution, model_check
from .driver import RunConfig, Solution, Unrealizable, freeze_holes, optimize, replace_spec, synthesize
from .dsl import load_problem, parse_problem, render_problem
from .encoder import ConstraintSet, encode_cost, encode_instance, encode_mode
from .enumerative import enumerative_check_sat
from .errors import AgsynthError
from .ltl import Lasso, eval_ltl_on_lasso, parse_ltl, render_ltl
from .minimize import minimize_expression
from .problem import StrategyTables, SynthesisProblem, Valuation
from .semantics import signals_of, step
from .smt import SolverConfig, SolverResult, emit_script, extract_tables, solve

__version__ = "0.1.0"

__all__ = [
    "UCW", "accepts_lasso", "translate_to_ucw",
    "AgsReport", "Verdict", "brute_force_synthesize", "check_solution", "model_check",
    "RunConfig", "Solution", "Unrealizable", "freeze_holes", "optimize", "replace_spec", "synthesize",
    "load_problem", "parse_problem", "render_problem",
    "ConstraintSet", "encode_cost", "encode_instance", "encode_mode",
    "enumerative_check_sat", "AgsynthError",
    "Lasso", "eval_ltl_on_lasso", "parse_ltl", "render_ltl",
    "minimize_expression", "StrategyTables", "SynthesisProblem", "Valuation",
    "signals_of", "step",
    "SolverConfig", "SolverResult", "emit_script", "extract_tables", "solve",
]
