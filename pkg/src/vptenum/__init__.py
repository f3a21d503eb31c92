"""Streaming evaluation of visibly pushdown transducers over well-nested
documents: one-pass preprocessing into a persistent compact output set,
then enumeration of all outputs with output-linear delay. Includes a
document-spanner front-end compiling extraction grammars to transducers.
"""

from vptenum.nested import StructuredAlphabet, Token, Span, tokenize
from vptenum.ecs import EcsArena, EMPTY
from vptenum.vpt import Vpt
from vptenum.engine import preprocess, evaluate
from vptenum.spanner import parse_vpeg, evaluate_spanner

__all__ = [
    "StructuredAlphabet",
    "Token",
    "Span",
    "tokenize",
    "EcsArena",
    "EMPTY",
    "Vpt",
    "preprocess",
    "evaluate",
    "parse_vpeg",
    "evaluate_spanner",
]

__version__ = "0.1.0"
