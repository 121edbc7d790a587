"""Java parsing, linearization, cared-node filtering and variable marking."""

from .filters import DEFAULT_RULES, FilterRule, FilterRuleSet, NodeClass, classify
from .ingest import Function, SkippedFile, ingest_directory, tokenize_source
from .lexer import JavaSyntaxError, ParseError, UnsupportedConstruct
from .linearize import TokenEvent, dumps_events, linearize, loads_events, type_token
from .nodes import AstNode
from .parser import iter_functions, parse_java
from .scopes import resolve_variables
from .stats import RepetitionReport, repetition_stats

__all__ = [
    "AstNode", "DEFAULT_RULES", "FilterRule", "Function", "FilterRuleSet", "JavaSyntaxError",
    "NodeClass", "ParseError", "RepetitionReport", "SkippedFile", "TokenEvent",
    "UnsupportedConstruct", "classify", "dumps_events", "ingest_directory",
    "iter_functions", "linearize", "loads_events", "parse_java",
    "repetition_stats", "resolve_variables", "tokenize_source", "type_token",
]
