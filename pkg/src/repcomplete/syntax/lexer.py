"""Tokenizer for the supported Java subset."""

import re
from dataclasses import dataclass

from ..errors import DataError


class ParseError(DataError):
    """Base class for ingestion failures; carries a 1-based line/column."""

    def __init__(self, message, line=0, column=0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.reason = message
        self.line = line
        self.column = column


class JavaSyntaxError(ParseError):
    pass


class UnsupportedConstruct(ParseError):
    pass


KEYWORDS = frozenset("""
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
""".split())

PRIMITIVES = frozenset(["boolean", "byte", "char", "short", "int", "long", "float", "double"])

# longest first so the alternation picks maximal munch
OPERATORS = sorted("""
    >>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= &= |= ^= %= << >>
    ( ) { } [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %
""".split(), key=len, reverse=True)

_IDENT = r"[A-Za-z_$À-￿][A-Za-z0-9_$À-￿]*"
_FLOAT = (
    r"0[xX](?:[0-9a-fA-F_]*\.?[0-9a-fA-F_]*)[pP][+-]?\d[\d_]*[fFdD]?"
    r"|\d[\d_]*\.(?:\d[\d_]*)?(?:[eE][+-]?\d[\d_]*)?[fFdD]?"
    r"|\.\d[\d_]*(?:[eE][+-]?\d[\d_]*)?[fFdD]?"
    r"|\d[\d_]*[eE][+-]?\d[\d_]*[fFdD]?"
    r"|\d[\d_]*[fFdD]"
)
_INT = r"0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|\d[\d_]*[lL]?"

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>//[^\n]*|/\*.*?\*/)"
    r'|(?P<textblock>"""[ \t\f]*\n(?:[^"\\]|\\.|"(?!""))*""")'
    r'|(?P<string>"(?:[^"\\\n]|\\.)*")'
    r"|(?P<char>'(?:[^'\\\n]|\\.)+')"
    rf"|(?P<float>(?:{_FLOAT}))(?![\w$])"
    rf"|(?P<int>(?:{_INT}))(?![\w$])"
    rf"|(?P<ident>{_IDENT})"
    r"|(?P<op>" + "|".join(re.escape(op) for op in OPERATORS) + ")",
    re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident keyword int float char string textblock bool null op eof
    value: str
    start: int
    end: int
    line: int
    column: int


def tokenize(source):
    """Split Java source into tokens, dropping whitespace and comments."""
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise JavaSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident":
                if text in KEYWORDS:
                    kind = "keyword"
                elif text in ("true", "false"):
                    kind = "bool"
                elif text == "null":
                    kind = "null"
            tokens.append(Token(kind, text, pos, m.end(), line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", n, n, line, n - line_start + 1))
    return tokens
