"""
Model Parser Module
Part of FD Tracer

Parses the CSP model language (`.fd` files) into a Model and renders a
Model back into canonical source text.

Grammar (statements end with `;`, `%` starts a line comment):

    var X in 1..3;                     declaration
    [X, Y, Z] :: 1..3;                 bulk declaration, same range
    X ## Y;   X #\\= Y;                 difference (both spellings)
    X #= Y;   X #= Y + 2;   X #= 4;    equality, offset, assignment
    X ## Y - 1;   X ## 4;              difference with offset or constant
    X #> Y;   X #>= Y;                 ordering between two variables
    label [X, Y] var first_fail val min;

Offsets are normalised: `+ 0` drops the offset and a negative offset
swaps the two variables, so every statement maps to one primitive form.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from config import VAL_STRATEGIES, VAR_STRATEGIES
from constraints import Eq, EqConst, EqOffset, Geq, Gt, Neq, NeqConst, NeqOffset, PrimitiveConstraint
from errors import DomainError, ModelSyntaxError
from fd_domain import Domain, DomainState, VarRef


@dataclass(frozen=True)
class ModelConstraint:
    """A model constraint before it is told: form, abstract text, context."""

    form: PrimitiveConstraint
    abstract: str
    context: str


@dataclass(frozen=True)
class LabelDirective:
    """Variables to label and the strategies to label them with."""

    variables: Tuple[VarRef, ...]
    var_strategy: str = "first_fail"
    val_strategy: str = "min"


@dataclass(frozen=True)
class Model:
    """
    A finite domain problem: variables with initial domains, constraints
    in posting order and an optional labelling directive.
    """

    variables: Tuple[Tuple[VarRef, Domain], ...]
    constraints: Tuple[ModelConstraint, ...] = ()
    labelling: Optional[LabelDirective] = None
    name: str = field(default="model", compare=False)

    def initial_state(self) -> DomainState:
        return DomainState(self.variables)

    def variable(self, name: str) -> VarRef:
        for var, _ in self.variables:
            if var.name == name:
                return var
        raise KeyError(name)

    @property
    def var_refs(self) -> List[VarRef]:
        return [var for var, _ in self.variables]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<op>\#>=|\#=<|\#<|\#\\=|\#=|\#\#|\#>)
  | (?P<range>\.\.)
  | (?P<bulk>::)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_]\w*)
  | (?P<punct>[\[\],;+\-()])
    """,
    re.VERBOSE,
)

KEYWORDS = ("var", "in", "label", "val")


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    """Split model text into tokens, dropping blanks and comments."""
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        if kind == "nl":
            line, line_start = line + 1, match.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive descent over the token list."""

    def __init__(self, text: str, context: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.context = context
        self.variables: Dict[str, Tuple[VarRef, Domain]] = {}
        self.constraints: List[ModelConstraint] = []
        self.labelling: Optional[LabelDirective] = None

    # -- token helpers -------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ModelSyntaxError:
        token = token or self.peek()
        return ModelSyntaxError(message, token.line, token.column)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        token = self.peek()
        if token.kind == kind and (text is None or token.text == text):
            self.pos += 1
            return token
        return None

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        token = self.accept(kind, text)
        if token is None:
            found = self.peek().text or "end of input"
            raise self.error(f"expected {text or kind}, found {found!r}")
        return token

    def integer(self) -> int:
        negative = self.accept("punct", "-") is not None
        value = int(self.expect("int").text)
        return -value if negative else value

    def new_name(self) -> Token:
        token = self.expect("name")
        if token.text in KEYWORDS:
            raise self.error(f"{token.text!r} is a keyword", token)
        if token.text in self.variables:
            raise self.error(f"variable {token.text} declared twice", token)
        return token

    def declared(self) -> VarRef:
        token = self.expect("name")
        if token.text not in self.variables:
            raise self.error(f"undeclared variable {token.text}", token)
        return self.variables[token.text][0]

    def var_list(self) -> List[VarRef]:
        self.expect("punct", "[")
        names = [self.declared()]
        while self.accept("punct", ","):
            names.append(self.declared())
        self.expect("punct", "]")
        return names

    # -- statements ----------------------------------------------------

    def parse(self) -> Model:
        while self.peek().kind != "eof":
            self.statement()
        return Model(
            variables=tuple(self.variables.values()),
            constraints=tuple(self.constraints),
            labelling=self.labelling,
            name=self.context,
        )

    def statement(self):
        token = self.peek()
        if token.kind == "name" and token.text == "var":
            self.advance()
            self.declare([self.new_name()])
        elif token.kind == "punct" and token.text == "[":
            self.advance()
            names = [self.new_name()]
            while self.accept("punct", ","):
                names.append(self.new_name())
            self.expect("punct", "]")
            self.expect("bulk")
            self.declare(names, bulk=True)
        elif token.kind == "name" and token.text == "label":
            self.advance()
            self.label(token)
        elif token.kind == "name":
            self.constraint()
        else:
            raise self.error(f"expected a statement, found {token.text or 'end of input'!r}")
        self.expect("punct", ";")

    def declare(self, names: List[Token], bulk: bool = False):
        if not bulk:
            self.expect("name", "in")
        start = self.peek()
        lo = self.integer()
        self.expect("range")
        hi = self.integer()
        if lo > hi:
            raise self.error(f"empty range {lo}..{hi}", start)
        for token in names:
            if token.text in self.variables:
                raise self.error(f"variable {token.text} declared twice", token)
            var = VarRef(len(self.variables) + 1, token.text)
            self.variables[token.text] = (var, Domain.range(lo, hi))

    def label(self, keyword: Token):
        if self.labelling is not None:
            raise self.error("duplicate label directive", keyword)
        variables = self.var_list()
        var_strategy, val_strategy = "first_fail", "min"
        if self.accept("name", "var"):
            var_strategy = self.strategy(VAR_STRATEGIES)
        if self.accept("name", "val"):
            val_strategy = self.strategy(VAL_STRATEGIES)
        self.labelling = LabelDirective(tuple(variables), var_strategy, val_strategy)

    def strategy(self, choices: Tuple[str, ...]) -> str:
        token = self.expect("name")
        if token.text not in choices:
            raise self.error(f"unknown strategy {token.text!r}, expected one of {', '.join(choices)}", token)
        return token.text

    def constraint(self):
        x = self.declared()
        op_token = self.peek()
        if op_token.kind != "op":
            raise self.error(f"expected a constraint operator, found {op_token.text or 'end of input'!r}")
        self.advance()
        op = "##" if op_token.text == "#\\=" else op_token.text
        if op in ("#<", "#=<"):
            raise self.error(f"operator {op} is not supported, write the constraint with #> or #>=", op_token)

        rhs = self.peek()
        if rhs.kind == "int" or (rhs.kind == "punct" and rhs.text == "-"):
            n = self.integer()
            if op == "#=":
                form: PrimitiveConstraint = EqConst(x, n)
            elif op == "##":
                form = NeqConst(x, n)
            else:
                raise self.error(f"{x} {op} {n} is not a primitive constraint", rhs)
        else:
            y = self.declared()
            if y == x:
                raise self.error(f"variable {x} appears on both sides", rhs)
            offset = self.offset()
            if op in ("#>", "#>="):
                if offset is not None:
                    raise self.error(f"{op} does not take an offset", rhs)
                form = Gt(x, y) if op == "#>" else Geq(x, y)
            else:
                form = _normalise(op, x, y, offset or 0)

        self.constraints.append(ModelConstraint(form, form.abstract(), self.context))

    def offset(self) -> Optional[int]:
        sign = self.accept("punct", "+") or self.accept("punct", "-")
        if sign is None:
            return None
        if self.accept("punct", "("):
            value = self.integer()
            self.expect("punct", ")")
        else:
            value = int(self.expect("int").text)
        return -value if sign.text == "-" else value


def _normalise(op: str, x: VarRef, y: VarRef, n: int) -> PrimitiveConstraint:
    """Map `x op y + n` onto one primitive form with a nonnegative offset."""
    if n == 0:
        return Eq(x, y) if op == "#=" else Neq(x, y)
    if n < 0:
        x, y, n = y, x, -n
    return EqOffset(x, y, n) if op == "#=" else NeqOffset(x, y, n)


def parse_model(text: str, context: str = "model") -> Model:
    """
    Parse model source text.

    Args:
        text: Model source
        context: Context string attached to every model constraint,
            normally the model file name

    Returns:
        The parsed Model

    Raises:
        ModelSyntaxError: with line and column of the offending token
    """
    return _Parser(text, context).parse()


def render_model(model: Model) -> str:
    """Canonical source text for a model; parse_model() reads it back unchanged."""
    lines = []
    for var, domain in model.variables:
        if not domain.is_interval():
            raise DomainError(f"cannot render non-interval domain {domain} of {var}")
        lines.append(f"var {var.name} in {domain.min}..{domain.max};")
    for c in model.constraints:
        lines.append(f"{c.form.abstract()};")
    if model.labelling is not None:
        names = ", ".join(var.name for var in model.labelling.variables)
        lines.append(
            f"label [{names}] var {model.labelling.var_strategy} val {model.labelling.val_strategy};"
        )
    return "\n".join(lines) + "\n"
