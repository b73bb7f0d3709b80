"""Symbolic functions of ``z`` and ``conj(z)`` on the punctured plane.

Expressions are parsed into a small immutable tree and evaluated with numpy,
so one call can evaluate a whole circle of sample points at once.

Grammar (EBNF)::

    program    = "let" name "(" name ")" "=" expr "in" program
               | expr ;
    expr       = term { ("+" | "-") term } ;
    term       = unary { ("*" | "/") unary } ;
    unary      = ("+" | "-") unary | power ;
    power      = atom [ "^" exponent ] ;
    exponent   = [ "+" | "-" ] integer | "(" [ "+" | "-" ] integer ")" ;
    atom       = number | imaginary | "i" | variable
               | "conj" "(" expr ")" | "abs" "(" variable ")"
               | name "(" expr ")" | "(" expr ")" ;
    number     = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
    imaginary  = number "i" ;

The variable is ``z`` at top level and the declared parameter inside a
``let`` body.  ``conj`` is pushed down to the leaves, so ``conj(z - 2)``
becomes ``conj(z) - 2``.  Three templates are recognised by shape:

* ``P/Q`` with ``P`` and ``Q`` polynomial in ``z`` and ``conj(z)``: rational
* ``g(z/conj(z))``: constant on lines through the origin
* ``g(z/abs(z))``: constant on rays from the origin
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

__all__ = [
    "Var", "ConjVar", "Abs", "Const", "Add", "Sub", "Mul", "Div", "IntPow",
    "Call", "ExprNode", "FunctionModel", "NativeFunction", "ExprError",
    "ExprSyntaxError", "UnknownFunctionError", "EvaluationError", "parse",
    "evaluate", "to_text", "node_to_text", "rational_parts", "is_polynomial",
    "scale_invariance_check", "load_definitions", "parse_definitions",
    "DIVISION_THRESHOLD", "magnitude_scale", "evaluate_zw", "is_finite_formula",
]

#: Denominators smaller than this in modulus are treated as true poles.
DIVISION_THRESHOLD = 1e-300


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = ""
        if text:
            pointer = "\n  " + text + "\n  " + " " * position + "^"
        super().__init__(f"{message} (at position {position}){pointer}")


class UnknownFunctionError(ExprSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    pass


# --------------------------------------------------------------------- nodes

@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class ConjVar:
    pass


@dataclass(frozen=True)
class Abs:
    pass


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Add:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Sub:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Mul:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Div:
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class IntPow:
    base: "ExprNode"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    argument: "ExprNode"


ExprNode = Union[Var, ConjVar, Abs, Const, Add, Sub, Mul, Div, IntPow, Call]
_BINARY = (Add, Sub, Mul, Div)


class NativeFunction:
    """A closed-form single-variable function registered under a name.

    Used for boundary functions the grammar cannot spell, such as the
    inverse of a circle diffeomorphism.  ``func`` must accept numpy arrays.
    Instances must be picklable for parallel scans, so pass a module-level
    callable or a callable object, not a lambda.
    """

    def __init__(self, name: str, func: Callable[[np.ndarray], np.ndarray],
                 description: str = ""):
        self.name = name
        self.func = func
        self.description = description or name

    def _apply(self, w):
        return np.asarray(self.func(w), dtype=complex)

    def __call__(self, w):
        out = self._apply(np.asarray(w, dtype=complex))
        return complex(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"NativeFunction({self.name!r}, {self.description!r})"


Registered = Union["FunctionModel", NativeFunction]


@dataclass(frozen=True, eq=False)
class FunctionModel:
    """A parsed function together with the named functions it may call.

    ``kind`` is one of ``general``, ``rational``, ``line_constant`` or
    ``ray_constant``.  For rational models ``P`` and ``Q`` hold numerator
    and denominator; for the two scale-invariant kinds ``g`` names the
    boundary function.  ``origin_value`` declares the value at ``z = 0``
    for functions continuous there; ``None`` means the model lives on the
    punctured plane only.
    """

    root: ExprNode
    kind: str = "general"
    registry: Mapping[str, Registered] = field(default_factory=dict)
    var: str = "z"
    P: ExprNode | None = None
    Q: ExprNode | None = None
    g: str | None = None
    origin_value: complex | None = None
    label: str | None = None

    def __post_init__(self):
        # private copy; models are never mutated after construction
        object.__setattr__(self, "registry", dict(self.registry))

    def _apply(self, values):
        return _eval(self.root, values, None, self.registry)

    def evaluate(self, z):
        return evaluate(self, z)

    __call__ = evaluate

    def to_text(self) -> str:
        return to_text(self)

    @property
    def boundary_function(self) -> Registered | None:
        return self.registry[self.g] if self.g is not None else None

    def __str__(self):
        return self.label or to_text(self)


# ------------------------------------------------------------------ tokenize

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()=,])
""", re.VERBOSE)

_KEYWORDS = {"let", "in", "conj", "abs", "i"}


@dataclass
class _Token:
    kind: str  # num, name, op, end
    text: str
    pos: int
    value: complex | None = None


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}",
                                  pos, text)
        if m.group("num") is not None:
            value = float(m.group("num"))
            if m.group("imag"):
                tokens.append(_Token("num", m.group(0), pos, complex(0.0, value)))
            else:
                tokens.append(_Token("num", m.group(0), pos, complex(value)))
        elif m.group("name") is not None:
            tokens.append(_Token("name", m.group("name"), pos))
        elif m.group("op") is not None:
            tokens.append(_Token("op", m.group("op"), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# -------------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str, registry: Mapping[str, Registered]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.registry = dict(registry)

    # token helpers
    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message, tok=None, cls=ExprSyntaxError):
        tok = tok or self.tok
        return cls(message, tok.pos, self.text)

    def accept(self, text) -> bool:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def expect_name(self) -> _Token:
        tok = self.tok
        if tok.kind != "name" or tok.text in _KEYWORDS:
            raise self.error("expected a name")
        self.i += 1
        return tok

    # grammar
    def program(self, var: str) -> FunctionModel:
        bindings: dict[str, Registered] = {}
        while self.tok.kind == "name" and self.tok.text == "let":
            self.i += 1
            name_tok = self.expect_name()
            self.expect("(")
            param = self.expect_name().text
            self.expect(")")
            self.expect("=")
            body = self.expr(param)
            self.expect("in")
            model = _make_model(body, dict(self.registry), var=param)
            self.registry[name_tok.text] = model
            bindings[name_tok.text] = model
        root = self.expr(var)
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return _make_model(root, self.registry, var=var)

    def expr(self, var):
        node = self.term(var)
        while True:
            if self.accept("+"):
                node = _fold(Add(node, self.term(var)))
            elif self.accept("-"):
                node = _fold(Sub(node, self.term(var)))
            else:
                return node

    def term(self, var):
        node = self.unary(var)
        while True:
            if self.accept("*"):
                node = _fold(Mul(node, self.unary(var)))
            elif self.tok.text == "/" and self.tok.kind == "op":
                tok = self.tok
                self.i += 1
                den = self.unary(var)
                if _is_constant_zero(den):
                    raise self.error("division by a constant zero", tok)
                node = _fold(Div(node, den))
            else:
                return node

    def unary(self, var):
        if self.accept("-"):
            operand = self.unary(var)
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Sub(Const(0j), operand)
        if self.accept("+"):
            return self.unary(var)
        return self.power(var)

    def power(self, var):
        node = self.atom(var)
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.tok
            self.i += 1
            exponent = self.exponent()
            if exponent < 0 and _is_constant_zero(node):
                raise self.error("negative power of a constant zero", caret)
            node = _fold(IntPow(node, exponent))
            if self.tok.kind == "op" and self.tok.text == "^":
                raise self.error("chained exponents are ambiguous; "
                                 "add parentheses")
        return node

    def exponent(self) -> int:
        paren = self.accept("(")
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        tok = self.tok
        if tok.kind != "num" or tok.value.imag != 0 or \
                not re.fullmatch(r"\d+", tok.text):
            raise self.error("exponent must be an integer literal")
        self.i += 1
        if paren:
            self.expect(")")
        return sign * int(tok.text)

    def atom(self, var):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(tok.value)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr(var)
            self.expect(")")
            return node
        if tok.kind != "name":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        self.i += 1
        name = tok.text
        if name == "i":
            return Const(1j)
        if name == var:
            return Var()
        if name == "conj":
            self.expect("(")
            inner = self.expr(var)
            self.expect(")")
            try:
                return _conjugate(inner)
            except ExprError as exc:
                raise self.error(str(exc), tok) from None
        if name == "abs":
            self.expect("(")
            arg = self.tok
            if not (arg.kind == "name" and arg.text == var):
                raise self.error(f"abs() accepts only the variable {var!r}")
            self.i += 1
            self.expect(")")
            return Abs()
        if name in ("let", "in"):
            raise self.error(f"misplaced keyword {name!r}", tok)
        if self.tok.kind == "op" and self.tok.text == "(":
            if name not in self.registry:
                raise self.error(f"unknown function {name!r}", tok,
                                 UnknownFunctionError)
            self.i += 1
            arg = self.expr(var)
            self.expect(")")
            return Call(name, arg)
        raise self.error(f"unknown name {name!r}", tok)


def _fold(node):
    """Fold an operator whose operands are both constants."""
    if isinstance(node, _BINARY) and isinstance(node.left, Const) \
            and isinstance(node.right, Const):
        a, b = node.left.value, node.right.value
        if isinstance(node, Add):
            return Const(a + b)
        if isinstance(node, Sub):
            return Const(a - b)
        if isinstance(node, Mul):
            return Const(a * b)
        if b != 0:
            return Const(a / b)
    if isinstance(node, IntPow) and isinstance(node.base, Const):
        if node.base.value != 0 or node.exponent >= 0:
            return Const(node.base.value ** node.exponent)
    return node


def _is_constant_zero(node) -> bool:
    """Whether ``node`` is zero by its syntax alone (a zero literal, or a
    product or positive power with a zero literal factor)."""
    if isinstance(node, Const):
        return node.value == 0
    if isinstance(node, Mul):
        return _is_constant_zero(node.left) or _is_constant_zero(node.right)
    if isinstance(node, Div):
        return _is_constant_zero(node.left)
    if isinstance(node, IntPow):
        return node.exponent > 0 and _is_constant_zero(node.base)
    return False


def _conjugate(node):
    if isinstance(node, Var):
        return ConjVar()
    if isinstance(node, ConjVar):
        return Var()
    if isinstance(node, Abs):
        return node
    if isinstance(node, Const):
        v = node.value
        return Const(complex(v.real, -v.imag if v.imag else 0.0))
    if isinstance(node, _BINARY):
        return type(node)(_conjugate(node.left), _conjugate(node.right))
    if isinstance(node, IntPow):
        return IntPow(_conjugate(node.base), node.exponent)
    raise ExprError("conj() of a function call is not supported")


def is_polynomial(node) -> bool:
    """True for trees built from the variable, its conjugate, constants,
    sums, products and non-negative integer powers."""
    if isinstance(node, (Var, ConjVar, Const)):
        return True
    if isinstance(node, (Add, Sub, Mul)):
        return is_polynomial(node.left) and is_polynomial(node.right)
    if isinstance(node, IntPow):
        return node.exponent >= 0 and is_polynomial(node.base)
    return False


def is_finite_formula(f: FunctionModel) -> bool:
    """Whether the formula of ``f`` stays finite at the origin: no division,
    negative power or call, so only ``z``, ``conj(z)``, ``abs(z)``,
    constants, sums, products and powers appear."""
    def walk(node):
        if isinstance(node, (Var, ConjVar, Abs, Const)):
            return True
        if isinstance(node, (Add, Sub, Mul)):
            return walk(node.left) and walk(node.right)
        if isinstance(node, IntPow):
            return node.exponent >= 0 and walk(node.base)
        return False
    return walk(f.root)


def _make_model(root, registry, var="z", **extra) -> FunctionModel:
    kind, P, Q, g = "general", None, None, None
    if isinstance(root, Div) and is_polynomial(root.left) \
            and is_polynomial(root.right):
        kind, P, Q = "rational", root.left, root.right
    elif isinstance(root, Call) and isinstance(root.argument, Div) \
            and isinstance(root.argument.left, Var):
        if isinstance(root.argument.right, ConjVar):
            kind, g = "line_constant", root.name
        elif isinstance(root.argument.right, Abs):
            kind, g = "ray_constant", root.name
    return FunctionModel(root=root, kind=kind, registry=registry, var=var,
                         P=P, Q=Q, g=g, **extra)


def parse(text: str, registry: Mapping[str, Registered] | None = None,
          var: str = "z", **extra) -> FunctionModel:
    """Parse ``text`` into a :class:`FunctionModel`.

    ``registry`` supplies functions callable by name in addition to those
    bound with ``let``.  Extra keyword arguments (``origin_value``,
    ``label``) are stored on the model.

    >>> parse("z^2/conj(z)").kind
    'rational'
    >>> parse("let g(w)=w^2 in g(z/conj(z))").kind
    'line_constant'
    """
    model = _Parser(text, registry or {}).program(var)
    if extra:
        model = _make_model(model.root, model.registry, var=var, **extra)
    return model


# ----------------------------------------------------------------- evaluate

def _eval(node, z, w, registry):
    if isinstance(node, Var):
        return z
    if isinstance(node, ConjVar):
        return np.conj(z) if w is None else w
    if isinstance(node, Abs):
        return np.abs(z)
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Add):
        return _eval(node.left, z, w, registry) + _eval(node.right, z, w, registry)
    if isinstance(node, Sub):
        return _eval(node.left, z, w, registry) - _eval(node.right, z, w, registry)
    if isinstance(node, Mul):
        return _eval(node.left, z, w, registry) * _eval(node.right, z, w, registry)
    if isinstance(node, Div):
        num = _eval(node.left, z, w, registry)
        den = _eval(node.right, z, w, registry)
        _check_denominator(den)
        return num / den
    if isinstance(node, IntPow):
        base = _eval(node.base, z, w, registry)
        if node.exponent < 0:
            _check_denominator(base)
            return 1.0 / _ipow(base, -node.exponent)
        return _ipow(base, node.exponent)
    if isinstance(node, Call):
        target = registry[node.name]
        arg = _eval(node.argument, z, w, registry)
        return target._apply(np.asarray(arg, dtype=complex))
    raise TypeError(f"not an expression node: {node!r}")


def _ipow(base, n):
    # repeated squaring keeps integer powers exact for small n
    result = np.ones_like(np.asarray(base, dtype=complex))
    acc = np.asarray(base, dtype=complex)
    while n:
        if n & 1:
            result = result * acc
        n >>= 1
        if n:
            acc = acc * acc
    return result


def _check_denominator(den):
    if np.any(np.abs(den) < DIVISION_THRESHOLD):
        raise EvaluationError("division by zero (denominator modulus below "
                              f"{DIVISION_THRESHOLD:g})")


def evaluate(f: FunctionModel, z):
    """Evaluate ``f`` at a point or an array of points.

    ``z = 0`` is an error unless the model declares ``origin_value``.
    """
    zs = np.asarray(z, dtype=complex)
    at_origin = zs == 0
    if np.any(at_origin):
        if f.origin_value is None:
            raise EvaluationError("function is defined on C\\{0}; "
                                  "cannot evaluate at z = 0")
        safe = np.where(at_origin, 1.0, zs)
        out = np.asarray(_eval(f.root, safe, None, f.registry), dtype=complex)
        out = np.where(at_origin, f.origin_value, np.broadcast_to(out, zs.shape))
    else:
        out = np.asarray(_eval(f.root, zs, None, f.registry), dtype=complex)
        out = np.broadcast_to(out, zs.shape).copy()
    return complex(out) if out.ndim == 0 else out


def _magnitude(node, z, registry):
    """Upper bound on the moduli of the terms summed while evaluating."""
    if isinstance(node, (Var, ConjVar, Abs)):
        return np.abs(z)
    if isinstance(node, Const):
        return abs(node.value)
    if isinstance(node, (Add, Sub)):
        return _magnitude(node.left, z, registry) + _magnitude(node.right, z, registry)
    if isinstance(node, Mul):
        return _magnitude(node.left, z, registry) * _magnitude(node.right, z, registry)
    if isinstance(node, Div):
        return _magnitude(node.left, z, registry) / np.abs(
            _eval(node.right, z, None, registry))
    if isinstance(node, IntPow):
        if node.exponent < 0:
            return np.abs(_eval(node, z, None, registry))
        return _magnitude(node.base, z, registry) ** node.exponent
    return np.abs(_eval(node, z, None, registry))


def magnitude_scale(f: FunctionModel, z) -> np.ndarray:
    """Per-point bound on the size of intermediate terms of ``f``.

    Rounding error in ``f(z)`` is a few ulps of this bound, which lets a
    caller tell an exactly cancelling expression from a small one.
    """
    zs = np.asarray(z, dtype=complex)
    return np.broadcast_to(np.asarray(_magnitude(f.root, zs, f.registry),
                                      dtype=float), zs.shape)


def evaluate_zw(node: ExprNode, z, w, registry=None):
    """Evaluate ``node`` with ``conj(z)`` replaced by an independent ``w``."""
    out = _eval(node, np.asarray(z, dtype=complex), np.asarray(w, dtype=complex),
                registry or {})
    out = np.asarray(out, dtype=complex)
    return complex(out) if out.ndim == 0 else out


# ------------------------------------------------------------------ rational

_ONE = Const(1 + 0j)


def _is_one(node):
    return isinstance(node, Const) and node.value == 1


def _mul(a, b):
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return Mul(a, b)


def _fraction(node):
    if isinstance(node, (Var, ConjVar, Const)):
        return node, _ONE
    if isinstance(node, (Add, Sub)):
        p1, q1 = _fraction(node.left)
        p2, q2 = _fraction(node.right)
        if q1 == q2:
            return type(node)(p1, p2), q1
        return type(node)(_mul(p1, q2), _mul(p2, q1)), _mul(q1, q2)
    if isinstance(node, Mul):
        p1, q1 = _fraction(node.left)
        p2, q2 = _fraction(node.right)
        return _mul(p1, p2), _mul(q1, q2)
    if isinstance(node, Div):
        p1, q1 = _fraction(node.left)
        p2, q2 = _fraction(node.right)
        return _mul(p1, q2), _mul(q1, p2)
    if isinstance(node, IntPow):
        p, q = _fraction(node.base)
        n = node.exponent
        if n < 0:
            p, q, n = q, p, -n
        return (p if _is_one(p) else IntPow(p, n)), (q if _is_one(q) else IntPow(q, n))
    raise ExprError("abs() and function calls have no rational form")


def rational_parts(f: FunctionModel) -> tuple[ExprNode, ExprNode]:
    """Numerator and denominator of ``f`` as polynomials in ``z, conj(z)``.

    Declared ``P/Q`` models return their parts unchanged; any other model
    free of ``abs`` and calls is brought over a common denominator.
    """
    if f.kind == "rational":
        return f.P, f.Q
    return _fraction(f.root)


# ------------------------------------------------------------------ printing

def _const_text(c: complex) -> str:
    re_, im = c.real, c.imag
    for part in (re_, im):
        if not math.isfinite(part):
            raise ExprError(f"cannot print non-finite constant {c!r}")
    if im == 0 and math.copysign(1.0, im) > 0:
        return repr(re_) if re_ >= 0 and math.copysign(1.0, re_) > 0 \
            else f"({repr(re_)})"
    if re_ == 0 and math.copysign(1.0, re_) > 0:
        return f"{repr(im)}i" if im >= 0 and math.copysign(1.0, im) > 0 \
            else f"(0.0-{repr(-im)}i)"
    sign = "+" if math.copysign(1.0, im) > 0 else "-"
    return f"({repr(re_)}{sign}{repr(abs(im))}i)"


def node_to_text(node: ExprNode, var: str = "z") -> str:
    """Fully parenthesised text for ``node``; re-parses to the same tree."""
    if isinstance(node, Var):
        return var
    if isinstance(node, ConjVar):
        return f"conj({var})"
    if isinstance(node, Abs):
        return f"abs({var})"
    if isinstance(node, Const):
        return _const_text(node.value)
    if isinstance(node, _BINARY):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
        if isinstance(node, Sub) and isinstance(node.left, Const) \
                and node.left.value == 0 and not isinstance(node.right, Const):
            return f"(-{node_to_text(node.right, var)})"
        return f"({node_to_text(node.left, var)} {op} {node_to_text(node.right, var)})"
    if isinstance(node, IntPow):
        e = node.exponent
        exp_text = str(e) if e >= 0 else f"({e})"
        base = node_to_text(node.base, var)
        if isinstance(node.base, IntPow):
            base = f"({base})"
        return f"{base}^{exp_text}"
    if isinstance(node, Call):
        return f"{node.name}({node_to_text(node.argument, var)})"
    raise TypeError(f"not an expression node: {node!r}")


def to_text(f: FunctionModel) -> str:
    """Printable program for ``f``, including ``let`` bindings for parsed
    helper functions.  Native functions are referenced by name only."""
    lets = []
    for name, target in f.registry.items():
        if isinstance(target, FunctionModel):
            lets.append(f"let {name}({target.var})="
                        f"{node_to_text(target.root, target.var)} in ")
    return "".join(lets) + node_to_text(f.root, f.var)


# ------------------------------------------------------- scale invariance

def scale_invariance_check(f: FunctionModel, kind: str, samples: int = 1000,
                           seed: int = 0) -> float:
    """Largest ``|f(t z) - f(z)|`` over random ``z`` and scale factors ``t``.

    ``kind="line"`` draws real ``t`` of either sign, ``kind="ray"`` positive
    ``t`` only.
    """
    if kind not in ("line", "ray"):
        raise ValueError("kind must be 'line' or 'ray'")
    rng = np.random.default_rng(seed)
    z = 10.0 ** rng.uniform(-2, 2, samples) * np.exp(2j * np.pi * rng.random(samples))
    t = 10.0 ** rng.uniform(-1, 1, samples)
    if kind == "line":
        t = t * rng.choice([-1.0, 1.0], samples)
    return float(np.max(np.abs(evaluate(f, t * z) - evaluate(f, z)), initial=0.0))


# -------------------------------------------------------- definition files

_DEF_RE = re.compile(
    r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*(?:\(\s*(?P<var>[A-Za-z_][A-Za-z0-9_]*)\s*\))?\s*=(?P<body>.*)$")


def parse_definitions(text: str, registry: Mapping[str, Registered] | None = None
                      ) -> dict[str, FunctionModel]:
    """Parse ``name = expression`` lines; later lines may call earlier names.

    ``name(w) = expression`` declares a function of ``w`` instead of ``z``.
    Blank lines and ``#`` comments are ignored.
    """
    known: dict[str, Registered] = dict(registry or {})
    defs: dict[str, FunctionModel] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _DEF_RE.match(stripped)
        if m is None:
            raise ExprSyntaxError(f"line {lineno}: expected 'name = expression'",
                                  0, stripped)
        name = m.group("name")
        if name in _KEYWORDS:
            raise ExprSyntaxError(f"line {lineno}: {name!r} is reserved", 0, stripped)
        try:
            model = parse(m.group("body"), known, var=m.group("var") or "z")
        except ExprSyntaxError as exc:
            raise type(exc)(f"line {lineno}: {exc.args[0]}", exc.position) from None
        known[name] = model
        defs[name] = model
    return defs


def load_definitions(path, registry=None) -> dict[str, FunctionModel]:
    with open(path, encoding="utf-8") as fh:
        return parse_definitions(fh.read(), registry)
