from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from volumenes.errors import ExpressionSyntaxError, PoleError

Exponent = tuple[int, int, int]
VARS: tuple[str, str, str] = ("x", "y", "z")

# Coefficients below this fraction of the largest one are dropped on construction.
_ZERO_REL = 1e-14
_DIVIDE_REL = 1e-9
_POLE_TOL = 1e-12

Scalar = Union[int, float]


def _var_index(var: str) -> int:
    try:
        return VARS.index(var)
    except ValueError:
        raise ValueError(f"Variable desconocida: {var!r}") from None


def _grlex_key(e: Exponent) -> tuple[int, int, int, int]:
    return (e[0] + e[1] + e[2], e[0], e[1], e[2])


def _normalize(terms: Mapping[Exponent, float]) -> dict[Exponent, float]:
    clean = {tuple(int(v) for v in e): float(c) for e, c in terms.items() if c != 0.0}
    if not clean:
        return {}
    cutoff = _ZERO_REL * max(abs(c) for c in clean.values())
    return {e: c for e, c in clean.items() if abs(c) >= cutoff}


class Polynomial:
    """Polinomio disperso en x, y, z con coeficientes float.

    Inmutable: todas las operaciones devuelven instancias nuevas.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, float] | None = None):
        self._terms = _normalize(terms or {})
        self._hash: int | None = None

    @classmethod
    def constant(cls, c: Scalar) -> Polynomial:
        return cls({(0, 0, 0): float(c)})

    @classmethod
    def var(cls, name: str) -> Polynomial:
        e = [0, 0, 0]
        e[_var_index(name)] = 1
        return cls({tuple(e): 1.0})

    @classmethod
    def coerce(cls, value: Polynomial | Scalar) -> Polynomial:
        if isinstance(value, Polynomial):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            return cls.constant(float(value))
        raise TypeError(f"No se puede convertir {type(value).__name__} a Polynomial")

    @property
    def terms(self) -> dict[Exponent, float]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Exponent, float]]:
        return iter(sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(e == (0, 0, 0) for e in self._terms)

    def constant_value(self) -> float:
        return self._terms.get((0, 0, 0), 0.0)

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def leading(self) -> tuple[Exponent, float]:
        e = max(self._terms, key=_grlex_key)
        return e, self._terms[e]

    # arithmetic

    def __add__(self, other: Polynomial | Scalar) -> Polynomial:
        if isinstance(other, RationalFn):
            return NotImplemented
        o = Polynomial.coerce(other)
        out = dict(self._terms)
        for e, c in o._terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial({e: -c for e, c in self._terms.items()})

    def __sub__(self, other: Polynomial | Scalar) -> Polynomial:
        if isinstance(other, RationalFn):
            return NotImplemented
        return self + (-Polynomial.coerce(other))

    def __rsub__(self, other: Scalar) -> Polynomial:
        return Polynomial.coerce(other) - self

    def __mul__(self, other: Polynomial | Scalar) -> Polynomial:
        if isinstance(other, RationalFn):
            return NotImplemented
        if not isinstance(other, Polynomial):
            k = float(other)
            return Polynomial({e: c * k for e, c in self._terms.items()})
        out: dict[Exponent, float] = {}
        for (a1, b1, c1), k1 in self._terms.items():
            for (a2, b2, c2), k2 in other._terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                out[e] = out.get(e, 0.0) + k1 * k2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        if not isinstance(n, int) or n < 0:
            raise ValueError("Solo exponentes enteros no negativos")
        result = Polynomial.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus

    def partial(self, var: str) -> Polynomial:
        i = _var_index(var)
        out: dict[Exponent, float] = {}
        for e, c in self._terms.items():
            if e[i] == 0:
                continue
            ne = list(e)
            ne[i] -= 1
            out[tuple(ne)] = out.get(tuple(ne), 0.0) + c * e[i]
        return Polynomial(out)

    def scale_vars(self, sx: float, sy: float, sz: float) -> Polynomial:
        """p(sx*x, sy*y, sz*z), exacto salvo redondeo de las potencias."""
        return Polynomial({e: c * sx ** e[0] * sy ** e[1] * sz ** e[2] for e, c in self._terms.items()})

    def restrict_z_axis(self) -> Polynomial:
        """p(0, 0, z)."""
        return Polynomial({e: c for e, c in self._terms.items() if e[0] == 0 and e[1] == 0})

    def homogeneous_part(self, degree: int, variables: str = "xyz") -> Polynomial:
        idx = [_var_index(v) for v in variables]
        return Polynomial({e: c for e, c in self._terms.items() if sum(e[i] for i in idx) == degree})

    def exact_divide(self, divisor: Polynomial) -> Polynomial | None:
        """Cociente exacto por ``divisor`` o None si no divide.

        División por término líder en orden grlex; los restos por debajo de
        _DIVIDE_REL veces la escala del dividendo cuentan como cero.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("División por el polinomio cero")
        if self.is_zero():
            return Polynomial()
        scale = self.max_abs_coefficient()
        tol = _DIVIDE_REL * scale
        lead_e, lead_c = divisor.leading()
        rest: dict[Exponent, float] = dict(self._terms)
        quotient: dict[Exponent, float] = {}
        while True:
            rest = {e: c for e, c in rest.items() if abs(c) > tol}
            if not rest:
                return Polynomial(quotient)
            e = max(rest, key=_grlex_key)
            if any(e[i] < lead_e[i] for i in range(3)):
                return None
            q_e = (e[0] - lead_e[0], e[1] - lead_e[1], e[2] - lead_e[2])
            q_c = rest[e] / lead_c
            quotient[q_e] = quotient.get(q_e, 0.0) + q_c
            for (a, b, c), k in divisor._terms.items():
                te = (a + q_e[0], b + q_e[1], c + q_e[2])
                rest[te] = rest.get(te, 0.0) - q_c * k
            rest.pop(e, None)

    # evaluation

    def __call__(self, x, y, z):
        return self.evaluate(x, y, z)

    def evaluate(self, x, y, z):
        if not self._terms:
            return 0.0 * (np.asarray(x, dtype=float) + np.asarray(y, dtype=float) + np.asarray(z, dtype=float))
        total = 0.0
        for (i, j, k), c in self._terms.items():
            total = total + c * (x**i) * (y**j) * (z**k)
        return total

    def at(self, pt: Sequence[float]) -> float:
        return float(self.evaluate(*pt))

    # printing

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Polynomial({format_poly(self)!r})"


def _format_coefficient(c: float) -> str:
    if float(c).is_integer() and abs(c) < 1e15:
        return str(int(c))
    return repr(float(c))


def format_poly(p: Polynomial) -> str:
    """Texto canónico en la misma gramática que parse_poly (orden grlex descendente)."""
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for e, c in p.items():
        factors = []
        for name, power in zip(VARS, e):
            if power == 1:
                factors.append(name)
            elif power > 1:
                factors.append(f"{name}^{power}")
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1.0 else f"{_format_coefficient(mag)}*" + "*".join(factors)
        else:
            body = _format_coefficient(mag)
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


X = Polynomial.var("x")
Y = Polynomial.var("y")
Z = Polynomial.var("z")
ONE = Polynomial.constant(1.0)
ZERO = Polynomial()


# --- parser -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionSyntaxError(f"Carácter inesperado {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup) if m.lastgroup else pos
        kind = m.lastgroup or "op"
        value = m.group(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append(_Token(kind, value, start))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    # expr   := term (('+'|'-') term)*
    # term   := unary ('*' unary)*
    # unary  := ('-'|'+') unary | power
    # power  := atom ('^' INT)?
    # atom   := NUMBER | x | y | z | '(' expr ')'

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ExpressionSyntaxError:
        tok = tok or self.peek()
        return ExpressionSyntaxError(message, tok.pos, self.text)

    def parse(self) -> Polynomial:
        if self.peek().kind == "end":
            raise self.error("Expresión vacía")
        p = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"Símbolo inesperado {self.peek().text!r}")
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> Polynomial:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.take()
            p = self.unary()
            return -p if tok.text == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                if tok.text == "-":
                    raise self.error("Exponente negativo no permitido", tok)
                self.take()
                tok = self.peek()
            if tok.kind != "number":
                raise self.error("Se esperaba un exponente entero", tok)
            self.take()
            if not re.fullmatch(r"\d+", tok.text):
                raise self.error(f"Exponente no entero {tok.text!r}", tok)
            if self.peek().kind == "op" and self.peek().text == "^":
                raise self.error("Potencias encadenadas ambiguas; use paréntesis")
            return base ** int(tok.text)
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        if tok.kind == "number":
            return Polynomial.constant(float(tok.text))
        if tok.kind == "name":
            if tok.text not in VARS:
                raise self.error(f"Variable desconocida {tok.text!r}", tok)
            return Polynomial.var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            p = self.expr()
            close = self.peek()
            if not (close.kind == "op" and close.text == ")"):
                raise self.error("Falta ')'", close)
            self.take()
            return p
        if tok.kind == "end":
            raise self.error("Fin de expresión inesperado", tok)
        raise self.error(f"Símbolo inesperado {tok.text!r}", tok)


def parse_poly(text: str) -> Polynomial:
    return _Parser(str(text)).parse()


def partial(p: Polynomial, var: str) -> Polynomial:
    return p.partial(var)


# --- rational functions -------------------------------------------------------


def _monic(p: Polynomial) -> tuple[Polynomial, float]:
    _, lead = p.leading()
    return p * (1.0 / lead), lead


class RationalFn:
    """Cociente numerador / producto de factores polinomiales.

    El denominador se guarda factorizado (factor mónico -> potencia). No hay MCD:
    solo se cancelan factores que ya están en el denominador y dividen
    exactamente al numerador.
    """

    __slots__ = ("numerator", "_factors")

    def __init__(
        self,
        numerator: Polynomial | Scalar,
        denominator: Polynomial | Scalar | Mapping[Polynomial, int] | None = None,
    ):
        num = Polynomial.coerce(numerator)
        factors: dict[Polynomial, int] = {}
        if denominator is None:
            pass
        elif isinstance(denominator, Mapping):
            for f, k in denominator.items():
                num, factors = _absorb(num, factors, Polynomial.coerce(f), int(k))
        else:
            num, factors = _absorb(num, factors, Polynomial.coerce(denominator), 1)
        self.numerator, self._factors = _cancel(num, factors)

    @classmethod
    def coerce(cls, value: RationalFn | Polynomial | Scalar) -> RationalFn:
        if isinstance(value, RationalFn):
            return value
        return cls(value)

    @property
    def factors(self) -> dict[Polynomial, int]:
        return dict(self._factors)

    @property
    def denominator(self) -> Polynomial:
        out = ONE
        for f, k in self._factors.items():
            out = out * f**k
        return out

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def is_polynomial(self) -> bool:
        return not self._factors

    def _combine(self, other: RationalFn, sign: float) -> RationalFn:
        common = dict(self._factors)
        for f, k in other._factors.items():
            common[f] = max(common.get(f, 0), k)
        n1 = self.numerator
        for f, k in common.items():
            missing = k - self._factors.get(f, 0)
            if missing:
                n1 = n1 * f**missing
        n2 = other.numerator
        for f, k in common.items():
            missing = k - other._factors.get(f, 0)
            if missing:
                n2 = n2 * f**missing
        return RationalFn(n1 + n2 * sign, common)

    def __add__(self, other) -> RationalFn:
        return self._combine(RationalFn.coerce(other), 1.0)

    __radd__ = __add__

    def __sub__(self, other) -> RationalFn:
        return self._combine(RationalFn.coerce(other), -1.0)

    def __rsub__(self, other) -> RationalFn:
        return RationalFn.coerce(other)._combine(self, -1.0)

    def __neg__(self) -> RationalFn:
        return RationalFn(-self.numerator, self._factors)

    def __mul__(self, other) -> RationalFn:
        o = RationalFn.coerce(other)
        merged = dict(self._factors)
        for f, k in o._factors.items():
            merged[f] = merged.get(f, 0) + k
        return RationalFn(self.numerator * o.numerator, merged)

    __rmul__ = __mul__

    def reciprocal(self) -> RationalFn:
        if self.numerator.is_zero():
            raise ZeroDivisionError("Recíproco de la función cero")
        return RationalFn(self.denominator, self.numerator)

    def __truediv__(self, other) -> RationalFn:
        return self * RationalFn.coerce(other).reciprocal()

    def __rtruediv__(self, other) -> RationalFn:
        return RationalFn.coerce(other) * self.reciprocal()

    def partial(self, var: str) -> RationalFn:
        """Regla del cociente sobre el denominador factorizado."""
        if not self._factors:
            return RationalFn(self.numerator.partial(var))
        fs = list(self._factors.items())
        prod_all = ONE
        for f, _ in fs:
            prod_all = prod_all * f
        num = self.numerator.partial(var) * prod_all
        for j, (fj, kj) in enumerate(fs):
            others = ONE
            for i, (fi, _) in enumerate(fs):
                if i != j:
                    others = others * fi
            num = num - self.numerator * fj.partial(var) * others * float(kj)
        return RationalFn(num, {f: k + 1 for f, k in fs})

    def scale_vars(self, sx: float, sy: float, sz: float) -> RationalFn:
        return RationalFn(
            self.numerator.scale_vars(sx, sy, sz),
            {f.scale_vars(sx, sy, sz): k for f, k in self._factors.items()},
        )

    def evaluate(self, x, y, z):
        num = self.numerator.evaluate(x, y, z)
        if not self._factors:
            return num
        den = 1.0
        for f, k in self._factors.items():
            val = f.evaluate(x, y, z)
            if np.any(np.abs(val) < _POLE_TOL):
                raise PoleError(f"Denominador nulo: {f} se anula en el punto")
            den = den * val**k
        return num / den

    def __call__(self, x, y, z):
        return self.evaluate(x, y, z)

    def at(self, pt: Sequence[float]) -> float:
        return float(self.evaluate(*pt))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (Polynomial, int, float)):
            other = RationalFn(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self.numerator == other.numerator and self._factors == other._factors

    def __hash__(self) -> int:
        return hash((self.numerator, frozenset(self._factors.items())))

    def __str__(self) -> str:
        if not self._factors:
            return str(self.numerator)
        den = " * ".join(f"({f})^{k}" if k > 1 else f"({f})" for f, k in self._factors.items())
        return f"({self.numerator}) / {den}"

    def __repr__(self) -> str:
        return f"RationalFn({self})"


def _absorb(
    num: Polynomial, factors: dict[Polynomial, int], f: Polynomial, k: int
) -> tuple[Polynomial, dict[Polynomial, int]]:
    if k == 0:
        return num, factors
    if f.is_zero():
        raise ZeroDivisionError("Denominador cero")
    if f.is_constant():
        return num * (1.0 / f.constant_value() ** k), factors
    mf, lead = _monic(f)
    out = dict(factors)
    out[mf] = out.get(mf, 0) + k
    return num * (1.0 / lead**k), out


def _cancel(num: Polynomial, factors: dict[Polynomial, int]) -> tuple[Polynomial, dict[Polynomial, int]]:
    if num.is_zero():
        return num, {}
    out: dict[Polynomial, int] = {}
    for f, k in factors.items():
        while k > 0:
            q = num.exact_divide(f)
            if q is None:
                break
            num = q
            k -= 1
        if k > 0:
            out[f] = k
    return num, out


def partial_rational(r: RationalFn, var: str) -> RationalFn:
    return r.partial(var)


# --- vector fields ------------------------------------------------------------

FieldComponent = Union[RationalFn, Polynomial, Scalar]


class RationalField3:
    """Campo vectorial en R^3: coeficientes de ∂x, ∂y, ∂z."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[FieldComponent]):
        comps = tuple(RationalFn.coerce(c) for c in components)
        if len(comps) != 3:
            raise ValueError("Un campo en R^3 necesita 3 componentes")
        self.components: tuple[RationalFn, RationalFn, RationalFn] = comps  # type: ignore[assignment]

    @classmethod
    def coordinate(cls, var: str) -> RationalField3:
        comps: list[FieldComponent] = [0.0, 0.0, 0.0]
        comps[_var_index(var)] = 1.0
        return cls(comps)

    @classmethod
    def parse(cls, texts: Sequence[str]) -> RationalField3:
        return cls(parse_poly(t) for t in texts)

    def __getitem__(self, i: int) -> RationalFn:
        return self.components[i]

    def __iter__(self) -> Iterator[RationalFn]:
        return iter(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __add__(self, other: RationalField3) -> RationalField3:
        return RationalField3(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other: RationalField3) -> RationalField3:
        return RationalField3(a - b for a, b in zip(self.components, other.components))

    def __neg__(self) -> RationalField3:
        return RationalField3(-a for a in self.components)

    def scale(self, f: FieldComponent) -> RationalField3:
        g = RationalFn.coerce(f)
        return RationalField3(g * a for a in self.components)

    def apply(self, f: FieldComponent) -> RationalFn:
        """Derivada direccional V(f) = Σ V^j ∂_j f."""
        g = RationalFn.coerce(f)
        out = RationalFn(0.0)
        for comp, var in zip(self.components, VARS):
            if comp.is_zero():
                continue
            out = out + comp * g.partial(var)
        return out

    def evaluate(self, x, y, z) -> np.ndarray:
        return np.array([np.broadcast_to(c.evaluate(x, y, z), np.shape(x)) for c in self.components], dtype=float)

    def at(self, pt: Sequence[float]) -> np.ndarray:
        return np.array([c.at(pt) for c in self.components], dtype=float)

    def polynomials(self) -> list[Polynomial]:
        return [c.numerator for c in self.components]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalField3):
            return NotImplemented
        return self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __repr__(self) -> str:
        return "RationalField3(" + ", ".join(str(c) for c in self.components) + ")"


def lie_bracket(V: RationalField3, W: RationalField3) -> RationalField3:
    """[V, W]^k = Σ_j V^j ∂_j W^k − W^j ∂_j V^k."""
    return RationalField3(V.apply(W[k]) - W.apply(V[k]) for k in range(3))


# --- vectorised evaluation ----------------------------------------------------


class PolyBundle:
    """Evalúa muchos polinomios en muchos puntos con una sola tabla de monomios."""

    def __init__(self, polys: Sequence[Polynomial]):
        self.polys = list(polys)
        monomials = sorted({e for p in self.polys for e in p.terms}, key=_grlex_key)
        self._monomials = monomials
        index = {e: i for i, e in enumerate(monomials)}
        self._coeffs = np.zeros((len(self.polys), len(monomials)))
        for row, p in enumerate(self.polys):
            for e, c in p.terms.items():
                self._coeffs[row, index[e]] = c
        self._max = [max((e[i] for e in monomials), default=0) for i in range(3)]

    def evaluate(self, x, y, z) -> np.ndarray:
        x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
        shape = x.shape
        if not self._monomials:
            return np.zeros((len(self.polys),) + shape)
        flat = [x.ravel(), y.ravel(), z.ravel()]
        powers = []
        for v, top in zip(flat, self._max):
            table = [np.ones_like(v)]
            for _ in range(top):
                table.append(table[-1] * v)
            powers.append(table)
        mono = np.empty((len(self._monomials), flat[0].size))
        for row, (i, j, k) in enumerate(self._monomials):
            mono[row] = powers[0][i] * powers[1][j] * powers[2][k]
        return (self._coeffs @ mono).reshape((len(self.polys),) + shape)


class RationalBundle:
    """Igual que PolyBundle para funciones racionales con factores compartidos."""

    def __init__(self, rationals: Sequence[RationalFn]):
        self.rationals = [RationalFn.coerce(r) for r in rationals]
        factors: list[Polynomial] = []
        for r in self.rationals:
            for f in r.factors:
                if f not in factors:
                    factors.append(f)
        self._factors = factors
        self._powers = np.array(
            [[r.factors.get(f, 0) for f in factors] for r in self.rationals], dtype=int
        ).reshape(len(self.rationals), len(factors))
        self._bundle = PolyBundle([r.numerator for r in self.rationals] + factors)

    def evaluate(self, x, y, z) -> np.ndarray:
        values = self._bundle.evaluate(x, y, z)
        n = len(self.rationals)
        nums = values[:n]
        if not self._factors:
            return nums
        dens = values[n:]
        if np.any(np.abs(dens) < _POLE_TOL):
            raise PoleError("Denominador nulo en la trayectoria")
        out = nums.copy()
        for j in range(len(self._factors)):
            for i in range(n):
                k = self._powers[i, j]
                if k:
                    out[i] = out[i] / dens[j] ** k
        return out
