"""A small closed algebra of function descriptors for the hodograph data.

Descriptors are expression trees over named variables, rich enough to
express every closed-form family used by the solvers (constants, linear
combinations, products, powers, log/sqrt/exp compositions, trigonometric
phases) while staying JSON-serializable for CLI configs.  They evaluate on
scalars or numpy arrays and differentiate symbolically with respect to a
named variable, which the blow-up conditions need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Add", "Mul", "Pow",
    "Log", "Exp", "Sin", "Cos", "Sqrt",
    "const", "var", "from_json",
]

Number = Union[int, float]


def _wrap(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    return Const(float(x))


class Expr:
    """Base expression node; supports +, -, *, /, ** with autowrapping."""

    def __call__(self, **env):
        return self.eval(env)

    def eval(self, env):  # pragma: no cover - abstract
        raise NotImplementedError

    def diff(self, name: str) -> "Expr":  # pragma: no cover - abstract
        raise NotImplementedError

    def to_json(self):  # pragma: no cover - abstract
        raise NotImplementedError

    def simplified(self) -> "Expr":
        return self

    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Add(self, Mul(Const(-1.0), _wrap(other)))

    def __rsub__(self, other):
        return Add(_wrap(other), Mul(Const(-1.0), self))

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Mul(self, Pow(_wrap(other), -1.0))

    def __rtruediv__(self, other):
        return Mul(_wrap(other), Pow(self, -1.0))

    def __pow__(self, p):
        return Pow(self, float(p))

    def __neg__(self):
        return Mul(Const(-1.0), self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def eval(self, env):
        return self.value

    def diff(self, name):
        return Const(0.0)

    def to_json(self):
        return {"op": "const", "value": self.value}


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise KeyError(f"descriptor variable '{self.name}' not bound") from None

    def diff(self, name):
        return Const(1.0 if name == self.name else 0.0)

    def to_json(self):
        return {"op": "var", "name": self.name}


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr

    def eval(self, env):
        return self.a.eval(env) + self.b.eval(env)

    def diff(self, name):
        return Add(self.a.diff(name), self.b.diff(name))

    def to_json(self):
        return {"op": "add", "args": [self.a.to_json(), self.b.to_json()]}


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr

    def eval(self, env):
        return self.a.eval(env) * self.b.eval(env)

    def diff(self, name):
        return Add(Mul(self.a.diff(name), self.b), Mul(self.a, self.b.diff(name)))

    def to_json(self):
        return {"op": "mul", "args": [self.a.to_json(), self.b.to_json()]}


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float

    def eval(self, env):
        return self.base.eval(env) ** self.exponent

    def diff(self, name):
        return Mul(
            Mul(Const(self.exponent), Pow(self.base, self.exponent - 1.0)),
            self.base.diff(name),
        )

    def to_json(self):
        return {"op": "pow", "base": self.base.to_json(), "exponent": self.exponent}


@dataclass(frozen=True)
class Log(Expr):
    arg: Expr

    def eval(self, env):
        return np.log(self.arg.eval(env))

    def diff(self, name):
        return Mul(Pow(self.arg, -1.0), self.arg.diff(name))

    def to_json(self):
        return {"op": "log", "arg": self.arg.to_json()}


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def eval(self, env):
        return np.exp(self.arg.eval(env))

    def diff(self, name):
        return Mul(Exp(self.arg), self.arg.diff(name))

    def to_json(self):
        return {"op": "exp", "arg": self.arg.to_json()}


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr

    def eval(self, env):
        return np.sin(self.arg.eval(env))

    def diff(self, name):
        return Mul(Cos(self.arg), self.arg.diff(name))

    def to_json(self):
        return {"op": "sin", "arg": self.arg.to_json()}


@dataclass(frozen=True)
class Cos(Expr):
    arg: Expr

    def eval(self, env):
        return np.cos(self.arg.eval(env))

    def diff(self, name):
        return Mul(Const(-1.0), Mul(Sin(self.arg), self.arg.diff(name)))

    def to_json(self):
        return {"op": "cos", "arg": self.arg.to_json()}


@dataclass(frozen=True)
class Sqrt(Expr):
    arg: Expr

    def eval(self, env):
        return np.sqrt(self.arg.eval(env))

    def diff(self, name):
        return Mul(Mul(Const(0.5), Pow(self.arg, -0.5)), self.arg.diff(name))

    def to_json(self):
        return {"op": "sqrt", "arg": self.arg.to_json()}


_OPS = {"log": Log, "exp": Exp, "sin": Sin, "cos": Cos, "sqrt": Sqrt}


def const(value: Number) -> Const:
    return Const(float(value))


def var(name: str) -> Var:
    return Var(name)


def from_json(obj) -> Expr:
    """Rebuild a descriptor from its JSON form."""
    op = obj["op"]
    if op == "const":
        return Const(float(obj["value"]))
    if op == "var":
        return Var(obj["name"])
    if op == "add":
        return Add(from_json(obj["args"][0]), from_json(obj["args"][1]))
    if op == "mul":
        return Mul(from_json(obj["args"][0]), from_json(obj["args"][1]))
    if op == "pow":
        return Pow(from_json(obj["base"]), float(obj["exponent"]))
    if op in _OPS:
        return _OPS[op](from_json(obj["arg"]))
    raise ValueError(f"unknown descriptor op '{op}'")
