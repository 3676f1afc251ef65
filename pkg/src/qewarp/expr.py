"""Small arithmetic-expression language for user-supplied profiles.

Accepted: numeric literals, the variable ``xi`` (or ``ξ``), + - * / and **,
unary minus, ``pow(a, b)``, ``exp(x)`` and ``log(x)``. Anything else is
rejected before evaluation. Derivatives are symbolic.
"""

from __future__ import annotations

import ast
import math
from typing import Optional

import numpy as np
import sympy as sp

from .errors import SpecError
from .geometry import Profile

XI = sp.Symbol("xi", real=True)
_NAMES = {"xi", "ξ"}
_FUNCS = {"exp": sp.exp, "log": sp.log}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


def _build(node: ast.AST) -> sp.Expr:
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return sp.Float(node.value) if isinstance(node.value, float) else sp.Integer(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return XI
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_build(node.left), _build(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name, args = node.func.id, node.args
        if name in _FUNCS and len(args) == 1:
            return _FUNCS[name](_build(args[0]))
        if name == "pow" and len(args) == 2:
            return _build(args[0]) ** _build(args[1])
    raise SpecError(f"unsupported construct in expression: {ast.dump(node)[:60]}")


def parse(text: str) -> sp.Expr:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"cannot parse expression {text!r}: {exc.msg}") from None
    return _build(tree)


def _vectorize(expr: sp.Expr):
    fn = sp.lambdify(XI, expr, modules="numpy")

    def call(x):
        arr = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(fn(arr), dtype=float), arr.shape).copy()

    return call


def expression_profile(
    text: str, name: str = "custom",
    domain: tuple[float, float] = (-math.inf, math.inf),
    window: Optional[tuple[float, float]] = None,
) -> Profile:
    expr = parse(text)
    d1 = sp.diff(expr, XI)
    return Profile(
        value=_vectorize(expr),
        d1=_vectorize(d1),
        d2=_vectorize(sp.diff(d1, XI)),
        domain=domain,
        name=name,
        window=window,
    )
