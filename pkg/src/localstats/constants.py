"""Parse symbolic real constants such as ``cbrt(4)`` or ``sqrt(2)+1/2``.

Expressions are evaluated with 50 significant digits and rounded once to a
double, so ``sqrt(2)+1/2`` is the correctly rounded value rather than the
sum of two rounded terms.
"""

from __future__ import annotations

import ast

import mpmath

__all__ = ["parse_constant", "parse_vector"]

_FUNCS = {
    "sqrt": mpmath.sqrt,
    "cbrt": mpmath.cbrt,
    "log": mpmath.log,
    "exp": mpmath.exp,
}


def _names():
    return {"pi": mpmath.pi, "e": mpmath.e, "golden": (1 + mpmath.sqrt(5)) / 2, "phi": (1 + mpmath.sqrt(5)) / 2}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return mpmath.mpf(str(node.value)) if isinstance(node.value, float) else mpmath.mpf(node.value)
    if isinstance(node, ast.Name):
        names = _names()
        if node.id in names:
            return names[node.id]
        raise ValueError(f"unknown constant {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left), _eval(node.right)
        ops = {ast.Add: lambda: a + b, ast.Sub: lambda: a - b, ast.Mult: lambda: a * b,
               ast.Div: lambda: a / b, ast.Pow: lambda: a ** b}
        for kind, fn in ops.items():
            if isinstance(node.op, kind):
                return fn()
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id} takes exactly one argument")
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError(f"unsupported syntax in constant: {ast.dump(node)}")


def parse_constant(text: str, as_mpf: bool = False):
    """Evaluate a constant expression; returns a float unless ``as_mpf``."""
    text = text.strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse constant {text!r}") from exc
    with mpmath.workdps(50):
        value = _eval(tree)
        return +value if as_mpf else float(value)


def parse_vector(text: str) -> tuple[float, ...]:
    """Comma-separated constants; commas inside parentheses are not separators."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += (ch == "(") - (ch == ")")
        cur.append(ch)
    parts.append("".join(cur))
    return tuple(parse_constant(p) for p in parts)
