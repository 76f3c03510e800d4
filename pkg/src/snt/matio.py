"""Plain-text matrix files and JSON report serialization.

File format: the first non-comment line holds ``n`` (square) or ``n m``,
followed by the rows. ``#`` starts a comment. Entries may be decimal numbers
or arithmetic expressions over numbers, ``sqrt(...)``, ``+ - * /`` and
parentheses, e.g. ``1/sqrt(2)``.
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import SNTError


class MatrixFormatError(SNTError, ValueError):
    pass


_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}
_FUNCS = {"sqrt": math.sqrt}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise MatrixFormatError(f"unsupported expression element: {ast.dump(node)}")


def parse_value(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        pass
    try:
        return float(_eval(ast.parse(token, mode="eval")))
    except (SyntaxError, ZeroDivisionError, ValueError) as exc:
        raise MatrixFormatError(f"cannot parse entry {token!r}: {exc}") from exc


def _tokens(line: str) -> list[str]:
    """Split on whitespace outside parentheses, so ``sqrt( 2 )`` stays one entry."""
    out, depth, cur = [], 0, []
    for ch in line:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    header = lines[0].split()
    if len(header) not in (1, 2) or not all(re.fullmatch(r"\d+", h) for h in header):
        raise MatrixFormatError(f"bad header {lines[0]!r}; expected 'n' or 'n m'")
    n = int(header[0])
    m = int(header[1]) if len(header) == 2 else n
    rows = lines[1:]
    if len(rows) != n:
        raise MatrixFormatError(f"expected {n} rows, found {len(rows)}")
    out = np.empty((n, m))
    for i, row in enumerate(rows):
        toks = _tokens(row)
        if len(toks) != m:
            raise MatrixFormatError(f"row {i + 1} has {len(toks)} entries, expected {m}")
        out[i] = [parse_value(t) for t in toks]
    return out


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text(encoding="utf-8"))


def format_matrix(M, comment: str | None = None) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n, m = M.shape
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(str(n) if n == m else f"{n} {m}")
    for row in M:
        lines.append(" ".join(_num(x) for x in row))
    return "\n".join(lines) + "\n"


def write_matrix(path, M, comment: str | None = None) -> None:
    Path(path).write_text(format_matrix(M, comment), encoding="utf-8")


def _num(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"
    return "%.17g" % x


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def to_jsonable(obj):
    """Nested lists/dicts with numpy values turned into plain Python objects."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _encode(obj, indent: int | None, level: int) -> str:
    if isinstance(obj, float):
        return _num(obj)
    if obj is None or isinstance(obj, (bool, int, str)):
        return json.dumps(obj)
    if isinstance(obj, (dict, list)):
        if not obj:
            return "{}" if isinstance(obj, dict) else "[]"
        if isinstance(obj, dict):
            items = [f"{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
            open_, close = "{", "}"
        else:
            items = [_encode(v, indent, level + 1) for v in obj]
            open_, close = "[", "]"
        flat = all(not isinstance(v, (dict, list)) for v in (obj.values() if isinstance(obj, dict) else obj))
        if indent is None or (flat and isinstance(obj, list)):
            return open_ + ", ".join(items) + close
        pad = " " * (indent * (level + 1))
        return open_ + "\n" + ",\n".join(pad + it for it in items) + "\n" + " " * (indent * level) + close
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    """JSON with floats written at 17 significant digits (lossless for doubles)."""
    return _encode(to_jsonable(obj), indent, 0)
