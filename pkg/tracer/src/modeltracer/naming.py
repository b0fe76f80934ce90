"""Canonical type and function names for emitted records.

Type names follow the trace wire conventions: host integers become "Int",
floats "Float", lists "Vector{T}" (element type taken from the first
element).  Everything else keeps its qualified host name, with the entry
module rendered as "Main".  Function names get the same module treatment,
and operator-protocol methods are rendered as the operator they implement,
so a call through ``__mul__`` shows up as ``*``.
"""

from __future__ import annotations

OPERATOR_SYMBOLS = {
    "__add__": "+",
    "__radd__": "+",
    "__iadd__": "+",
    "__sub__": "-",
    "__rsub__": "-",
    "__mul__": "*",
    "__rmul__": "*",
    "__imul__": "*",
    "__truediv__": "/",
    "__rtruediv__": "/",
    "__floordiv__": "//",
    "__mod__": "%",
    "__pow__": "^",
    "__matmul__": "@",
    "__neg__": "-",
    "__eq__": "==",
    "__ne__": "!=",
    "__lt__": "<",
    "__le__": "<=",
    "__gt__": ">",
    "__ge__": ">=",
}

MAIN_MODULE = "__main__"


def normalize_module(module: str) -> str:
    return "Main" if module == MAIN_MODULE else module


def canonical_type_name(value) -> str:
    """Wire-format type name for a runtime value."""
    kind = type(value)
    if kind is int:
        return "Int"
    if kind is float:
        return "Float"
    if kind is list:
        if not value:
            return "Vector{Any}"
        return "Vector{" + canonical_type_name(value[0]) + "}"
    module = getattr(kind, "__module__", "")
    qualname = getattr(kind, "__qualname__", kind.__name__)
    if module in ("builtins", ""):
        return qualname
    return f"{normalize_module(module)}.{qualname}"


def canonical_function_name(module: str, code_name: str, class_name: str | None = None) -> str:
    """Qualified function name, with operator dunders rendered as symbols."""
    name = OPERATOR_SYMBOLS.get(code_name, code_name)
    parts = [normalize_module(module)] if module else []
    if class_name:
        parts.append(class_name)
    parts.append(name)
    return ".".join(parts)
