"""Deterministic pretty-printer. Output is valid source: parsing it back
yields a structurally identical program.

Parentheses are emitted only where precedence requires them, bodies of
control statements are always braced, and numbers use their shortest
round-trip decimal form, so equal trees print to identical bytes.
"""

from __future__ import annotations

import math

from .ast import (
    ArrayLit,
    Assign,
    AssignIndex,
    Binary,
    Block,
    BoolLit,
    Builtin,
    Call,
    CallAssign,
    Cast,
    DoWhile,
    DoubleLit,
    Expr,
    For,
    Foreach,
    If,
    Index,
    IntLit,
    Length,
    ListLit,
    MethodDef,
    OBJECT,
    Print,
    Program,
    Return,
    Stmt,
    Unary,
    Var,
    VarDecl,
    While,
)

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
}
_UNARY_PREC = 7
_POSTFIX_PREC = 8

INDENT = "    "


def fmt_double(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError("non-finite double has no literal form")
    return repr(v)


def fmt_expr(e: Expr, parent_prec: int = 0) -> str:
    text, prec = _expr(e)
    if prec < parent_prec:
        return f"({text})"
    return text


def _expr(e: Expr):
    if isinstance(e, IntLit):
        return str(e.value), _POSTFIX_PREC
    if isinstance(e, DoubleLit):
        return fmt_double(e.value), _POSTFIX_PREC
    if isinstance(e, BoolLit):
        return ("true" if e.value else "false"), _POSTFIX_PREC
    if isinstance(e, Var):
        return e.name, _POSTFIX_PREC
    if isinstance(e, Binary):
        p = _PREC[e.op]
        # left-associative: right operand needs strictly higher precedence
        return f"{fmt_expr(e.lhs, p)} {e.op} {fmt_expr(e.rhs, p + 1)}", p
    if isinstance(e, Unary):
        return f"{e.op}{fmt_expr(e.operand, _UNARY_PREC)}", _UNARY_PREC
    if isinstance(e, Cast):
        return f"({e.type}) {fmt_expr(e.expr, _UNARY_PREC)}", _UNARY_PREC
    if isinstance(e, Index):
        return f"{fmt_expr(e.base, _POSTFIX_PREC)}[{fmt_expr(e.index)}]", _POSTFIX_PREC
    if isinstance(e, Length):
        return f"length({fmt_expr(e.collection)})", _POSTFIX_PREC
    if isinstance(e, Builtin):
        args = ", ".join(fmt_expr(a) for a in e.args)
        return f"{e.name}({args})", _POSTFIX_PREC
    if isinstance(e, Call):
        args = ", ".join(fmt_expr(a) for a in e.args)
        return f"{e.method}({args})", _POSTFIX_PREC
    if isinstance(e, ArrayLit):
        elems = ", ".join(fmt_expr(x) for x in e.elements)
        ty = "Object" if e.elem_type == OBJECT else str(e.elem_type)
        return f"new {ty}[] {{{' ' + elems + ' ' if elems else ''}}}", _POSTFIX_PREC
    if isinstance(e, ListLit):
        elems = ", ".join(fmt_expr(x) for x in e.elements)
        return f"new List<{e.elem_type}> {{{' ' + elems + ' ' if elems else ''}}}", _POSTFIX_PREC
    raise TypeError(f"unknown expression: {e!r}")


def _simple_stmt(st: Stmt) -> str:
    """One-line statement text, without trailing semicolon or indentation.
    Only the forms that may appear in a for-header are supported here."""
    if isinstance(st, VarDecl):
        return f"{st.type} {st.name} = {fmt_expr(st.init)}"
    if isinstance(st, Assign):
        return f"{st.name} = {fmt_expr(st.value)}"
    if isinstance(st, CallAssign):
        args = ", ".join(fmt_expr(a) for a in st.args)
        call = f"{st.method}({args})"
        if st.target is None:
            return call
        if st.decl_type is not None:
            return f"{st.decl_type} {st.target} = {call}"
        return f"{st.target} = {call}"
    raise TypeError(f"not a header statement: {st!r}")


def _for_init(init: list) -> str:
    if not init:
        return ""
    if isinstance(init[0], VarDecl):
        ty = init[0].type
        decls = [f"{d.name} = {fmt_expr(d.init)}" for d in init]
        return f"{ty} " + ", ".join(decls)
    return ", ".join(_simple_stmt(s) for s in init)


def _stmt_lines(st: Stmt, depth: int, out: list) -> None:
    pad = INDENT * depth
    if isinstance(st, (VarDecl, Assign, CallAssign)):
        out.append(f"{pad}{_simple_stmt(st)};")
    elif isinstance(st, AssignIndex):
        out.append(f"{pad}{st.name}[{fmt_expr(st.index)}] = {fmt_expr(st.value)};")
    elif isinstance(st, If):
        out.append(f"{pad}if ({fmt_expr(st.cond)}) {{")
        _seq_lines(st.then, depth + 1, out)
        if st.orelse:
            out.append(f"{pad}}} else {{")
            _seq_lines(st.orelse, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(st, While):
        out.append(f"{pad}while ({fmt_expr(st.cond)}) {{")
        _seq_lines(st.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(st, DoWhile):
        out.append(f"{pad}do {{")
        _seq_lines(st.body, depth + 1, out)
        out.append(f"{pad}}} while ({fmt_expr(st.cond)});")
    elif isinstance(st, For):
        upd = ", ".join(_simple_stmt(s) for s in st.update)
        out.append(f"{pad}for ({_for_init(st.init)}; {fmt_expr(st.cond)}; {upd}) {{")
        _seq_lines(st.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(st, Foreach):
        out.append(
            f"{pad}for ({st.elem_type} {st.elem_name} : {fmt_expr(st.collection)}) {{"
        )
        _seq_lines(st.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(st, Block):
        out.append(f"{pad}{{")
        _seq_lines(st.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(st, Return):
        out.append(f"{pad}return {fmt_expr(st.value)};")
    elif isinstance(st, Print):
        out.append(f"{pad}print({fmt_expr(st.value)});")
    else:
        raise TypeError(f"unknown statement: {st!r}")


def _seq_lines(stmts: list, depth: int, out: list) -> None:
    for st in stmts:
        _stmt_lines(st, depth, out)


def fmt_method(m: MethodDef) -> str:
    params = ", ".join(f"{p.type} {p.name}" for p in m.params)
    header = f"{m.ret_type} {m.name}({params})"
    if not m.body and m.ret is None:
        return f"{header} {{ }}"
    lines = [f"{header} {{"]
    _seq_lines(m.body, 1, lines)
    if m.ret is not None:
        lines.append(f"{INDENT}return {fmt_expr(m.ret)};")
    lines.append("}")
    return "\n".join(lines)


def pretty_print(program: Program) -> str:
    return "\n\n".join(fmt_method(m) for m in program.methods) + "\n"
