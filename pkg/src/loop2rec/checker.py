"""Static checks run after parsing: declare-before-use, a shadowing ban, and
full type consistency of expressions, arguments and returns.

Shadowing an in-scope name is rejected outright. Together with fresh-name
generation this makes the loop rewriter's scope blocks provably clash-free
instead of merely unlikely to clash. Sibling blocks may reuse a name once the
earlier one is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ast import (
    ArrayLit,
    Assign,
    AssignIndex,
    BOOL,
    Binary,
    Block,
    BoolLit,
    Builtin,
    Call,
    CallAssign,
    Cast,
    DOUBLE,
    DoWhile,
    DoubleLit,
    Expr,
    For,
    Foreach,
    INT,
    If,
    Index,
    IntLit,
    Length,
    ListLit,
    Loc,
    MethodDef,
    OBJECT,
    OBJECT_ARRAY,
    Print,
    Program,
    Return,
    Type,
    Unary,
    VOID,
    Var,
    VarDecl,
    While,
    is_numeric,
)


@dataclass
class SemanticError:
    loc: Optional[Loc]
    message: str

    def __str__(self) -> str:
        where = str(self.loc) if self.loc else "?:?"
        return f"{where}: {self.message}"


_CMP_OPS = ("<", "<=", ">", ">=")
_EQ_OPS = ("==", "!=")
_ARITH_OPS = ("+", "-", "*", "/")
_BOOL_OPS = ("&&", "||")


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.methods = {m.name: m for m in program.methods}
        self.errors: list = []
        self.scopes: list = []

    def error(self, loc, message: str) -> None:
        self.errors.append(SemanticError(loc, message))

    # ------------------------------------------------------------ scopes

    def lookup(self, name: str) -> Optional[Type]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def declare(self, loc, name: str, ty: Type) -> None:
        if self.lookup(name) is not None:
            self.error(loc, f"'{name}' shadows a variable already in scope")
            return
        self.scopes[-1][name] = ty

    # ------------------------------------------------------------ driver

    def check(self) -> list:
        for m in self.program.methods:
            self.check_method(m)
        entry = self.methods.get(self.program.entry)
        if entry is not None and entry.params:
            self.error(entry.loc, f"entry method '{entry.name}' must take no parameters")
        return self.errors

    def check_method(self, m: MethodDef) -> None:
        self.current = m
        self.scopes = [{}]
        for p in m.params:
            self.declare(m.loc, p.name, p.type)
        # the trailing return shares the body's scope
        self.scopes.append({})
        for st in m.body:
            self.check_stmt(st)
        if m.ret is not None:
            self.check_return(m.ret, m.loc)
        elif m.ret_type != VOID and not self._body_ends_returning(m.body):
            self.error(m.loc, f"method '{m.name}' must end with a return of type {m.ret_type}")
        self.scopes = []

    @staticmethod
    def _body_ends_returning(body: list) -> bool:
        return bool(body) and isinstance(body[-1], Return)

    def check_return(self, value: Expr, loc) -> None:
        want = self.current.ret_type
        if isinstance(value, Call):
            got = self.check_call(value.method, value.args, loc)
        else:
            got = self.expr_type(value, loc)
            if got == VOID:
                got = None
        if want == VOID:
            if not (isinstance(value, Call) and got == VOID):
                self.error(loc, f"method '{self.current.name}' is void and cannot return a value")
        elif got is not None and got != want:
            self.error(loc, f"return type mismatch: expected {want}, got {got}")

    # ------------------------------------------------------------ statements

    def check_seq(self, stmts: list) -> None:
        self.scopes.append({})
        for st in stmts:
            self.check_stmt(st)
        self.scopes.pop()

    def check_stmt(self, st) -> None:
        if isinstance(st, VarDecl):
            got = self.expr_type(st.init, st.loc)
            if got is not None and got != st.type:
                self.error(st.loc, f"cannot initialize {st.type} '{st.name}' from {got}")
            self.declare(st.loc, st.name, st.type)
        elif isinstance(st, Assign):
            want = self.lookup(st.name)
            if want is None:
                self.error(st.loc, f"assignment to undeclared variable '{st.name}'")
            got = self.expr_type(st.value, st.loc)
            if want is not None and got is not None and got != want:
                self.error(st.loc, f"cannot assign {got} to {want} '{st.name}'")
        elif isinstance(st, AssignIndex):
            base = self.lookup(st.name)
            if base is None:
                self.error(st.loc, f"assignment to undeclared variable '{st.name}'")
            elif base.kind != "array":
                self.error(st.loc, f"'{st.name}' is {base}, not an indexable array")
            idx = self.expr_type(st.index, st.loc)
            if idx is not None and idx != INT:
                self.error(st.loc, f"array index must be int, got {idx}")
            got = self.expr_type(st.value, st.loc)
            if base is not None and base.kind == "array" and got is not None and got != base.elem:
                self.error(st.loc, f"cannot store {got} into {base}")
        elif isinstance(st, CallAssign):
            got = self.check_call(st.method, st.args, st.loc)
            if st.decl_type is not None:
                if got is not None and got != st.decl_type:
                    self.error(st.loc, f"cannot initialize {st.decl_type} '{st.target}' from {got}")
                self.declare(st.loc, st.target, st.decl_type)
            elif st.target is not None:
                want = self.lookup(st.target)
                if want is None:
                    self.error(st.loc, f"assignment to undeclared variable '{st.target}'")
                elif got is not None and got != want:
                    self.error(st.loc, f"cannot assign {got} to {want} '{st.target}'")
                if got == VOID:
                    self.error(st.loc, f"method '{st.method}' is void and returns no value")
        elif isinstance(st, If):
            self.check_cond(st.cond, st.loc)
            self.check_seq(st.then)
            if st.orelse is not None:
                self.check_seq(st.orelse)
        elif isinstance(st, While):
            self.check_cond(st.cond, st.loc)
            self.check_seq(st.body)
        elif isinstance(st, DoWhile):
            self.check_seq(st.body)
            self.check_cond(st.cond, st.loc)
        elif isinstance(st, For):
            self.scopes.append({})
            for s in st.init:
                self.check_stmt(s)
            self.check_cond(st.cond, st.loc)
            self.check_seq(st.body)
            for s in st.update:
                self.check_stmt(s)
            self.scopes.pop()
        elif isinstance(st, Foreach):
            ct = self.expr_type(st.collection, st.loc)
            if ct is not None:
                if ct.kind not in ("array", "list"):
                    self.error(st.loc, f"foreach needs an array or list, got {ct}")
                elif ct.elem != st.elem_type:
                    self.error(st.loc,
                               f"foreach element type {st.elem_type} does not match {ct}")
            self.scopes.append({})
            self.declare(st.loc, st.elem_name, st.elem_type)
            self.check_seq(st.body)
            self.scopes.pop()
        elif isinstance(st, Block):
            self.check_seq(st.body)
        elif isinstance(st, Return):
            self.check_return(st.value, st.loc)
        elif isinstance(st, Print):
            got = self.expr_type(st.value, st.loc)
            if got == VOID:
                self.error(st.loc, "cannot print a void value")
        else:
            raise TypeError(f"unknown statement: {st!r}")

    def check_cond(self, cond: Expr, loc) -> None:
        got = self.expr_type(cond, loc)
        if got is not None and got != BOOL:
            self.error(loc, f"condition must be bool, got {got}")

    def check_call(self, name: str, args: list, loc) -> Optional[Type]:
        m = self.methods.get(name)
        if m is None:
            self.error(loc, f"call to undefined method '{name}'")
            return None
        if len(args) != len(m.params):
            self.error(loc, f"'{name}' expects {len(m.params)} arguments, got {len(args)}")
        for a, p in zip(args, m.params):
            got = self.expr_type(a, loc)
            if got is not None and got != p.type:
                self.error(loc, f"argument '{p.name}' of '{name}' expects {p.type}, got {got}")
        return m.ret_type

    # ------------------------------------------------------------ expressions

    def expr_type(self, e: Expr, loc) -> Optional[Type]:
        """Type of an expression, or None after reporting an error."""
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, DoubleLit):
            return DOUBLE
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, Var):
            ty = self.lookup(e.name)
            if ty is None:
                self.error(loc, f"use of undeclared variable '{e.name}'")
            return ty
        if isinstance(e, Binary):
            lt = self.expr_type(e.lhs, loc)
            rt = self.expr_type(e.rhs, loc)
            if lt is None or rt is None:
                return None
            if e.op in _ARITH_OPS:
                if not (is_numeric(lt) and is_numeric(rt)):
                    self.error(loc, f"operator '{e.op}' needs numeric operands, got {lt} and {rt}")
                    return None
                return DOUBLE if DOUBLE in (lt, rt) else INT
            if e.op in _CMP_OPS:
                if not (is_numeric(lt) and is_numeric(rt)):
                    self.error(loc, f"operator '{e.op}' needs numeric operands, got {lt} and {rt}")
                    return None
                return BOOL
            if e.op in _EQ_OPS:
                ok = (is_numeric(lt) and is_numeric(rt)) or (lt == BOOL and rt == BOOL)
                if not ok:
                    self.error(loc, f"operator '{e.op}' cannot compare {lt} and {rt}")
                    return None
                return BOOL
            if e.op in _BOOL_OPS:
                if lt != BOOL or rt != BOOL:
                    self.error(loc, f"operator '{e.op}' needs bool operands, got {lt} and {rt}")
                    return None
                return BOOL
            raise ValueError(f"unknown operator {e.op}")
        if isinstance(e, Unary):
            ot = self.expr_type(e.operand, loc)
            if ot is None:
                return None
            if e.op == "-":
                if not is_numeric(ot):
                    self.error(loc, f"unary '-' needs a numeric operand, got {ot}")
                    return None
                return ot
            if ot != BOOL:
                self.error(loc, f"unary '!' needs a bool operand, got {ot}")
                return None
            return BOOL
        if isinstance(e, ArrayLit):
            for el in e.elements:
                got = self.expr_type(el, loc)
                if e.elem_type == OBJECT:
                    if got == VOID:
                        self.error(loc, "Object[] cells cannot be void")
                elif got is not None and got != e.elem_type:
                    self.error(loc, f"array element must be {e.elem_type}, got {got}")
            return OBJECT_ARRAY if e.elem_type == OBJECT else Type("array", e.elem_type)
        if isinstance(e, ListLit):
            for el in e.elements:
                got = self.expr_type(el, loc)
                if got is not None and got != e.elem_type:
                    self.error(loc, f"list element must be {e.elem_type}, got {got}")
            return Type("list", e.elem_type)
        if isinstance(e, Index):
            bt = self.expr_type(e.base, loc)
            it = self.expr_type(e.index, loc)
            if it is not None and it != INT:
                self.error(loc, f"index must be int, got {it}")
            if bt is None:
                return None
            if bt.kind == "array":
                return bt.elem
            if bt == OBJECT_ARRAY:
                return OBJECT
            self.error(loc, f"cannot index into {bt}")
            return None
        if isinstance(e, Length):
            ct = self.expr_type(e.collection, loc)
            if ct is not None and ct.kind not in ("array", "list") and ct != OBJECT_ARRAY:
                self.error(loc, f"length() needs an array or list, got {ct}")
            return INT
        if isinstance(e, Builtin):
            return self.builtin_type(e, loc)
        if isinstance(e, Cast):
            st = self.expr_type(e.expr, loc)
            if e.type == VOID:
                self.error(loc, "cannot cast to void")
                return None
            if st is not None and st != OBJECT and st != e.type:
                self.error(loc, f"cannot cast {st} to {e.type}")
            return e.type
        if isinstance(e, Call):
            self.error(loc, "method calls may only appear as statements or return values")
            return None
        raise TypeError(f"unknown expression: {e!r}")

    def builtin_type(self, e: Builtin, loc) -> Optional[Type]:
        def arity(n: int) -> bool:
            if len(e.args) != n:
                self.error(loc, f"{e.name}() expects {n} argument(s), got {len(e.args)}")
                return False
            return True

        if e.name == "nan":
            arity(0)
            return DOUBLE
        if e.name == "abs":
            if not arity(1):
                return None
            at = self.expr_type(e.args[0], loc)
            if at is not None and not is_numeric(at):
                self.error(loc, f"abs() needs a numeric argument, got {at}")
                return None
            return at
        if e.name == "iterator":
            if not arity(1):
                return None
            at = self.expr_type(e.args[0], loc)
            if at is None:
                return None
            if at.kind != "list":
                self.error(loc, f"iterator() needs a list, got {at}")
                return None
            return Type("iterator", at.elem)
        if e.name in ("hasNext", "next"):
            if not arity(1):
                return None
            at = self.expr_type(e.args[0], loc)
            if at is None:
                return None
            if at.kind != "iterator":
                self.error(loc, f"{e.name}() needs an iterator, got {at}")
                return None
            return BOOL if e.name == "hasNext" else at.elem
        raise ValueError(f"unknown builtin {e.name}")


def check_semantics(program: Program) -> list:
    """All semantic errors in the program; empty means well-formed."""
    return _Checker(program).check()
