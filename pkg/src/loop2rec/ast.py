"""AST for MiniJava-L, a small imperative language with while/do/for/foreach
loops, typed variables, arrays and lists.

Nodes are plain dataclasses treated as immutable after construction; the whole
toolchain (parser, checker, rewriter, printer, interpreter) shares them.
Source locations and loop numbers live in compare=False fields so `==` (and
`structural_eq`) sees only program shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# --------------------------------------------------------------------- types


@dataclass(frozen=True)
class Type:
    """Static type; `elem` is set for array/list/iterator types only."""

    kind: str
    elem: Optional["Type"] = None

    def __str__(self) -> str:
        if self.kind == "array":
            return f"{self.elem}[]"
        if self.kind == "list":
            return f"List<{self.elem}>"
        if self.kind == "iterator":
            return f"Iterator<{self.elem}>"
        return self.kind


INT = Type("int")
DOUBLE = Type("double")
BOOL = Type("bool")
VOID = Type("void")
OBJECT = Type("Object")
OBJECT_ARRAY = Type("Object[]")


def array_of(elem: Type) -> Type:
    return Type("array", elem)


def list_of(elem: Type) -> Type:
    return Type("list", elem)


def iterator_of(elem: Type) -> Type:
    return Type("iterator", elem)


def is_numeric(t: Type) -> bool:
    return t in (INT, DOUBLE)


# --------------------------------------------------------------- expressions


@dataclass
class Expr:
    pass


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class DoubleLit(Expr):
    value: float


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class Var(Expr):
    name: str


@dataclass
class Binary(Expr):
    op: str  # + - * / == != < <= > >= && ||
    lhs: Expr
    rhs: Expr


@dataclass
class Unary(Expr):
    op: str  # - !
    operand: Expr


@dataclass
class ArrayLit(Expr):
    """`new T[] { ... }`; elem_type OBJECT means an Object[] literal."""

    elem_type: Type
    elements: list


@dataclass
class ListLit(Expr):
    elem_type: Type
    elements: list


@dataclass
class Index(Expr):
    base: Expr
    index: Expr


@dataclass
class Length(Expr):
    collection: Expr


@dataclass
class Builtin(Expr):
    name: str  # abs nan iterator hasNext next
    args: list


@dataclass
class Cast(Expr):
    type: Type
    expr: Expr


@dataclass
class Call(Expr):
    """Method call expression. Only legal as the operand of a `return`;
    everywhere else calls are statements (CallAssign)."""

    method: str
    args: list


BUILTIN_NAMES = ("abs", "nan", "iterator", "hasNext", "next")


# ---------------------------------------------------------------- statements


@dataclass
class Stmt:
    pass


def _loc_field():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class VarDecl(Stmt):
    type: Type
    name: str
    init: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class Assign(Stmt):
    name: str
    value: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class AssignIndex(Stmt):
    name: str
    index: Expr
    value: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class CallAssign(Stmt):
    """`target = method(args);`, bare `method(args);`, or the declaring form
    `decl_type target = method(args);`."""

    target: Optional[str]
    method: str
    args: list
    decl_type: Optional[Type] = None
    loc: Optional[Loc] = _loc_field()


@dataclass
class If(Stmt):
    cond: Expr
    then: list
    orelse: Optional[list] = None
    loc: Optional[Loc] = _loc_field()


@dataclass
class While(Stmt):
    cond: Expr
    body: list
    loop_id: int = field(default=-1, compare=False, repr=False, kw_only=True)
    loc: Optional[Loc] = _loc_field()


@dataclass
class DoWhile(Stmt):
    body: list
    cond: Expr
    loop_id: int = field(default=-1, compare=False, repr=False, kw_only=True)
    loc: Optional[Loc] = _loc_field()


@dataclass
class For(Stmt):
    init: list  # VarDecl or Assign statements
    cond: Expr
    update: list  # Assign or CallAssign statements
    body: list
    loop_id: int = field(default=-1, compare=False, repr=False, kw_only=True)
    loc: Optional[Loc] = _loc_field()


@dataclass
class Foreach(Stmt):
    elem_type: Type
    elem_name: str
    collection: Expr
    body: list
    loop_id: int = field(default=-1, compare=False, repr=False, kw_only=True)
    loc: Optional[Loc] = _loc_field()


@dataclass
class Block(Stmt):
    body: list
    loc: Optional[Loc] = _loc_field()


@dataclass
class Return(Stmt):
    value: Expr
    loc: Optional[Loc] = _loc_field()


@dataclass
class Print(Stmt):
    value: Expr
    loc: Optional[Loc] = _loc_field()


LOOP_KINDS = (While, DoWhile, For, Foreach)


def is_loop(st: Stmt) -> bool:
    return isinstance(st, LOOP_KINDS)


def loop_kind(st: Stmt) -> str:
    if isinstance(st, While):
        return "while"
    if isinstance(st, DoWhile):
        return "do"
    if isinstance(st, For):
        return "for"
    if isinstance(st, Foreach):
        if isinstance(st.collection, Expr):
            return "foreach"
    raise TypeError(f"not a loop: {st!r}")


# ------------------------------------------------------------------- program


@dataclass
class Param:
    name: str
    type: Type


@dataclass
class MethodDef:
    ret_type: Type
    name: str
    params: list
    body: list
    ret: Optional[Expr] = None  # trailing `return <expr>;`
    loc: Optional[Loc] = _loc_field()


@dataclass
class Program:
    methods: list
    entry: str = "main"

    def method(self, name: str) -> Optional[MethodDef]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


# ------------------------------------------------------------------ traversal


def stmt_blocks(st: Stmt) -> list:
    """Nested statement sequences directly contained in a statement."""
    if isinstance(st, If):
        return [st.then] + ([st.orelse] if st.orelse else [])
    if isinstance(st, (While, DoWhile, Foreach, Block)):
        return [st.body]
    if isinstance(st, For):
        return [st.init, st.update, st.body]
    return []


def iter_stmts(stmts: list) -> Iterator[Stmt]:
    """All statements, pre-order (a statement before its nested blocks)."""
    for st in stmts:
        yield st
        for block in stmt_blocks(st):
            yield from iter_stmts(block)


def stmt_exprs(st: Stmt) -> list:
    """Expressions held directly by a statement (not those of nested blocks)."""
    if isinstance(st, VarDecl):
        return [st.init]
    if isinstance(st, Assign):
        return [st.value]
    if isinstance(st, AssignIndex):
        return [st.index, st.value]
    if isinstance(st, CallAssign):
        return list(st.args)
    if isinstance(st, If):
        return [st.cond]
    if isinstance(st, While):
        return [st.cond]
    if isinstance(st, DoWhile):
        return [st.cond]
    if isinstance(st, For):
        return [st.cond]
    if isinstance(st, Foreach):
        return [st.collection]
    if isinstance(st, (Return, Print)):
        return [st.value]
    return []


def walk_expr(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Binary):
        yield from walk_expr(e.lhs)
        yield from walk_expr(e.rhs)
    elif isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, (ArrayLit, ListLit)):
        for el in e.elements:
            yield from walk_expr(el)
    elif isinstance(e, Index):
        yield from walk_expr(e.base)
        yield from walk_expr(e.index)
    elif isinstance(e, Length):
        yield from walk_expr(e.collection)
    elif isinstance(e, (Builtin, Call)):
        for a in e.args:
            yield from walk_expr(a)
    elif isinstance(e, Cast):
        yield from walk_expr(e.expr)


def collect_identifiers(program: Program) -> set:
    """Every identifier occurring anywhere in the program: method names,
    parameters, declarations, assignment targets, call targets and variable
    references. Fresh-name generation must avoid all of them."""
    ids = set()
    for m in program.methods:
        ids.add(m.name)
        for p in m.params:
            ids.add(p.name)
        exprs = []
        for st in iter_stmts(m.body):
            if isinstance(st, VarDecl):
                ids.add(st.name)
            elif isinstance(st, (Assign, AssignIndex)):
                ids.add(st.name)
            elif isinstance(st, CallAssign):
                if st.target is not None:
                    ids.add(st.target)
                ids.add(st.method)
            elif isinstance(st, Foreach):
                ids.add(st.elem_name)
            exprs.extend(stmt_exprs(st))
        if m.ret is not None:
            exprs.append(m.ret)
        for e in exprs:
            for sub in walk_expr(e):
                if isinstance(sub, Var):
                    ids.add(sub.name)
                elif isinstance(sub, Call):
                    ids.add(sub.method)
    return ids


def assign_loop_ids(program: Program) -> int:
    """Number every loop in document order (outer loops before the loops they
    contain). Returns the loop count. The parser calls this; call it yourself
    on hand-built trees before interpreting or transforming them."""
    n = 0
    for m in program.methods:
        for st in iter_stmts(m.body):
            if is_loop(st):
                st.loop_id = n
                n += 1
    return n


def program_loops(program: Program) -> list:
    """(method, loop) pairs in document order."""
    out = []
    for m in program.methods:
        for st in iter_stmts(m.body):
            if is_loop(st):
                out.append((m, st))
    return out


def structural_eq(a: Program, b: Program) -> bool:
    """Exact structural identity: same methods, names, types and expression
    trees. Source locations and loop numbering are ignored; names are compared
    literally (no alpha-equivalence)."""
    return a == b
