"""Per-loop variable analysis feeding the loop-to-recursion rewrite.

For each loop this module computes:

  * the outer variables the loop reads or writes (they become the generated
    method's parameters and call arguments),
  * the subset the loop modifies,
  * the modified variables whose values are still needed once the loop is
    gone (these must travel back to the caller),
  * how to pack them (nothing, one typed value, or an Object[] with casts),
  * clash-free fresh names for the generated method and helper variables.

Liveness is syntactic, not path-sensitive: a modified variable counts as live
if it is read anywhere after the loop in document order, in the method's
trailing return, or anywhere inside an enclosing loop (a read textually
before the loop re-executes after it via the enclosing loop's back edge).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .ast import (
    Assign,
    AssignIndex,
    Builtin,
    Call,
    CallAssign,
    DoWhile,
    Expr,
    For,
    Foreach,
    If,
    Index,
    Length,
    Block,
    Cast,
    ArrayLit,
    ListLit,
    Binary,
    Unary,
    Loc,
    MethodDef,
    Param,
    Print,
    Program,
    Return,
    Stmt,
    Var,
    VarDecl,
    While,
    collect_identifiers,
    is_loop,
)


class UnsupportedConstruct(Exception):
    def __init__(self, loc: Optional[Loc], message: str):
        self.loc = loc
        self.message = message
        where = str(loc) if loc else "?:?"
        super().__init__(f"{where}: {message}")


class Packing(Enum):
    NONE = "none"
    SINGLE = "single"
    OBJECT_ARRAY = "object_array"


@dataclass(frozen=True)
class LoopAnalysis:
    params: tuple  # Param, call/parameter order
    modified: tuple  # Param, first-write order
    live_after: tuple  # Param, declaration order
    packing: Packing
    loop_method_name: str
    result_var_name: str

    @property
    def single_var(self) -> Optional[str]:
        return self.live_after[0].name if self.packing == Packing.SINGLE else None


# ----------------------------------------------------------- free variables


class _VarScan:
    """Document-order scan recording free-variable uses and writes.

    `uses` collects every free occurrence (reads and write targets) in first
    occurrence order; `writes` collects assignment targets in first-write
    order; `reads` collects occurrences that need the variable's value
    (write-only targets excluded, array bases included).
    """

    def __init__(self, bound=()):
        self.local = set(bound)
        self.uses: list = []
        self._seen_uses = set()
        self.writes: list = []
        self._seen_writes = set()
        self.reads = set()

    def use(self, name: str, read: bool) -> None:
        if name in self.local:
            return
        if name not in self._seen_uses:
            self._seen_uses.add(name)
            self.uses.append(name)
        if read:
            self.reads.add(name)

    def write(self, name: str) -> None:
        if name in self.local:
            return
        if name not in self._seen_writes:
            self._seen_writes.add(name)
            self.writes.append(name)
        self.use(name, read=False)

    def expr(self, e: Expr) -> None:
        if isinstance(e, Var):
            self.use(e.name, read=True)
        elif isinstance(e, Binary):
            self.expr(e.lhs)
            self.expr(e.rhs)
        elif isinstance(e, Unary):
            self.expr(e.operand)
        elif isinstance(e, (ArrayLit, ListLit)):
            for el in e.elements:
                self.expr(el)
        elif isinstance(e, Index):
            self.expr(e.base)
            self.expr(e.index)
        elif isinstance(e, Length):
            self.expr(e.collection)
        elif isinstance(e, (Builtin, Call)):
            for a in e.args:
                self.expr(a)
        elif isinstance(e, Cast):
            self.expr(e.expr)

    def stmt(self, st: Stmt) -> None:
        if isinstance(st, VarDecl):
            self.expr(st.init)
            self.local.add(st.name)
        elif isinstance(st, Assign):
            self.expr(st.value)
            self.write(st.name)
        elif isinstance(st, AssignIndex):
            self.use(st.name, read=True)
            self.write(st.name)
            self.expr(st.index)
            self.expr(st.value)
        elif isinstance(st, CallAssign):
            for a in st.args:
                self.expr(a)
            if st.decl_type is not None:
                self.local.add(st.target)
            elif st.target is not None:
                self.write(st.target)
        elif isinstance(st, If):
            self.expr(st.cond)
            self.seq(st.then)
            if st.orelse:
                self.seq(st.orelse)
        elif isinstance(st, While):
            self.expr(st.cond)
            self.seq(st.body)
        elif isinstance(st, DoWhile):
            self.seq(st.body)
            self.expr(st.cond)
        elif isinstance(st, For):
            for s in st.init:
                self.stmt(s)
            self.expr(st.cond)
            self.seq(st.body)
            for s in st.update:
                self.stmt(s)
        elif isinstance(st, Foreach):
            self.expr(st.collection)
            self.local.add(st.elem_name)
            self.seq(st.body)
        elif isinstance(st, Block):
            self.seq(st.body)
        elif isinstance(st, (Return, Print)):
            self.expr(st.value)

    def seq(self, stmts: list) -> None:
        for st in stmts:
            self.stmt(st)


def _scan(body, cond, extra, bound):
    scan = _VarScan(bound)
    scan.seq(body)
    if cond is not None:
        scan.expr(cond)
    for item in extra:
        if isinstance(item, Stmt):
            scan.stmt(item)
        else:
            scan.expr(item)
    return scan


def used_vars(body: list, cond: Optional[Expr] = None, extra=(), bound=()) -> list:
    """Identifiers free in body + cond + extra, in first-use order. `extra`
    carries a for-loop's update statements (or any further expressions)."""
    return list(_scan(body, cond, extra, bound).uses)


def modified_vars(body: list, extra=(), bound=()) -> list:
    """The used_vars subset written by the loop (assignment targets, indexed
    array bases, call-assignment targets), in first-write order."""
    return list(_scan(body, None, extra, bound).writes)


# ----------------------------------------------------------------- liveness


def _reads_of(stmts: list, exprs=()) -> set:
    scan = _VarScan()
    scan.seq(stmts)
    for e in exprs:
        scan.expr(e)
    return scan.reads


def _reads_after(stmts: list, loop: Stmt):
    """Reads that can observe the loop's writes: everything after the loop in
    its enclosing sequences, plus whole enclosing loops (their next iteration
    re-reads), or None when the loop is not in this sequence."""
    from .ast import stmt_blocks

    for idx, st in enumerate(stmts):
        if st is loop:
            return _reads_of(stmts[idx + 1:])
        for block in stmt_blocks(st):
            inner = _reads_after(block, loop)
            if inner is None:
                continue
            reads = set(inner) | _reads_of(stmts[idx + 1:])
            if is_loop(st):
                # back edge: the enclosing loop re-runs its condition,
                # body and updates after the inner loop finished
                if isinstance(st, For):
                    reads |= _reads_of(st.body + st.update, [st.cond])
                elif isinstance(st, Foreach):
                    reads |= _reads_of(st.body)
                else:
                    reads |= _reads_of(st.body, [st.cond])
            return reads
    return None


def _decl_order(method: MethodDef) -> dict:
    from .ast import iter_stmts

    order = {}
    for p in method.params:
        order.setdefault(p.name, len(order))
    for st in iter_stmts(method.body):
        if isinstance(st, VarDecl):
            order.setdefault(st.name, len(order))
        elif isinstance(st, CallAssign) and st.decl_type is not None:
            order.setdefault(st.target, len(order))
        elif isinstance(st, Foreach):
            order.setdefault(st.elem_name, len(order))
    return order


def live_after(loop: Stmt, method: MethodDef, modified: Optional[list] = None) -> list:
    """Modified variables still read once the loop is done, in declaration
    order."""
    if modified is None:
        modified = _loop_modified(loop)
    reads = _reads_after(method.body, loop)
    if reads is None:
        raise ValueError("loop does not occur in the given method")
    if method.ret is not None:
        scan = _VarScan()
        scan.expr(method.ret)
        reads = reads | scan.reads
    order = _decl_order(method)
    live = [name for name in modified if name in reads]
    live.sort(key=lambda n: order.get(n, len(order)))
    return live


# -------------------------------------------------------------- fresh names


class NameAllocator:
    """Deterministic fresh-name source. Candidates are `base`, `base2`,
    `base3`, ... and the first one absent from the program (and from earlier
    allocations) wins. Keywords are pre-claimed: an emitted name must survive
    re-parsing."""

    def __init__(self, program: Program):
        from .parser import KEYWORDS

        self.used = collect_identifiers(program) | KEYWORDS

    def fresh(self, base: str) -> str:
        if base not in self.used:
            self.used.add(base)
            return base
        k = 2
        while f"{base}{k}" in self.used:
            k += 1
        name = f"{base}{k}"
        self.used.add(name)
        return name


def fresh_names(base_method: str, program: Program):
    """(loopMethodName, resultVarName) for a loop extracted from
    `base_method`: `<base>_loop` and `result`, suffixed with 2, 3, ... until
    free of every identifier in the program."""
    alloc = NameAllocator(program)
    return alloc.fresh(f"{base_method}_loop"), alloc.fresh("result")


# ------------------------------------------------------------- loop summary


def _scope_at(method: MethodDef, loop: Stmt) -> Optional[dict]:
    """name -> Type for everything in scope where the loop statement sits."""

    def walk(stmts, scope):
        for st in stmts:
            if st is loop:
                return dict(scope)
            if isinstance(st, VarDecl):
                scope[st.name] = st.type
            elif isinstance(st, CallAssign) and st.decl_type is not None:
                scope[st.target] = st.decl_type
            elif isinstance(st, If):
                for block in (st.then, st.orelse or []):
                    found = walk(block, dict(scope))
                    if found is not None:
                        return found
            elif isinstance(st, (While, DoWhile, Block)):
                found = walk(st.body, dict(scope))
                if found is not None:
                    return found
            elif isinstance(st, For):
                inner = dict(scope)
                for s in st.init:
                    if isinstance(s, VarDecl):
                        inner[s.name] = s.type
                found = walk(st.body, inner)
                if found is not None:
                    return found
            elif isinstance(st, Foreach):
                inner = dict(scope)
                inner[st.elem_name] = st.elem_type
                found = walk(st.body, inner)
                if found is not None:
                    return found
        return None

    scope = {p.name: p.type for p in method.params}
    return walk(method.body, scope)


def _loop_parts(loop: Stmt):
    """(body, cond, extra, bound) suitable for used/modified scans."""
    if isinstance(loop, While):
        return loop.body, loop.cond, (), ()
    if isinstance(loop, DoWhile):
        return loop.body, loop.cond, (), ()
    if isinstance(loop, For):
        return loop.body, loop.cond, tuple(loop.update), ()
    if isinstance(loop, Foreach):
        return loop.body, None, (), (loop.elem_name,)
    raise TypeError(f"not a loop: {loop!r}")


def _loop_modified(loop: Stmt) -> list:
    body, _, extra, bound = _loop_parts(loop)
    return modified_vars(body, extra, bound)


def _check_foreach_collection(loop: Foreach) -> None:
    if not isinstance(loop.collection, Var):
        return
    coll = loop.collection.name
    scan = _VarScan()
    scan.seq(loop.body)
    if coll in scan._seen_writes:
        raise UnsupportedConstruct(
            loop.loc, f"foreach body must not modify the traversed collection '{coll}'")


def analyze_loop(
    loop: Stmt,
    method: MethodDef,
    program: Program,
    optimize: bool = True,
    names=None,
) -> LoopAnalysis:
    """Summarize a loop for extraction. `names` preassigns the fresh
    (method, result) pair; without it the names are derived from the program
    as it stands."""
    scope = _scope_at(method, loop)
    if scope is None:
        raise ValueError("loop does not occur in the given method")
    if isinstance(loop, For):
        for s in loop.init:
            if isinstance(s, VarDecl):
                scope[s.name] = s.type
    if isinstance(loop, Foreach):
        _check_foreach_collection(loop)

    body, cond, extra, bound = _loop_parts(loop)
    used = used_vars(body, cond, extra, bound)
    if isinstance(loop, Foreach) and isinstance(loop.collection, Var):
        # the traversed collection is re-read by the generated guard and
        # element access; it leads the parameter list
        used = [loop.collection.name] + [n for n in used if n != loop.collection.name]

    def typed(names_):
        out = []
        for n in names_:
            if n not in scope:
                raise UnsupportedConstruct(
                    getattr(loop, "loc", None),
                    f"loop references '{n}' which is not in scope; run check_semantics first")
            out.append(Param(n, scope[n]))
        return tuple(out)

    params = typed(used)
    modified = typed(modified_vars(body, extra, bound))
    live = typed(live_after(loop, method, [p.name for p in modified]))

    if not optimize:
        packing = Packing.OBJECT_ARRAY
    elif len(live) == 0:
        packing = Packing.NONE
    elif len(live) == 1:
        packing = Packing.SINGLE
    else:
        packing = Packing.OBJECT_ARRAY

    if names is None:
        names = fresh_names(method.name, program)
    return LoopAnalysis(
        params=params,
        modified=modified,
        live_after=live,
        packing=packing,
        loop_method_name=names[0],
        result_var_name=names[1],
    )
