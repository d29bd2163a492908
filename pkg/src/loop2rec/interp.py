"""Big-step interpreter over a stack of frames.

A State is a stack of Frames; each frame maps variable names to values and
owns a single-use return slot. Methods execute as: push a frame binding
parameters to argument values evaluated in the caller's frame, run the body,
copy the callee's return slot into the caller's target variable, pop the
frame. Executing `return` fills the slot and ends the frame's statement
sequence, so the slot is written at most once.

do/for/foreach execute by the classical desugaring into the while/if/call
rules (see docs/semantics.md); the rewriter under test is never involved, so
runs of original programs are an independent oracle.

`return m(...)` chains are executed iteratively: frames still pile up in the
state exactly as the call rule dictates, but the host stack stays flat, so
arbitrarily long tail recursions only cost state memory and step budget.

Numbers behave like Java's: ints are 32-bit two's complement with truncating
division (division by integer zero is an error), doubles are IEEE binary64
(division by zero gives infinities/NaN).
"""

from __future__ import annotations

import math
import struct
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

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
    OBJECT,
    OBJECT_ARRAY,
    Print,
    Program,
    Return,
    Stmt,
    Type,
    Unary,
    Var,
    VarDecl,
    While,
    program_loops,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 30_000))

DEFAULT_BUDGET = 1_000_000
MAX_CALL_DEPTH = 2_000  # non-tail nesting; tail chains are unbounded

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1


# ------------------------------------------------------------------- errors


class InterpError(Exception):
    kind = "Error"

    def __init__(self, message: str, loc: Optional[Loc] = None):
        self.message = message
        self.loc = loc
        super().__init__(message)

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.kind}: {self.message}"


class EmptyStateError(InterpError):
    kind = "EmptyState"


class SingleFrameError(InterpError):
    kind = "SingleFrame"


class MissingReturnError(InterpError):
    kind = "MissingReturn"


class UnboundVariableError(InterpError):
    kind = "UnboundVariable"


class TypeMismatchError(InterpError):
    kind = "TypeMismatch"


class DivisionByZeroError(InterpError):
    kind = "DivisionByZero"


class IndexOutOfBoundsError(InterpError):
    kind = "IndexOutOfBounds"


class ArityMismatchError(InterpError):
    kind = "ArityMismatch"


class StepBudgetExceeded(InterpError):
    kind = "StepBudgetExceeded"


class CallDepthExceeded(InterpError):
    kind = "CallDepthExceeded"


class NoEntryMethodError(InterpError):
    kind = "NoEntryMethod"


class UndefinedMethodError(InterpError):
    kind = "UndefinedMethod"


# ------------------------------------------------------------------- values


@dataclass(frozen=True)
class IntV:
    value: int  # always within 32-bit two's complement


@dataclass(frozen=True)
class DoubleV:
    value: float


@dataclass(frozen=True)
class BoolV:
    value: bool


class VoidV:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VoidV()"


VOID_VALUE = VoidV()


class ArrayV:
    """Mutable cell sequence with identity; bindings share the cells."""

    __slots__ = ("elem_type", "cells")

    def __init__(self, elem_type: Type, cells: list):
        self.elem_type = elem_type
        self.cells = cells

    def __repr__(self):
        return f"ArrayV({self.elem_type}, {self.cells!r})"


class ListV:
    __slots__ = ("elem_type", "cells")

    def __init__(self, elem_type: Type, cells: list):
        self.elem_type = elem_type
        self.cells = cells

    def __repr__(self):
        return f"ListV({self.elem_type}, {self.cells!r})"


class IterV:
    """Cursor over a ListV. `pos` advances in place, like a Java iterator
    object shared by reference across frames."""

    __slots__ = ("target", "pos")

    def __init__(self, target: ListV, pos: int = 0):
        self.target = target
        self.pos = pos

    def __repr__(self):
        return f"IterV(pos={self.pos})"


class ObjectArrayV:
    __slots__ = ("cells",)

    def __init__(self, cells: list):
        self.cells = cells

    def __repr__(self):
        return f"ObjectArrayV({self.cells!r})"


def wrap32(x: int) -> int:
    return (x + 2**31) % 2**32 - 2**31


def render_value(v) -> str:
    if isinstance(v, IntV):
        return str(v.value)
    if isinstance(v, DoubleV):
        x = v.value
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return repr(x)
    if isinstance(v, BoolV):
        return "true" if v.value else "false"
    if isinstance(v, (ArrayV, ListV, ObjectArrayV)):
        return "[" + ", ".join(render_value(c) for c in v.cells) + "]"
    if isinstance(v, IterV):
        return f"iterator({v.pos})"
    if isinstance(v, VoidV):
        return "void"
    raise TypeError(f"not a value: {v!r}")


def values_equal(a, b) -> bool:
    """Strict observable equality; doubles compare bit for bit (NaN equals
    NaN, 0.0 differs from -0.0)."""
    if type(a) is not type(b):
        return False
    if isinstance(a, DoubleV):
        return struct.pack("<d", a.value) == struct.pack("<d", b.value)
    if isinstance(a, (IntV, BoolV)):
        return a.value == b.value
    if isinstance(a, VoidV):
        return True
    if isinstance(a, (ArrayV, ListV)):
        return (a.elem_type == b.elem_type and len(a.cells) == len(b.cells)
                and all(values_equal(x, y) for x, y in zip(a.cells, b.cells)))
    if isinstance(a, ObjectArrayV):
        return (len(a.cells) == len(b.cells)
                and all(values_equal(x, y) for x, y in zip(a.cells, b.cells)))
    if isinstance(a, IterV):
        return a.pos == b.pos and values_equal(a.target, b.target)
    raise TypeError(f"not a value: {a!r}")


# ------------------------------------------------------------ state & frames


class Frame:
    __slots__ = ("bindings", "ret_slot")

    def __init__(self, bindings: Optional[dict] = None):
        self.bindings = bindings if bindings is not None else {}
        self.ret_slot = None  # written at most once, by return

    def snapshot(self):
        return dict(self.bindings), self.ret_slot

    def __repr__(self):
        return f"Frame({self.bindings!r}, ret={self.ret_slot!r})"


class State:
    """The frame stack. State functions mutate in place and return the state;
    an attached recorder sees a snapshot after every state operation."""

    __slots__ = ("frames", "recorder")

    def __init__(self, frames: Optional[list] = None, recorder=None):
        self.frames = frames if frames is not None else []
        self.recorder = recorder

    def top(self) -> Frame:
        return self.frames[-1]

    def record(self, op: str) -> None:
        if self.recorder is not None:
            self.recorder.record(op, self)


class StateRecorder:
    """Collects (operation, frame snapshots) pairs for state-level assertions.
    Snapshots copy the binding maps; values are shared."""

    def __init__(self):
        self.events: list = []

    def record(self, op: str, state: State) -> None:
        self.events.append((op, [f.snapshot() for f in state.frames]))

    def ops(self) -> list:
        return [op for op, _ in self.events]


def upd_v(s: State, var: str, value) -> State:
    """Rebind a variable in the current (last) frame."""
    if not s.frames:
        raise EmptyStateError(f"cannot update '{var}' in an empty state")
    s.frames[-1].bindings[var] = value
    s.record("upd_v")
    return s


def upd_r(s: State, value) -> State:
    """Record the current frame's returned value in its return slot."""
    if not s.frames:
        raise EmptyStateError("cannot record a return in an empty state")
    frame = s.frames[-1]
    if frame.ret_slot is not None:
        raise InterpError("return slot already set")
    frame.ret_slot = value
    s.record("upd_r")
    return s


def upd_vr(s: State, var: str) -> State:
    """Copy the last frame's returned value into a variable of the
    penultimate frame (creating the binding if absent)."""
    if not s.frames:
        raise EmptyStateError(f"cannot update '{var}': empty state")
    if len(s.frames) == 1:
        raise SingleFrameError(f"cannot update '{var}': no caller frame")
    value = s.frames[-1].ret_slot
    if value is None:
        raise MissingReturnError(f"callee returned no value for '{var}'")
    s.frames[-2].bindings[var] = value
    s.record("upd_vr")
    return s


def add_frame(s: State, params: list, values: list) -> State:
    """Push a frame binding each parameter to an already-evaluated argument
    value (arguments are evaluated in the caller's frame beforehand)."""
    if len(params) != len(values):
        raise ArityMismatchError(f"expected {len(params)} arguments, got {len(values)}")
    s.frames.append(Frame(dict(zip(params, values))))
    s.record("add_frame")
    return s


def rem_frame(s: State) -> State:
    """Drop the last frame."""
    if not s.frames:
        raise EmptyStateError("cannot remove a frame from an empty state")
    s.frames.pop()
    s.record("rem_frame")
    return s


# --------------------------------------------------------------- evaluation


def _num(v, what: str):
    if isinstance(v, (IntV, DoubleV)):
        return v
    raise TypeMismatchError(f"{what} needs a number, got {render_value(v)}")


def _bool(v, what: str) -> bool:
    if isinstance(v, BoolV):
        return v.value
    raise TypeMismatchError(f"{what} needs a bool, got {render_value(v)}")


def _ddiv(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return math.copysign(math.inf, sign)
    return a / b


def _arith(op: str, lv, rv):
    if isinstance(lv, DoubleV) or isinstance(rv, DoubleV):
        a = float(lv.value)
        b = float(rv.value)
        if op == "+":
            return DoubleV(a + b)
        if op == "-":
            return DoubleV(a - b)
        if op == "*":
            return DoubleV(a * b)
        return DoubleV(_ddiv(a, b))
    a = lv.value
    b = rv.value
    if op == "+":
        return IntV(wrap32(a + b))
    if op == "-":
        return IntV(wrap32(a - b))
    if op == "*":
        return IntV(wrap32(a * b))
    if b == 0:
        raise DivisionByZeroError("integer division by zero")
    q = abs(a) // abs(b)
    return IntV(wrap32(-q if (a < 0) != (b < 0) else q))


def eval_expr(e: Expr, s: State):
    """Evaluate an expression against the current frame. Standard semantics:
    IEEE doubles (NaN propagates), wrapping 32-bit ints, short-circuit boolean
    operators. `next(it)` advances the shared iterator in place."""
    if isinstance(e, IntLit):
        return IntV(e.value)
    if isinstance(e, DoubleLit):
        return DoubleV(e.value)
    if isinstance(e, BoolLit):
        return BoolV(e.value)
    if isinstance(e, Var):
        if not s.frames:
            raise EmptyStateError(f"variable '{e.name}' read in an empty state")
        try:
            return s.frames[-1].bindings[e.name]
        except KeyError:
            raise UnboundVariableError(f"variable '{e.name}' is not bound") from None
    if isinstance(e, Binary):
        op = e.op
        if op in ("&&", "||"):
            lv = _bool(eval_expr(e.lhs, s), f"'{op}'")
            if op == "&&" and not lv:
                return BoolV(False)
            if op == "||" and lv:
                return BoolV(True)
            return BoolV(_bool(eval_expr(e.rhs, s), f"'{op}'"))
        lv = eval_expr(e.lhs, s)
        rv = eval_expr(e.rhs, s)
        if op in ("+", "-", "*", "/"):
            return _arith(op, _num(lv, f"'{op}'"), _num(rv, f"'{op}'"))
        if op in ("<", "<=", ">", ">="):
            a = _num(lv, f"'{op}'").value
            b = _num(rv, f"'{op}'").value
            return BoolV({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op])
        if op in ("==", "!="):
            if isinstance(lv, BoolV) and isinstance(rv, BoolV):
                eq = lv.value == rv.value
            else:
                a = _num(lv, f"'{op}'").value
                b = _num(rv, f"'{op}'").value
                eq = a == b
            return BoolV(eq if op == "==" else not eq)
        raise TypeMismatchError(f"unknown operator '{op}'")
    if isinstance(e, Unary):
        v = eval_expr(e.operand, s)
        if e.op == "-":
            v = _num(v, "unary '-'")
            if isinstance(v, DoubleV):
                return DoubleV(-v.value)
            return IntV(wrap32(-v.value))
        return BoolV(not _bool(v, "unary '!'"))
    if isinstance(e, ArrayLit):
        cells = [eval_expr(x, s) for x in e.elements]
        if e.elem_type == OBJECT:
            return ObjectArrayV(cells)
        return ArrayV(e.elem_type, cells)
    if isinstance(e, ListLit):
        return ListV(e.elem_type, [eval_expr(x, s) for x in e.elements])
    if isinstance(e, Index):
        base = eval_expr(e.base, s)
        idx = eval_expr(e.index, s)
        if not isinstance(idx, IntV):
            raise TypeMismatchError("index must be an int")
        if not isinstance(base, (ArrayV, ObjectArrayV)):
            raise TypeMismatchError(f"cannot index into {render_value(base)}")
        if not 0 <= idx.value < len(base.cells):
            raise IndexOutOfBoundsError(
                f"index {idx.value} out of bounds for length {len(base.cells)}")
        return base.cells[idx.value]
    if isinstance(e, Length):
        v = eval_expr(e.collection, s)
        if not isinstance(v, (ArrayV, ListV, ObjectArrayV)):
            raise TypeMismatchError(f"length() of non-collection {render_value(v)}")
        return IntV(len(v.cells))
    if isinstance(e, Builtin):
        return _eval_builtin(e, s)
    if isinstance(e, Cast):
        return _eval_cast(e.type, eval_expr(e.expr, s))
    if isinstance(e, Call):
        raise TypeMismatchError("method calls cannot be evaluated as expressions")
    raise TypeError(f"unknown expression: {e!r}")


def _eval_builtin(e: Builtin, s: State):
    if e.name == "nan":
        return DoubleV(math.nan)
    if e.name == "abs":
        v = _num(eval_expr(e.args[0], s), "abs()")
        if isinstance(v, DoubleV):
            return DoubleV(math.fabs(v.value))
        return IntV(wrap32(abs(v.value)))
    if e.name == "iterator":
        v = eval_expr(e.args[0], s)
        if not isinstance(v, ListV):
            raise TypeMismatchError(f"iterator() needs a list, got {render_value(v)}")
        return IterV(v, 0)
    if e.name in ("hasNext", "next"):
        v = eval_expr(e.args[0], s)
        if not isinstance(v, IterV):
            raise TypeMismatchError(f"{e.name}() needs an iterator, got {render_value(v)}")
        if e.name == "hasNext":
            return BoolV(v.pos < len(v.target.cells))
        if v.pos >= len(v.target.cells):
            raise IndexOutOfBoundsError("next() on an exhausted iterator")
        cell = v.target.cells[v.pos]
        v.pos += 1
        return cell
    raise TypeError(f"unknown builtin {e.name}")


def _eval_cast(ty: Type, v):
    ok = (
        (ty == INT and isinstance(v, IntV))
        or (ty == DOUBLE and isinstance(v, DoubleV))
        or (ty == BOOL and isinstance(v, BoolV))
        or (ty == OBJECT and not isinstance(v, VoidV))
        or (ty == OBJECT_ARRAY and isinstance(v, ObjectArrayV))
        or (ty.kind == "array" and isinstance(v, ArrayV) and v.elem_type == ty.elem)
        or (ty.kind == "list" and isinstance(v, ListV) and v.elem_type == ty.elem)
        or (ty.kind == "iterator" and isinstance(v, IterV) and v.target.elem_type == ty.elem)
    )
    if not ok:
        raise TypeMismatchError(f"cannot cast {render_value(v)} to {ty}")
    return v


# ---------------------------------------------------------------- execution


@dataclass
class ExecTrace:
    """Observable behavior of one run: print output, the entry frame's final
    bindings, per-loop iteration counts, per-method entry counts, rule steps,
    and the entry method's returned value (if any)."""

    prints: list = field(default_factory=list)
    final_bindings: dict = field(default_factory=dict)
    loop_iterations: dict = field(default_factory=dict)
    method_entries: dict = field(default_factory=dict)
    steps: int = 0
    result: object = None


_RETURNED = "returned"


class _Run:
    def __init__(self, program: Program, budget: int,
                 tracer: Optional[Callable] = None, recorder=None):
        self.env = {m.name: m for m in program.methods}
        self.state = State(recorder=recorder)
        self.budget = budget
        self.tracer = tracer
        self.steps = 0
        self.depth = 0
        self.trace = ExecTrace()
        for m in program.methods:
            self.trace.method_entries[m.name] = 0
        for _, loop in program_loops(program):
            self.trace.loop_iterations[loop.loop_id] = 0

    def step(self, rule: str, loc: Optional[Loc]) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f"exceeded {self.budget} steps", loc)
        if self.tracer is not None:
            self.tracer(rule, loc, len(self.state.frames))

    def eval(self, e: Expr, loc: Optional[Loc]):
        try:
            return eval_expr(e, self.state)
        except InterpError as err:
            if err.loc is None:
                err.loc = loc
            raise

    # signals: None = fell through, _RETURNED = slot filled,
    # ("tail", method, values, loc) = tail call pending
    def exec_seq(self, stmts: list):
        for st in stmts:
            sig = self.exec_stmt(st)
            if sig is not None:
                return sig
        return None

    def exec_stmt(self, st: Stmt):
        if isinstance(st, VarDecl):
            self.step("assign", st.loc)
            upd_v(self.state, st.name, self.eval(st.init, st.loc))
            return None
        if isinstance(st, Assign):
            self.step("assign", st.loc)
            upd_v(self.state, st.name, self.eval(st.value, st.loc))
            return None
        if isinstance(st, AssignIndex):
            self.step("assign", st.loc)
            base = self.eval(Var(st.name), st.loc)
            if not isinstance(base, ArrayV):
                raise TypeMismatchError(f"'{st.name}' is not an array", st.loc)
            idx = self.eval(st.index, st.loc)
            if not isinstance(idx, IntV) or not 0 <= idx.value < len(base.cells):
                raise IndexOutOfBoundsError(
                    f"index {getattr(idx, 'value', '?')} out of bounds for "
                    f"length {len(base.cells)}", st.loc)
            base.cells[idx.value] = self.eval(st.value, st.loc)
            return None
        if isinstance(st, CallAssign):
            # the invocation step is counted at frame entry, in invoke()
            values = [self.eval(a, st.loc) for a in st.args]
            self.invoke(st.method, values, st.loc)
            if st.target is not None:
                upd_vr(self.state, st.target)
            rem_frame(self.state)
            return None
        if isinstance(st, If):
            self.step("if", st.loc)
            if _bool(self.eval(st.cond, st.loc), "if condition"):
                return self.exec_seq(st.then)
            if st.orelse is not None:
                return self.exec_seq(st.orelse)
            return None
        if isinstance(st, While):
            while True:
                self.step("while", st.loc)
                if not _bool(self.eval(st.cond, st.loc), "while condition"):
                    return None
                self.trace.loop_iterations[st.loop_id] += 1
                sig = self.exec_seq(st.body)
                if sig is not None:  # unreachable from parsed programs
                    return sig
        if isinstance(st, DoWhile):
            while True:
                self.step("do", st.loc)
                self.trace.loop_iterations[st.loop_id] += 1
                sig = self.exec_seq(st.body)
                if sig is not None:
                    return sig
                if not _bool(self.eval(st.cond, st.loc), "do condition"):
                    return None
        if isinstance(st, For):
            for s in st.init:
                sig = self.exec_stmt(s)
                if sig is not None:
                    return sig
            while True:
                self.step("for", st.loc)
                if not _bool(self.eval(st.cond, st.loc), "for condition"):
                    return None
                self.trace.loop_iterations[st.loop_id] += 1
                sig = self.exec_seq(st.body)
                if sig is not None:
                    return sig
                for s in st.update:
                    sig = self.exec_stmt(s)
                    if sig is not None:
                        return sig
        if isinstance(st, Foreach):
            self.step("foreach", st.loc)
            coll = self.eval(st.collection, st.loc)
            if not isinstance(coll, (ArrayV, ListV)):
                raise TypeMismatchError(
                    f"foreach needs an array or list, got {render_value(coll)}", st.loc)
            for cell in list(coll.cells):
                self.step("foreach", st.loc)
                self.trace.loop_iterations[st.loop_id] += 1
                upd_v(self.state, st.elem_name, cell)
                sig = self.exec_seq(st.body)
                if sig is not None:
                    return sig
            return None
        if isinstance(st, Block):
            self.step("block", st.loc)
            return self.exec_seq(st.body)
        if isinstance(st, Return):
            self.step("return", st.loc)
            if isinstance(st.value, Call):
                values = [self.eval(a, st.loc) for a in st.value.args]
                return ("tail", st.value.method, values, st.loc)
            upd_r(self.state, self.eval(st.value, st.loc))
            return _RETURNED
        if isinstance(st, Print):
            self.step("print", st.loc)
            self.trace.prints.append(render_value(self.eval(st.value, st.loc)))
            return None
        raise TypeError(f"unknown statement: {st!r}")

    def invoke(self, name: str, values: list, loc: Optional[Loc]) -> None:
        """Run a method, leaving its frame on top of the state with the return
        slot filled (for non-void methods). Tail calls (`return m(...)`)
        extend the chain iteratively: every link gets its own frame, and on
        completion each link's slot is copied down as the frames unwind."""
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            self.depth -= 1
            raise CallDepthExceeded(f"call depth over {MAX_CALL_DEPTH}", loc)
        try:
            chain = 0
            while True:
                m = self.env.get(name)
                if m is None:
                    raise UndefinedMethodError(f"no method '{name}'", loc)
                if len(m.params) != len(values):
                    raise ArityMismatchError(
                        f"'{name}' expects {len(m.params)} arguments, got {len(values)}", loc)
                self.step("invoke", loc)
                add_frame(self.state, [p.name for p in m.params], values)
                self.trace.method_entries[name] += 1
                sig = self.exec_seq(m.body)
                if sig is None and m.ret is not None:
                    self.step("return", m.loc)
                    if isinstance(m.ret, Call):
                        sig = ("tail", m.ret.method,
                               [self.eval(a, m.loc) for a in m.ret.args], m.loc)
                    else:
                        upd_r(self.state, self.eval(m.ret, m.loc))
                if isinstance(sig, tuple):
                    name, values = sig[1], sig[2]
                    chain += 1
                    continue
                break
            for _ in range(chain):
                value = self.state.top().ret_slot
                rem_frame(self.state)
                if value is not None:
                    upd_r(self.state, value)
        finally:
            self.depth -= 1


def run(program: Program, budget: int = DEFAULT_BUDGET,
        tracer: Optional[Callable] = None, recorder=None) -> ExecTrace:
    """Execute the program from its entry method and report the observable
    trace. `tracer(rule, loc, frame_depth)` fires per rule application;
    `recorder` (a StateRecorder) snapshots frames after every state change."""
    entry = program.method(program.entry)
    if entry is None:
        raise NoEntryMethodError(f"program has no entry method '{program.entry}'")
    if entry.params:
        raise NoEntryMethodError(f"entry method '{program.entry}' must take no parameters")
    r = _Run(program, budget, tracer, recorder)
    r.invoke(entry.name, [], entry.loc)
    assert len(r.state.frames) == 1, "frame imbalance"
    top = r.state.top()
    r.trace.final_bindings = dict(top.bindings)
    r.trace.result = top.ret_slot
    r.trace.steps = r.steps
    return r.trace
