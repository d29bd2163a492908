"""Rewrites every loop into a call to a newly created tail-recursive method.

Each loop is replaced by (at most) a guard plus a first call, and a new method
is appended whose body runs one iteration and then either tail-calls itself
(`return <method>(...)`) or returns the variables the loop modified. Loops are
analyzed against the original program in document order, then rewritten
innermost-first so every extraction sees an already loop-free body.

Caller-side packing of the modified variables:

  * none live      -> a bare call to a void method
  * exactly one    -> `v = loop(args);`
  * several        -> `Object[] result = loop(args);` plus one cast per
                      variable (`v = (T) result[i];`)

With optimization off every loop uses the Object[] form over all parameters.

A handful of deliberately wrong rewrites (Mutation) are shipped for the
differential harness to catch; none is ever active by default.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .analysis import (
    LoopAnalysis,
    NameAllocator,
    Packing,
    analyze_loop,
)
from .ast import (
    ArrayLit,
    Assign,
    Binary,
    Block,
    Builtin,
    Call,
    CallAssign,
    Cast,
    DoWhile,
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
    Param,
    Program,
    Return,
    Type,
    VOID,
    Var,
    VarDecl,
    While,
    array_of,
    assign_loop_ids,
    is_loop,
    iterator_of,
    loop_kind,
    program_loops,
)


class Mutation(Enum):
    """Seeded transformer defects for mutation testing."""

    DROP_FOR_UPDATE = "drop_for_update"
    COND_BEFORE_BODY = "cond_before_body"
    OMIT_RETURN_VAR = "omit_return_var"


@dataclass
class TransformOptions:
    optimize: bool = True
    mutation: Optional[Mutation] = None


@dataclass
class LoopReport:
    loop_id: int
    kind: str
    in_method: str
    loop_method_name: str
    packing: Packing
    loc: Optional[Loc]


@dataclass
class TransformResult:
    program: Program
    report: list


# ----------------------------------------------------------------- plumbing


def _collection_static_kind(expr: Expr, scope: dict) -> Optional[str]:
    """'array' or 'list' for a checked foreach collection expression."""
    ty = _expr_static_type(expr, scope)
    return ty.kind if ty is not None else None


def _expr_static_type(expr: Expr, scope: dict) -> Optional[Type]:
    if isinstance(expr, Var):
        return scope.get(expr.name)
    if isinstance(expr, ArrayLit):
        return OBJECT_ARRAY if expr.elem_type == OBJECT else array_of(expr.elem_type)
    if isinstance(expr, ListLit):
        return Type("list", expr.elem_type)
    if isinstance(expr, Index):
        base = _expr_static_type(expr.base, scope)
        return base.elem if base is not None and base.kind == "array" else None
    if isinstance(expr, Cast):
        return expr.type
    return None


def _returned(analysis: LoopAnalysis, opts: TransformOptions):
    """(packing, params to send back) after applying options and mutations."""
    returned = list(analysis.live_after if opts.optimize else analysis.params)
    if opts.mutation == Mutation.OMIT_RETURN_VAR and returned:
        returned = returned[:-1]
    if not opts.optimize:
        return Packing.OBJECT_ARRAY, returned
    if len(returned) == 0:
        return Packing.NONE, returned
    if len(returned) == 1:
        return Packing.SINGLE, returned
    return Packing.OBJECT_ARRAY, returned


def _invoke_seq(analysis: LoopAnalysis, opts: TransformOptions, args: list,
                loc: Optional[Loc]) -> list:
    """Caller-side first call plus catch/update of the modified variables."""
    packing, returned = _returned(analysis, opts)
    name = analysis.loop_method_name
    if packing == Packing.NONE:
        return [CallAssign(None, name, args, loc=loc)]
    if packing == Packing.SINGLE:
        return [CallAssign(returned[0].name, name, args, loc=loc)]
    result = analysis.result_var_name
    out = [CallAssign(result, name, args, decl_type=OBJECT_ARRAY, loc=loc)]
    for i, p in enumerate(returned):
        out.append(Assign(p.name, Cast(p.type, Index(Var(result), IntLit(i))), loc=loc))
    return out


def _has_decl(stmts: list) -> bool:
    return any(
        isinstance(st, VarDecl) or (isinstance(st, CallAssign) and st.decl_type is not None)
        for st in stmts
    )


def _maybe_block(stmts: list, opts: TransformOptions, loc: Optional[Loc]) -> list:
    """do/for/foreach replacements get a scope block; it is elided only when
    optimizing and the replacement declares nothing."""
    if opts.optimize and not _has_decl(stmts):
        return stmts
    return [Block(stmts, loc=loc)]


def _gen_method(analysis: LoopAnalysis, opts: TransformOptions, params: list,
                core: list, tail_cond: Expr, args: list,
                loc: Optional[Loc]) -> MethodDef:
    """The recursive method: one iteration, a guarded tail call, and a return
    of the modified variables."""
    packing, returned = _returned(analysis, opts)
    tail = If(tail_cond, [Return(Call(analysis.loop_method_name, list(args)), loc=loc)], loc=loc)
    if opts.mutation == Mutation.COND_BEFORE_BODY:
        body = [tail] + core
    else:
        body = core + [tail]
    if packing == Packing.NONE:
        ret_type, ret = VOID, None
    elif packing == Packing.SINGLE:
        ret_type, ret = returned[0].type, Var(returned[0].name)
    else:
        ret_type = OBJECT_ARRAY
        ret = ArrayLit(OBJECT, [Var(p.name) for p in returned])
    return MethodDef(ret_type, analysis.loop_method_name, params, body, ret, loc=loc)


# ------------------------------------------------------------ per-loop kinds


def transform_while(loop: While, method: MethodDef, analysis: LoopAnalysis,
                    opts: TransformOptions):
    """`while` becomes `if (cond) <call+catch>`; the method runs the body,
    re-checks the condition for the tail call, then returns. The guard's own
    braces scope any declared result variable, so no extra block is needed."""
    params = list(analysis.params)
    args = [Var(p.name) for p in params]
    replacement = [If(loop.cond, _invoke_seq(analysis, opts, args, loop.loc), loc=loop.loc)]
    gen = _gen_method(analysis, opts, params, list(loop.body), loop.cond, args, loop.loc)
    return replacement, gen


def transform_do(loop: DoWhile, method: MethodDef, analysis: LoopAnalysis,
                 opts: TransformOptions):
    """Same as the while case except the first call is unconditional (a do
    body always runs once); the unguarded catch code needs its own block when
    it declares anything."""
    params = list(analysis.params)
    args = [Var(p.name) for p in params]
    replacement = _maybe_block(_invoke_seq(analysis, opts, args, loop.loc), opts, loop.loc)
    gen = _gen_method(analysis, opts, params, list(loop.body), loop.cond, args, loop.loc)
    return replacement, gen


def transform_for(loop: For, method: MethodDef, analysis: LoopAnalysis,
                  opts: TransformOptions):
    """Init statements are hoisted to the top of the new block (keeping their
    scope confined to it), update statements run between the body and the
    condition check, and init-declared variables travel as parameters."""
    params = list(analysis.params)
    args = [Var(p.name) for p in params]
    seq = list(loop.init) + [If(loop.cond, _invoke_seq(analysis, opts, args, loop.loc), loc=loop.loc)]
    replacement = _maybe_block(seq, opts, loop.loc)
    core = list(loop.body)
    if opts.mutation != Mutation.DROP_FOR_UPDATE:
        core += list(loop.update)
    gen = _gen_method(analysis, opts, params, core, loop.cond, args, loop.loc)
    return replacement, gen


def transform_foreach_array(loop: Foreach, method: MethodDef, analysis: LoopAnalysis,
                            opts: TransformOptions, index_name: str,
                            coll_name: Optional[str] = None):
    """Array traversal gets a fresh counter passed along every call; the
    element variable is declared from `coll[index]` at the top of the method.
    A non-variable collection expression is hoisted so it is evaluated once."""
    coll_type = array_of(loop.elem_type)
    hoist = []
    if isinstance(loop.collection, Var):
        cname = loop.collection.name
        coll_param = next(p for p in analysis.params if p.name == cname)
        rest = [p for p in analysis.params if p.name != cname]
    else:
        cname = coll_name
        hoist = [VarDecl(coll_type, cname, loop.collection, loc=loop.loc)]
        coll_param = Param(cname, coll_type)
        rest = list(analysis.params)
    params = [coll_param] + rest + [Param(index_name, INT)]
    args = [Var(p.name) for p in params]
    guard = Binary("<", Var(index_name), Length(Var(cname)))
    seq = hoist + [
        VarDecl(INT, index_name, IntLit(0), loc=loop.loc),
        If(guard, _invoke_seq(analysis, opts, args, loop.loc), loc=loop.loc),
    ]
    replacement = _maybe_block(seq, opts, loop.loc)
    core = (
        [VarDecl(loop.elem_type, loop.elem_name, Index(Var(cname), Var(index_name)), loc=loop.loc)]
        + list(loop.body)
        + [Assign(index_name, Binary("+", Var(index_name), IntLit(1)), loc=loop.loc)]
    )
    gen = _gen_method(analysis, opts, params, core, guard, args, loop.loc)
    return replacement, gen


def transform_foreach_iterable(loop: Foreach, method: MethodDef, analysis: LoopAnalysis,
                               opts: TransformOptions, iterator_name: str):
    """List traversal threads an iterator instead of a counter: hasNext guards
    both calls and next() yields the element at the top of the method."""
    iter_type = iterator_of(loop.elem_type)
    params = list(analysis.params) + [Param(iterator_name, iter_type)]
    args = [Var(p.name) for p in params]
    guard = Builtin("hasNext", [Var(iterator_name)])
    seq = [
        VarDecl(iter_type, iterator_name, Builtin("iterator", [loop.collection]), loc=loop.loc),
        If(guard, _invoke_seq(analysis, opts, args, loop.loc), loc=loop.loc),
    ]
    replacement = _maybe_block(seq, opts, loop.loc)
    core = (
        [VarDecl(loop.elem_type, loop.elem_name, Builtin("next", [Var(iterator_name)]), loc=loop.loc)]
        + list(loop.body)
    )
    gen = _gen_method(analysis, opts, params, core, guard, args, loop.loc)
    return replacement, gen


# ------------------------------------------------------------------- driver


@dataclass
class _PlannedLoop:
    analysis: LoopAnalysis
    kind: str  # while | do | for | foreach_array | foreach_list
    in_method: str
    index_name: Optional[str] = None
    iterator_name: Optional[str] = None
    coll_name: Optional[str] = None


def _plan(program: Program, opts: TransformOptions) -> dict:
    """Analyze every loop against the untouched program, allocating fresh
    names in document order (an outer loop is named before its inner loops)."""
    from .analysis import _scope_at

    alloc = NameAllocator(program)
    plans = {}
    for method, loop in program_loops(program):
        names = (alloc.fresh(f"{method.name}_loop"), alloc.fresh("result"))
        analysis = analyze_loop(loop, method, program, optimize=opts.optimize, names=names)
        plan = _PlannedLoop(analysis, loop_kind(loop), method.name)
        if isinstance(loop, Foreach):
            scope = _scope_at(method, loop)
            kind = _collection_static_kind(loop.collection, scope or {})
            if kind == "list":
                plan.kind = "foreach_list"
                plan.iterator_name = alloc.fresh("it")
            else:
                plan.kind = "foreach_array"
                plan.index_name = alloc.fresh("index")
                if not isinstance(loop.collection, Var):
                    plan.coll_name = alloc.fresh("coll")
        plans[loop.loop_id] = plan
    return plans


def _rewrite_seq(stmts: list, method: MethodDef, opts: TransformOptions,
                 plans: dict, generated: list, report: list) -> list:
    out = []
    for st in stmts:
        if is_loop(st):
            body = _rewrite_seq(st.body, method, opts, plans, generated, report)
            loop = replace(st, body=body)
            plan = plans[st.loop_id]
            if isinstance(loop, While):
                repl, gen = transform_while(loop, method, plan.analysis, opts)
            elif isinstance(loop, DoWhile):
                repl, gen = transform_do(loop, method, plan.analysis, opts)
            elif isinstance(loop, For):
                repl, gen = transform_for(loop, method, plan.analysis, opts)
            elif plan.kind == "foreach_array":
                repl, gen = transform_foreach_array(
                    loop, method, plan.analysis, opts, plan.index_name, plan.coll_name)
            else:
                repl, gen = transform_foreach_iterable(
                    loop, method, plan.analysis, opts, plan.iterator_name)
            generated.append(gen)
            report.append(LoopReport(
                loop_id=st.loop_id,
                kind=plan.kind,
                in_method=plan.in_method,
                loop_method_name=plan.analysis.loop_method_name,
                packing=_returned(plan.analysis, opts)[0],
                loc=st.loc,
            ))
            out.extend(repl)
        elif isinstance(st, If):
            out.append(replace(
                st,
                then=_rewrite_seq(st.then, method, opts, plans, generated, report),
                orelse=(_rewrite_seq(st.orelse, method, opts, plans, generated, report)
                        if st.orelse else st.orelse),
            ))
        elif isinstance(st, Block):
            out.append(replace(st, body=_rewrite_seq(st.body, method, opts, plans, generated, report)))
        else:
            out.append(st)
    return out


def analyze_program(program: Program, optimize: bool = True) -> list:
    """Per-loop analyses with the names the rewrite would use, in document
    order: (loop_id, kind, enclosing method, LoopAnalysis)."""
    opts = TransformOptions(optimize=optimize)
    assign_loop_ids(program)
    plans = _plan(program, opts)
    return [(loop_id, plan.kind, plan.in_method, plan.analysis)
            for loop_id, plan in sorted(plans.items())]


def transform_program(program: Program, opts: Optional[TransformOptions] = None) -> TransformResult:
    """Rewrite every loop in the program; generated methods are appended after
    the originals in creation order (innermost loops first). Loop-free
    programs come back unchanged with an empty report."""
    opts = opts or TransformOptions()
    assign_loop_ids(program)
    plans = _plan(program, opts)
    generated: list = []
    report: list = []
    methods = []
    for m in program.methods:
        body = _rewrite_seq(m.body, m, opts, plans, generated, report)
        methods.append(MethodDef(m.ret_type, m.name, m.params, body, m.ret, loc=m.loc))
    out = Program(methods + generated, entry=program.entry)
    report.sort(key=lambda r: r.loop_id)
    return TransformResult(out, report)
