import math

import pytest

from loop2rec.interp import (
    ArityMismatchError,
    DivisionByZeroError,
    DoubleV,
    EmptyStateError,
    Frame,
    IndexOutOfBoundsError,
    IntV,
    MissingReturnError,
    SingleFrameError,
    State,
    StepBudgetExceeded,
    UnboundVariableError,
    add_frame,
    eval_expr,
    rem_frame,
    run,
    upd_r,
    upd_v,
    upd_vr,
    values_equal,
)
from loop2rec.parser import parse

from conftest import corpus_text


def state(*frames):
    return State([Frame(dict(f)) for f in frames])


def bindings(s):
    return [dict(f.bindings) for f in s.frames]


# ------------------------------------------------------------- state ops


def test_upd_v_rebinds_top_frame():
    s = state({"x": IntV(1)})
    upd_v(s, "x", IntV(2))
    assert bindings(s) == [{"x": IntV(2)}]


def test_upd_v_empty_state_errors():
    with pytest.raises(EmptyStateError):
        upd_v(state(), "x", IntV(2))


def test_upd_v_touches_only_the_last_frame():
    s = state({"x": IntV(1)}, {"x": IntV(5)})
    upd_v(s, "x", IntV(9))
    assert bindings(s) == [{"x": IntV(1)}, {"x": IntV(9)}]


def test_upd_r_records_return_value():
    s = state({"b": DoubleV(2.0)})
    upd_r(s, DoubleV(2.0))
    assert s.top().ret_slot == DoubleV(2.0)
    assert bindings(s) == [{"b": DoubleV(2.0)}]


def test_upd_r_empty_state_errors():
    with pytest.raises(EmptyStateError):
        upd_r(state(), IntV(1))


def test_upd_r_only_top_frame_gains_slot():
    s = state({"a": IntV(0)}, {"b": IntV(1)})
    upd_r(s, IntV(7))
    assert s.frames[0].ret_slot is None
    assert s.frames[1].ret_slot == IntV(7)


def test_upd_vr_copies_return_into_penultimate():
    # x starts at z0 in both frames; the callee computed and returned z1
    z0, z1 = IntV(0), IntV(1)
    s = state({"x": z0}, {"x": z1})
    upd_r(s, z1)
    upd_vr(s, "x")
    assert bindings(s) == [{"x": z1}, {"x": z1}]
    assert s.top().ret_slot == z1


def test_upd_vr_single_frame_errors():
    s = state({"x": IntV(1)})
    upd_r(s, IntV(1))
    with pytest.raises(SingleFrameError):
        upd_vr(s, "x")


def test_upd_vr_without_return_errors():
    with pytest.raises(MissingReturnError):
        upd_vr(state({"x": IntV(1)}, {"x": IntV(2)}), "x")


def test_upd_vr_creates_missing_binding():
    s = state({}, {"x": IntV(2)})
    upd_r(s, IntV(2))
    upd_vr(s, "y")
    assert s.frames[0].bindings == {"y": IntV(2)}


def test_add_frame_binds_evaluated_arguments():
    # arguments are evaluated in the caller's frame, then the frame is pushed
    from loop2rec.ast import Var
    s = state({"x": DoubleV(4.0), "b": DoubleV(4.0)})
    values = [eval_expr(Var("x"), s), eval_expr(Var("b"), s)]
    add_frame(s, ["x", "b"], values)
    assert bindings(s)[-1] == {"x": DoubleV(4.0), "b": DoubleV(4.0)}


def test_add_frame_zero_params():
    s = state({"x": IntV(1)})
    add_frame(s, [], [])
    assert bindings(s)[-1] == {}


def test_add_frame_arity_mismatch():
    with pytest.raises(ArityMismatchError):
        add_frame(state(), ["a"], [])


def test_rem_frame_cases():
    s = state({"a": IntV(0)}, {"b": IntV(1)})
    rem_frame(s)
    assert len(s.frames) == 1
    rem_frame(s)
    assert s.frames == []
    with pytest.raises(EmptyStateError):
        rem_frame(s)


# ------------------------------------------------------------ evaluation


def eval_src(expr_src: str, frame: dict):
    program = parse(f"void m() {{ bool probe = {expr_src}; }}")
    e = program.methods[0].body[0].init
    return eval_expr(e, state(frame))


def test_eval_termination_condition_false_at_root():
    v = eval_src("abs(b * b - x) > 1e-12",
                 {"x": DoubleV(4.0), "b": DoubleV(2.0)})
    assert v.value is False


def test_eval_variable_lookup():
    from loop2rec.ast import Var
    assert eval_expr(Var("x"), state({"x": DoubleV(4.0)})) == DoubleV(4.0)


def test_eval_first_newton_step():
    # one refinement from b = 4 toward sqrt(4): ((4/4) + 4) / 2 = 2.5 by hand
    program = parse("void m() { double r = ((4.0 / 4.0) + 4.0) / 2.0; }")
    v = eval_expr(program.methods[0].body[0].init, state({}))
    assert v == DoubleV(2.5)


def test_eval_nan_propagates():
    v = eval_src("nan() + 1.0 > 0.0", {})
    assert v.value is False  # NaN comparisons are false
    program = parse("void m() { double r = nan() * 0.0; }")
    v = eval_expr(program.methods[0].body[0].init, state({}))
    assert math.isnan(v.value)


def test_integer_division_truncates_toward_zero():
    program = parse("void m() { int q = 0 - 7; }")
    neg7 = eval_expr(program.methods[0].body[0].init, state({}))
    s = state({"a": neg7, "b": IntV(2)})
    program = parse("void m() { int q = a / b; }")
    assert eval_expr(program.methods[0].body[0].init, s) == IntV(-3)


def test_integer_division_by_zero_errors():
    program = parse("void m() { int q = 1 / 0; }")
    with pytest.raises(DivisionByZeroError):
        eval_expr(program.methods[0].body[0].init, state({}))


def test_double_division_by_zero_is_ieee():
    program = parse("void m() { double q = 1.0 / 0.0; }")
    assert eval_expr(program.methods[0].body[0].init, state({})).value == math.inf
    program = parse("void m() { double q = 0.0 / 0.0; }")
    assert math.isnan(eval_expr(program.methods[0].body[0].init, state({})).value)


def test_int_arithmetic_wraps_32_bits():
    s = state({"big": IntV(2147483647)})
    program = parse("void m() { int q = big + 1; }")
    assert eval_expr(program.methods[0].body[0].init, s) == IntV(-2147483648)


def test_abs_wraps_at_int_min():
    program = parse("void m() { int q = abs(-2147483648); }")
    assert eval_expr(program.methods[0].body[0].init, state({})) == IntV(-2147483648)


def test_short_circuit_skips_rhs():
    # the rhs would divide by zero; && must never reach it
    program = parse("void m() { bool ok = false && 1 / 0 == 0; }")
    assert eval_expr(program.methods[0].body[0].init, state({})).value is False


def test_unbound_variable_errors():
    from loop2rec.ast import Var
    with pytest.raises(UnboundVariableError):
        eval_expr(Var("ghost"), state({}))


def test_index_out_of_bounds():
    program = parse("void m() { double q = new double[] { 1.0 }[3]; }")
    with pytest.raises(IndexOutOfBoundsError):
        eval_expr(program.methods[0].body[0].init, state({}))


def test_iterator_builtins_walk_a_list():
    program = parse("""
void m() {
    List<double> l = new List<double> { 1.5, 2.5 };
    Iterator<double> it = iterator(l);
}
""")
    s = state({})
    lst = eval_expr(program.methods[0].body[0].init, s)
    upd_v(s, "l", lst)
    it = eval_expr(program.methods[0].body[1].init, s)
    upd_v(s, "it", it)
    seen = []
    from loop2rec.ast import Builtin, Var
    while eval_expr(Builtin("hasNext", [Var("it")]), s).value:
        seen.append(eval_expr(Builtin("next", [Var("it")]), s).value)
    assert seen == [1.5, 2.5]
    with pytest.raises(IndexOutOfBoundsError):
        eval_expr(Builtin("next", [Var("it")]), s)


# ------------------------------------------------------------------- runs


def run_src(src: str, budget: int = 1_000_000):
    return run(parse(src), budget=budget)


def test_run_sqrt_four():
    trace = run(parse(corpus_text("sqrt.mj")))
    value = trace.final_bindings["r"]
    assert abs(value.value - math.sqrt(4.0)) <= 1e-6
    assert trace.prints == [repr(value.value)]


def test_run_sqrt_negative_is_nan():
    src = corpus_text("sqrt.mj").replace("sqrt(4.0)", "sqrt(-1.0)")
    trace = run(parse(src))
    assert math.isnan(trace.final_bindings["r"].value)
    assert trace.prints == ["NaN"]


def test_run_infinite_loop_hits_budget():
    with pytest.raises(StepBudgetExceeded):
        run(parse(corpus_text("infinite.mj")), budget=100_000)


def test_call_by_value_rebinding_invisible_to_caller():
    trace = run_src("""
void touch(int x) {
    x = 99;
}

void main() {
    int x = 1;
    touch(x);
    print(x);
}
""")
    assert trace.prints == ["1"]


def test_arrays_share_cells_across_calls():
    trace = run_src("""
void set0(double[] xs) {
    xs[0] = 9.5;
}

void main() {
    double[] xs = new double[] { 1.0 };
    set0(xs);
    print(xs[0]);
}
""")
    assert trace.prints == ["9.5"]


def test_for_with_two_indexes():
    # by hand: (0,8)+8 (1,7)+6 (2,6)+4 (3,5)+2 then i=4,j=4 stops -> 20
    trace = run(parse(corpus_text("two_index.mj")))
    assert trace.prints == ["20"]
    assert trace.loop_iterations[0] == 4


def test_nested_whiles():
    # by hand: i=3: 6+3; i=2: 4+2; i=1: 2+1 -> 18
    trace = run(parse(corpus_text("nested.mj")))
    assert trace.prints == ["18"]
    assert trace.loop_iterations == {0: 3, 1: 6}


def test_two_live_totals():
    trace = run(parse(corpus_text("two_live.mj")))
    assert trace.prints == ["15", "120"]  # 5+4+3+2+1 and 5!


def test_do_loop_runs_at_least_once():
    trace = run_src("""
void main() {
    int n = 0;
    do {
        n = n + 1;
    } while (false);
    print(n);
}
""")
    assert trace.prints == ["1"]
    assert trace.loop_iterations[0] == 1


def test_foreach_iterates_in_order():
    trace = run(parse(corpus_text("one_elem.mj")))
    assert trace.prints == ["2.5"]
    assert trace.loop_iterations[0] == 1


def test_entry_result_recorded():
    trace = run_src("int main() { return 41; }")
    assert trace.result == IntV(41)


def test_determinism_bit_for_bit():
    src = corpus_text("sqrt_for.mj")
    a = run(parse(src))
    b = run(parse(src))
    assert a.prints == b.prints
    assert a.steps == b.steps
    assert a.loop_iterations == b.loop_iterations
    assert a.method_entries == b.method_entries
    assert set(a.final_bindings) == set(b.final_bindings)
    for name in a.final_bindings:
        assert values_equal(a.final_bindings[name], b.final_bindings[name])


def test_values_equal_is_bitwise_for_doubles():
    assert values_equal(DoubleV(math.nan), DoubleV(math.nan))
    assert not values_equal(DoubleV(0.0), DoubleV(-0.0))
    assert not values_equal(DoubleV(1.0), IntV(1))


def test_frame_balance_every_push_is_popped():
    # one frame (the entry activation) remains at the end of every run
    from loop2rec.interp import StateRecorder
    from loop2rec.generator import GenConfig, generate
    from loop2rec.transform import transform_program

    programs = [parse(corpus_text(n)) for n in
                ("sqrt.mj", "nested.mj", "foreach_iterable.mj")]
    programs += [generate(GenConfig(seed=s)) for s in range(30)]
    programs += [transform_program(p).program for p in programs[:10]]
    for program in programs:
        rec = StateRecorder()
        run(program, recorder=rec)
        ops = rec.ops()
        assert ops.count("add_frame") == ops.count("rem_frame") + 1
