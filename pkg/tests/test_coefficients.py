import math
import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from haltseries import (
    BuiltinId,
    ExplicitStream,
    approx_decimal,
    builtin_stream,
    coefficient_at,
    format_rational,
    halted_by,
    halting_coefficients,
    parse_program,
    parse_rational,
    parse_series_spec,
    run_bounded,
)

import corpus


def test_self_loop_stream_is_identically_zero():
    program = parse_program("loop: decjz 1 loop")
    stream = halting_coefficients(program, 0)
    assert all(stream.at(n) == 0 for n in range(1001))


def test_three_step_program_factorial_tail():
    program = parse_program("inc 0\ninc 0\nhalt")
    stream = halting_coefficients(program, 0)
    # halt step is 3, so the tail starts there: 3! = 6, 4! = 24, 5! = 120
    assert [stream.at(n) for n in range(6)] == [0, 0, 0, 6, 24, 120]


def test_minimal_halt_program_values():
    stream = halting_coefficients(parse_program("halt"), 0)
    assert [stream.at(n) for n in range(4)] == [0, 1, 2, 6]


def test_builtin_values():
    assert coefficient_at(builtin_stream("harmonic"), 4) == Fraction(1, 5)
    tail = builtin_stream("factorial_tail", 2)
    assert tail.at(1) == 0
    assert tail.at(4) == 24
    geometric = builtin_stream("geometric", Fraction(1, 2))
    assert geometric.at(3) == Fraction(1, 8)
    assert builtin_stream("geometric", 2).at(3) == 8
    assert all(builtin_stream("zero").at(n) == 0 for n in range(20))
    assert builtin_stream("factorial_tail", 0).at(6) == 720
    alternating = builtin_stream("alternating")
    assert (alternating.at(4), alternating.at(5)) == (1, -1)
    assert builtin_stream("reciprocal_factorial").at(5) == Fraction(1, 120)


def test_builtin_rejects_bad_arity_and_params():
    with pytest.raises(ValueError):
        builtin_stream("nonsense")
    with pytest.raises(ValueError):
        builtin_stream("one", 3)
    with pytest.raises(ValueError):
        builtin_stream("geometric")
    with pytest.raises(ValueError):
        builtin_stream("factorial_tail", Fraction(1, 2))
    with pytest.raises(ValueError):
        builtin_stream("factorial_tail", -1)


def test_explicit_stream_prefix_then_tail():
    stream = ExplicitStream((Fraction(5), Fraction(-1, 3)), Fraction(7))
    assert [stream.at(n) for n in range(4)] == [5, Fraction(-1, 3), 7, 7]


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        coefficient_at(builtin_stream("one"), -1)


def test_support_is_upward_closed_on_corpus():
    rng = random.Random(7)
    for case, program in corpus.halting_programs() + corpus.non_halting_programs():
        stream = halting_coefficients(program, case.input_value)
        samples = sorted(rng.sample(range(10 ** 4), 40))
        seen_nonzero = False
        for n in samples:
            nonzero = stream.at(n) != 0
            if seen_nonzero:
                assert nonzero, case.name
            seen_nonzero = seen_nonzero or nonzero


def test_agrees_with_piecewise_formula_via_independent_run():
    for case, program in corpus.halting_programs() + corpus.non_halting_programs():
        stream = halting_coefficients(program, case.input_value)
        outcome = run_bounded(program, case.input_value, 200)
        for n in range(201):
            if outcome.halted and n >= outcome.steps:
                expected = Fraction(math.factorial(n))
            else:
                expected = Fraction(0)
            assert stream.at(n) == expected, (case.name, n)


def test_memoization_costs_one_simulation_pass():
    program = parse_program("loop: inc 1\ndecjz 2 loop")
    stream = halting_coefficients(program, 0)
    for n in (500, 100, 250, 500, 499):
        stream.at(n)
    assert stream.simulated_steps == 500
    stream.at(800)
    assert stream.simulated_steps == 800


def test_memoized_values_match_fresh_evaluation_in_any_order():
    program = parse_program(corpus.HALTING[4].source)  # drain_three, halts at 14
    memoized = halting_coefficients(program, 0)
    order = list(range(40))
    random.Random(3).shuffle(order)
    for n in order:
        fresh = halting_coefficients(program, 0)
        assert memoized.at(n) == fresh.at(n)


def test_concurrent_reads_are_consistent():
    program = parse_program("loop: inc 1\ndecjz 2 loop")
    stream = halting_coefficients(program, 0)
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(stream.at, range(400)))
    assert results == [0] * 400
    halting = halting_coefficients(parse_program("inc 0\ninc 0\nhalt"), 0)
    with ThreadPoolExecutor(max_workers=8) as pool:
        values = list(pool.map(halting.at, range(50)))
    assert values[:3] == [0, 0, 0]
    assert all(values[n] == math.factorial(n) for n in range(3, 50))


def test_halting_coefficient_matches_halted_by_pointwise():
    for case, program in corpus.halting_programs():
        stream = halting_coefficients(program, case.input_value)
        for n in range(min(case.halt_step + 5, 60)):
            expect_nonzero = halted_by(program, case.input_value, n)
            assert (stream.at(n) != 0) == expect_nonzero


rationals = st.fractions(
    min_value=-1000, max_value=1000, max_denominator=997
)


@given(rationals, rationals)
def test_rational_arithmetic_is_exact(a, b):
    assert (a + b) - b == a
    assert parse_rational(format_rational(a)) == a


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------


def test_parse_rational_accepts_both_notations():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("-6/8") == Fraction(-3, 4)
    assert parse_rational("5") == Fraction(5)
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("abc")


def test_format_rational_lowest_terms():
    assert format_rational(Fraction(6, 8)) == "3/4"
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-1, 3)) == "-1/3"


def test_approx_decimal_is_deterministic_round_half_even():
    assert approx_decimal(Fraction(1, 3)) == "0.333333333333"
    assert approx_decimal(Fraction(-1, 2)) == "-0.500000000000"
    assert approx_decimal(Fraction(15, 8)) == "1.875000000000"
    # ties land on the even neighbor
    assert approx_decimal(Fraction(5, 10 ** 13)) == "0.000000000000"
    assert approx_decimal(Fraction(15, 10 ** 13)) == "0.000000000002"


def test_parse_series_spec_builtin():
    stream = parse_series_spec("builtin geometric 1/2")
    assert stream.at(3) == Fraction(1, 8)
    assert parse_series_spec("# note\n\nbuiltin one\n").at(9) == 1


def test_parse_series_spec_explicit():
    stream = parse_series_spec("explicit 1 1/2 -3 | tail 2")
    assert [stream.at(n) for n in range(5)] == [1, Fraction(1, 2), -3, 2, 2]
    bare = parse_series_spec("explicit 1 2")
    assert (bare.at(1), bare.at(2)) == (2, 0)


def test_parse_series_spec_halting(tmp_path):
    (tmp_path / "prog.machine").write_text("inc 0\ninc 0\nhalt\n")
    stream = parse_series_spec("halting prog.machine 0", base_dir=tmp_path)
    assert stream.at(3) == 6


@pytest.mark.parametrize(
    "text",
    [
        "",
        "builtin one\nbuiltin zero",
        "builtin",
        "halting only_one_token",
        "halting prog.machine x",
        "explicit 1 2 | tail",
        "explicit 1 2 | cap 3",
        "mystery 1 2",
    ],
)
def test_parse_series_spec_rejects_malformed(text, tmp_path):
    (tmp_path / "prog.machine").write_text("halt\n")
    with pytest.raises(ValueError):
        parse_series_spec(text, base_dir=tmp_path)


def test_builtin_id_from_name_variants():
    assert BuiltinId.from_name("Reciprocal-Factorial") is BuiltinId.RECIPROCAL_FACTORIAL
    with pytest.raises(ValueError):
        BuiltinId.from_name("exp")
