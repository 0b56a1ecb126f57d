from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pgnkit import (DeltaProfile, Dims, PiecewisePath, anchor_sequence, average_delta, build_f1,
                    build_fk, closed_form_delta, count_pairs, delta_on_piece, equality_intervals,
                    m_plus_minus, s_plus, score_template)
from pgnkit.template_core import zero_path
from pgnkit.errors import DomainError, InvalidTemplateError

D21 = Dims(2, 1)
SMALL = [Dims(m, n) for m in range(1, 5) for n in range(1, 5)]


def test_closed_form_targets():
    assert closed_form_delta(D21) == F(4, 3)
    assert closed_form_delta(Dims(1, 1)) == F(1, 2)
    assert closed_form_delta(Dims(3, 2)) == F(24, 5)


def test_equality_intervals_on_first_block():
    f = build_f1(D21, 3)
    for piece in [(0, 1), (1, 3)]:
        ivs = equality_intervals(f, piece)
        assert [(iv.p, iv.q) for iv in ivs] == [(0, 1), (1, 3)]


def test_zero_template_is_one_equality_interval():
    z = zero_path(Dims(2, 3), 4)
    ivs = equality_intervals(z, (0, 4))
    assert [(iv.p, iv.q) for iv in ivs] == [(0, 5)]
    assert m_plus_minus(z, ivs[0]) == (2, 3)


@pytest.mark.parametrize("dims", SMALL, ids=lambda d: f"m{d.m}n{d.n}")
def test_first_block_tables(dims):
    m, n, d = dims.m, dims.n, dims.d
    f = build_f1(dims, d)
    k1, k2 = (0, n), (n, d)
    ivs1, ivs2 = equality_intervals(f, k1), equality_intervals(f, k2)
    assert [m_plus_minus(f, iv)[0] for iv in ivs1] == [0, m]
    assert [m_plus_minus(f, iv)[0] for iv in ivs2] == [1, m - 1]
    sp1, sm1 = s_plus(f, k1)
    assert sp1 == tuple(range(2, m + 2))
    assert sm1 == (1,) + tuple(range(m + 2, d + 1))
    assert s_plus(f, k2)[0] == tuple(range(1, m + 1))
    assert delta_on_piece(f, k1) == m * (n - 1)
    assert delta_on_piece(f, k2) == m * n


def test_11_first_piece_has_no_pairs():
    f = build_f1(Dims(1, 1), 2)
    assert s_plus(f, (0, 1)) == ((2,), (1,))
    assert delta_on_piece(f, (0, 1)) == 0


def test_block_rescaling_keeps_delta():
    for dims in [D21, Dims(3, 2), Dims(2, 4)]:
        f = build_f1(dims, 2000)
        d, n = dims.d, dims.n
        first = [delta_on_piece(f, (0, n)), delta_on_piece(f, (n, d))]
        for p in range(2, 8):
            b = F(d * p * (p - 1), 2)
            assert [delta_on_piece(f, (b, b + p * n)), delta_on_piece(f, (b + p * n, b + p * d))] == first


def test_averages_on_small_horizons():
    f = build_f1(D21, 9)
    assert average_delta(f, 3) == F(4, 3)
    assert average_delta(f, 1) == 0
    assert average_delta(f, 2) == 1


def test_level_three_average_at_last_anchor():
    lt = build_fk(Dims(3, 2), 3, 2000)
    assert average_delta(lt, lt.anchors[-1]) == F(24, 5)


def test_piece_errors():
    f = build_f1(D21, 9)
    with pytest.raises(DomainError, match="degenerate"):
        delta_on_piece(f, (1, 1))
    with pytest.raises(DomainError, match="not linear"):
        delta_on_piece(f, (0, 3))
    with pytest.raises(DomainError, match="outside"):
        delta_on_piece(f, (8, 10))
    with pytest.raises(DomainError):
        average_delta(f, 0)
    with pytest.raises(DomainError):
        average_delta(f, 10)


def test_non_template_slopes_are_rejected():
    # slope sum 1/3 over a single-component block has no integral M+
    bad = PiecewisePath(Dims(1, 1), (0, 1), ((0, 0), (F(-1, 3), F(1, 3))))
    with pytest.raises(InvalidTemplateError, match="nonnegative integers"):
        delta_on_piece(bad, (0, 1))


def test_score_report_contents():
    lt = build_f1(D21, 9)
    rep = score_template(lt, 3)
    assert rep.average == rep.target == F(4, 3)
    assert rep.abs_error == 0
    doc = rep.to_dict()
    assert doc["average"] == "4/3" and doc["abs_error"] == "0/1"
    assert [s["delta"] for s in doc["segments"]] == [0, 2]
    assert doc["segments"][1]["S_plus"] == [1, 2]
    assert "not a certified" in doc["liminf_note"]
    partial = score_template(lt, F(5, 2))
    assert partial.segments[-1].piece == (1, F(5, 2))


def test_liminf_proxy_is_below_running_average():
    lt = build_fk(Dims(2, 2), 1, 1000)
    prof = DeltaProfile(lt)
    for T in (100, 500, 1000):
        assert prof.liminf_estimate(T) <= prof.average(T)


# --------------------------------------------------------------------------
# properties

dims_st = st.builds(Dims, st.integers(1, 4), st.integers(1, 4))


@settings(max_examples=30, deadline=None)
@given(dims_st, st.integers(0, 3), st.integers(5, 3000))
def test_piecewise_invariants_on_builder_outputs(dims, k, T):
    lt = build_fk(dims, k, T)
    d, mn = dims.d, dims.m * dims.n
    for a, b in lt.path.pieces():
        ivs = equality_intervals(lt, (a, b))
        cover = [i for iv in ivs for i in range(iv.p + 1, iv.q + 1)]
        assert cover == list(range(1, d + 1))
        for iv in ivs:
            mp, mm = m_plus_minus(lt, iv)
            assert mp >= 0 and mm >= 0 and mp + mm == iv.size
            assert F(mp, dims.m) - F(mm, dims.n) == iv.slope_sum
        sp, sm = s_plus(lt, (a, b))
        assert sorted(sp + sm) == list(range(1, d + 1))
        assert 0 <= delta_on_piece(lt, (a, b)) <= mn


def _pairs_by_formula(sp, sm):
    return sum(sum(1 for j in sm if j > i) for i in sp)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 9).flatmap(lambda d: st.tuples(st.just(d), st.sets(st.integers(1, d)))))
def test_pair_count_matches_formula(case):
    d, sp = case
    sm = sorted(set(range(1, d + 1)) - sp)
    sp = sorted(sp)
    assert count_pairs(sp, sm) == _pairs_by_formula(sp, sm)
    assert 0 <= count_pairs(sp, sm) <= len(sp) * len(sm)


@settings(max_examples=30, deadline=None)
@given(dims_st, st.integers(0, 3), st.integers(2, 15), st.fractions(0, 1))
def test_bounded_deviation_between_anchors(dims, k, q, frac):
    anchors = anchor_sequence(dims, k, q + 2)
    c0, c1 = anchors[q], anchors[q + 1]
    assume(c0 > 0)
    lt = build_fk(dims, k, c1)
    T = c0 + (c1 - c0) * frac
    target = closed_form_delta(dims)
    avg = average_delta(lt, T)
    assert abs(avg - target) <= dims.m * dims.n * (c1 - c0) / T
    assert average_delta(lt, c0) == target

