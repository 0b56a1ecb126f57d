from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pgnkit import Dims, build_fk, validate_template
from mutations import break_convexity, break_order, break_slope, convexity_candidates

cases = st.tuples(st.builds(Dims, st.integers(1, 4), st.integers(1, 4)),
                  st.integers(0, 2), st.integers(20, 400))


@settings(max_examples=60, deadline=None)
@given(cases, st.data())
def test_order_mutation_is_flagged_at_the_breakpoint(case, data):
    lt = build_fk(*case)
    k = data.draw(st.integers(1, len(lt.path.breakpoints) - 2))
    mut = break_order(lt.path, k)
    rep = validate_template(mut.path)
    assert "a" in rep.failed_axioms
    assert mut.witnessed(rep)


@settings(max_examples=60, deadline=None)
@given(cases, st.data())
def test_slope_mutation_is_flagged_on_the_incoming_piece(case, data):
    lt = build_fk(*case)
    k = data.draw(st.integers(1, len(lt.path.breakpoints) - 1))
    mut = break_slope(lt.path, k)
    rep = validate_template(mut.path)
    assert "b" in rep.failed_axioms
    assert mut.witnessed(rep)


@settings(max_examples=60, deadline=None)
@given(cases, st.data())
def test_convexity_mutation_breaks_only_axiom_c(case, data):
    lt = build_fk(*case)
    ks = convexity_candidates(lt.path)
    assume(ks)
    mut = break_convexity(lt.path, data.draw(st.sampled_from(ks)))
    assume(mut is not None)
    rep = validate_template(mut.path)
    assert rep.failed_axioms == {"c"}
    assert mut.witnessed(rep)
