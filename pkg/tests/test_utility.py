import itertools
import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratchoice.errors import CompletenessError, DomainError, EmptyInputError, InsufficientOptionsError, LoadError
from ratchoice.utility import (
    Alternative,
    Preference,
    TransitivityWarning,
    check_completeness,
    check_transitivity,
    classify_preference,
    inverse_cost,
    inverse_cost_utility,
    opportunity_cost,
    rank_alternatives,
    read_alternatives_csv,
    select_best,
    utility_comparator,
)


@pytest.mark.parametrize(
    "cost, expected",
    [(18, 0.05555556), (36, 0.02777778), (24, 0.04166667), (26, 0.03846154), (1, 1.0)],
)
def test_inverse_cost_table_values(cost, expected):
    assert inverse_cost_utility(cost) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("bad", [0, -3, math.inf, math.nan])
def test_inverse_cost_rejects_bad_cost(bad):
    with pytest.raises(DomainError, match="JHB-X"):
        inverse_cost_utility(bad, "JHB-X")


def test_alternative_rejects_nonpositive_cost():
    with pytest.raises(DomainError):
        Alternative("a", "a", 0.0)


def test_rank_four_routes(routes):
    ranked = rank_alternatives(routes)
    assert [a.id for a, _ in ranked] == ["JHB-NY", "JHB-LN-NY", "JHB-PR-NY", "JHB-DB-NY"]


def test_rank_single_and_ties():
    one = [Alternative("x", "x", 5.0)]
    assert rank_alternatives(one) == [(one[0], 0.2)]
    tied = [Alternative(i, i, 3.0) for i in "dbca"]
    ranked = rank_alternatives(tied)
    assert [a.id for a, _ in ranked] == ["a", "b", "c", "d"]
    assert len({u for _, u in ranked}) == 1


def test_rank_empty_and_duplicates():
    with pytest.raises(EmptyInputError):
        rank_alternatives([])
    with pytest.raises(DomainError):
        rank_alternatives([Alternative("a", "a", 1.0), Alternative("a", "b", 2.0)])


def test_rank_rejects_nonfinite_utility():
    with pytest.raises(DomainError):
        rank_alternatives([Alternative("a", "a", 1.0)], lambda a: math.nan)


def test_select_best(routes):
    best, u = select_best(routes)
    assert best.id == "JHB-NY"
    assert u == pytest.approx(0.05555556, abs=1e-6)
    only = Alternative("o", "o", 7.0)
    assert select_best([only])[0] is only


def test_select_best_matches_exhaustive_comparison():
    alts = [Alternative(f"c{c}", "", float(c)) for c in (2, 4, 8)]
    best, u = select_best(alts)
    oracle = max(alts, key=lambda a: 1.0 / a.cost)
    assert best is oracle and u == 0.5


def test_classify_preference():
    assert classify_preference(0.5, 0.5, 0) is Preference.INDIFFERENT
    assert classify_preference(0.05555556, 0.04166667, 1e-9) is Preference.STRICTLY_PREFERRED
    assert classify_preference(0.04166667, 0.05555556, 1e-9) is Preference.STRICTLY_DISPREFERRED
    assert classify_preference(0.1, 0.100000001, 1e-6) is Preference.INDIFFERENT
    assert Preference.INDIFFERENT.weakly_preferred and not Preference.STRICTLY_DISPREFERRED.weakly_preferred
    with pytest.raises(DomainError):
        classify_preference(math.nan, 0.0)


def test_completeness(routes):
    assert check_completeness(routes, utility_comparator()) == []
    assert check_completeness([], utility_comparator()) == []
    a, b, c = (Alternative(i, i, 1.0 + k) for k, i in enumerate("abc"))

    def partial(x, y):
        if {x.id, y.id} == {"a", "c"}:
            return None
        return utility_comparator()(x, y)

    assert check_completeness([a, b, c], partial) == [(a, c)]


def test_completeness_brute_force_pair_count(routes):
    calls = []

    def counting(x, y):
        calls.append((x.id, y.id))
        return utility_comparator()(x, y)

    check_completeness(routes, counting)
    assert len(calls) == 6


def test_transitivity_cycle_and_table(routes):
    assert check_transitivity(routes, utility_comparator()) == []
    a, b, c = (Alternative(i, i, 1.0) for i in "abc")
    wins = {("a", "b"), ("b", "c"), ("c", "a")}

    def cyclic(x, y):
        if (x.id, y.id) in wins:
            return Preference.STRICTLY_PREFERRED
        if (y.id, x.id) in wins:
            return Preference.STRICTLY_DISPREFERRED
        return Preference.INDIFFERENT

    assert check_transitivity([a, b, c], cyclic) == [(a, b, c)]


def test_transitivity_requires_completeness():
    a, b = Alternative("a", "a", 1.0), Alternative("b", "b", 2.0)
    with pytest.raises(CompletenessError):
        check_transitivity([a, b], lambda x, y: None)


def test_weak_chain_warns_but_is_not_a_violation():
    alts = [Alternative(i, i, 1.0) for i in "abc"]
    u = {"a": 0.0, "b": 0.6, "c": 1.2}
    cmp = utility_comparator(lambda x: u[x.id], epsilon=1.0)
    with pytest.warns(TransitivityWarning):
        assert check_transitivity(alts, cmp) == []


def test_opportunity_cost(routes):
    assert opportunity_cost(routes) == pytest.approx(0.04166667, abs=1e-6)
    # oracle: max over the non-chosen utilities
    chosen = select_best(routes)[0]
    assert opportunity_cost(routes) == max(1 / a.cost for a in routes if a is not chosen)
    tie = [Alternative("p", "p", 4.0), Alternative("q", "q", 4.0)]
    assert opportunity_cost(tie) == select_best(tie)[1]
    pair = [Alternative("one", "", 1.0), Alternative("two", "", 2.0)]
    assert select_best(pair)[1] == 1.0 and opportunity_cost(pair) == 0.5
    with pytest.raises(InsufficientOptionsError):
        opportunity_cost(pair[:1])


costs = st.lists(st.floats(min_value=0.01, max_value=1e4, allow_nan=False), min_size=2, max_size=10)


@settings(max_examples=200, deadline=None)
@given(costs, st.floats(min_value=1e-3, max_value=1e3))
def test_ranking_invariant_under_positive_scaling(cs, scale):
    alts = [Alternative(f"a{i}", "", c) for i, c in enumerate(cs)]
    base = [a.id for a, _ in rank_alternatives(alts)]
    scaled = [a.id for a, _ in rank_alternatives(alts, lambda a: scale * inverse_cost(a))]
    # ties can only reorder among (numerically) equal utilities
    if len(set(cs)) == len(cs):
        assert base == scaled


@settings(max_examples=200, deadline=None)
@given(costs)
def test_monotone_and_best_dominates(cs):
    alts = [Alternative(f"a{i}", "", c) for i, c in enumerate(cs)]
    for a, b in itertools.permutations(alts, 2):
        if a.cost < b.cost:
            assert inverse_cost(a) > inverse_cost(b)
    best_u = select_best(alts)[1]
    assert all(best_u >= inverse_cost(a) for a in alts)
    oc = opportunity_cost(alts)
    assert oc <= best_u
    top = sorted((inverse_cost(a) for a in alts), reverse=True)
    assert (oc == best_u) == (top[0] - top[1] <= 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=2, max_size=8))
def test_utility_comparator_is_complete_and_transitive(us):
    alts = [Alternative(f"a{i}", "", 1.0) for i in range(len(us))]
    u = {a.id: v for a, v in zip(alts, us)}
    cmp = utility_comparator(lambda a: u[a.id], epsilon=0.0)
    assert check_completeness(alts, cmp) == []
    with warnings.catch_warnings():
        warnings.simplefilter("error", TransitivityWarning)
        assert check_transitivity(alts, cmp) == []


def test_determinism(routes):
    assert rank_alternatives(routes) == rank_alternatives(list(routes))


def test_read_alternatives_csv(routes_csv, tmp_path):
    alts = read_alternatives_csv(routes_csv)
    assert [a.id for a in alts] == ["JHB-NY", "JHB-DB-NY", "JHB-LN-NY", "JHB-PR-NY"]
    assert alts[0].cost == 18.0
    bad = tmp_path / "bad.csv"
    bad.write_text("id,label,cost\na,a,1\nb,b,-2\n", encoding="utf-8")
    with pytest.raises(LoadError, match="row 2"):
        read_alternatives_csv(bad)
    missing = tmp_path / "missing.csv"
    missing.write_text("id,cost\na,1\n", encoding="utf-8")
    with pytest.raises(LoadError, match="label"):
        read_alternatives_csv(missing)
    header_only = tmp_path / "h.csv"
    header_only.write_text("id,label,cost\n", encoding="utf-8")
    assert read_alternatives_csv(header_only) == []
