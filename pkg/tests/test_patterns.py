import math

import pytest

import patternlab as pl
from patternlab import Hypergraph, Multiset, Pattern
from patternlab.errors import FormatError

from conftest import all_multisets


# ---------------------------------------------------------------------------
# Multisets
# ---------------------------------------------------------------------------


def test_multiset_canonical_expansion():
    assert Multiset([2, 1, 1]).expansion == (1, 1, 2)
    assert Multiset([2, 1, 1]) == Multiset([1, 2, 1])
    assert hash(Multiset([1, 1, 2])) == hash(Multiset([2, 1, 1]))


def test_multiplicity_direct_count():
    e = Multiset([1, 1, 2])
    assert e.multiplicity(1) == 2
    assert e.multiplicity(3, m=3) == 0


def test_multiplicity_of_second_index():
    assert Multiset([1, 2, 2]).multiplicity(2) == 2


def test_multiplicity_range_errors():
    e = Multiset([1, 1, 2])
    with pytest.raises(ValueError):
        e.multiplicity(0)
    with pytest.raises(ValueError):
        e.multiplicity(3, m=2)


def test_multiset_rejects_empty_and_bad_indices():
    with pytest.raises(ValueError):
        Multiset([])
    with pytest.raises(ValueError):
        Multiset([0, 1])


# ---------------------------------------------------------------------------
# Pattern construction
# ---------------------------------------------------------------------------


def test_pattern_rejects_wrong_multiplicity_sum():
    with pytest.raises(ValueError):
        Pattern(2, 3, [[1, 1]])


def test_pattern_rejects_out_of_range_index():
    with pytest.raises(ValueError):
        Pattern(2, 3, [[1, 1, 3]])


def test_pattern_bounds():
    with pytest.raises(ValueError):
        Pattern(0, 3, [])
    with pytest.raises(ValueError):
        Pattern(2, 1, [])


def test_duplicate_edges_deduplicated_with_warning():
    with pytest.warns(UserWarning):
        P = Pattern(2, 3, [[1, 1, 2], [2, 1, 1]])
    assert P.edge_count == 1


def test_edges_sorted_canonically():
    P = Pattern(3, 3, [[3, 3, 3], [1, 1, 2]])
    assert [e.expansion for e in P.edges] == [(1, 1, 2), (3, 3, 3)]


def test_edges_with_multiplicity(pb):
    assert pb.edges_with_multiplicity(1, 2) == (Multiset([1, 1, 2]),)
    assert pb.edges_with_multiplicity(1, 0) == ()


# ---------------------------------------------------------------------------
# Induced subpatterns and index removal
# ---------------------------------------------------------------------------


def test_induced_no_multiset_fits(p112):
    assert pl.induced_subpattern(p112, {1}) == Pattern(1, 3, [])


def test_induced_full_set_is_identity(p112):
    assert pl.induced_subpattern(p112, {1, 2}) == p112


def test_induced_relabels():
    P = Pattern(3, 3, [[1, 1, 2], [3, 3, 3]])
    assert pl.induced_subpattern(P, {3}) == Pattern(1, 3, [[1, 1, 1]])


def _induced_oracle(P, S):
    """Independent filter-by-support + order-preserving relabel."""
    s = sorted(S)
    rank = {old: new for new, old in enumerate(s, start=1)}
    kept = [tuple(rank[i] for i in e.expansion) for e in P.edges
            if set(e.expansion) <= set(s)]
    return Pattern(len(s), P.r, kept)


def test_induced_matches_oracle(rng):
    for _ in range(100):
        m = int(rng.integers(1, 6))
        P = pl.random_pattern(rng, m, 3)
        size = int(rng.integers(1, m + 1))
        S = list(rng.choice(range(1, m + 1), size=size, replace=False))
        assert pl.induced_subpattern(P, S) == _induced_oracle(P, S)


def test_induced_nested_restriction(rng):
    for _ in range(50):
        m = int(rng.integers(2, 6))
        P = pl.random_pattern(rng, m, 3)
        t_size = int(rng.integers(1, m + 1))
        T = sorted(rng.choice(range(1, m + 1), size=t_size, replace=False))
        s_size = int(rng.integers(1, len(T) + 1))
        S = sorted(rng.choice(T, size=s_size, replace=False))
        # positions of S inside T, as indices of the restricted pattern
        S_in_T = [T.index(i) + 1 for i in S]
        via_T = pl.induced_subpattern(pl.induced_subpattern(P, T), S_in_T)
        assert via_T == pl.induced_subpattern(P, S)


def test_induced_errors(p112):
    with pytest.raises(ValueError):
        pl.induced_subpattern(p112, {1, 3})
    with pytest.raises(ValueError):
        pl.induced_subpattern(p112, set())


def test_remove_index_examples(p112, pb):
    assert pl.remove_index(p112, 2) == Pattern(1, 3, [])
    assert pl.remove_index(pb, 1) == Pattern(1, 3, [])
    P = Pattern(3, 3, [[1, 1, 2], [3, 3, 3]])
    assert pl.remove_index(P, 2) == Pattern(2, 3, [[2, 2, 2]])


def test_remove_index_equals_complement_restriction(rng):
    for _ in range(50):
        m = int(rng.integers(2, 6))
        P = pl.random_pattern(rng, m, 3)
        i = int(rng.integers(1, m + 1))
        rest = [j for j in range(1, m + 1) if j != i]
        assert pl.remove_index(P, i) == pl.induced_subpattern(P, rest)


def test_remove_index_errors(p112):
    with pytest.raises(ValueError):
        pl.remove_index(p112, 3)
    with pytest.raises(ValueError):
        pl.remove_index(Pattern(1, 3, [[1, 1, 1]]), 1)


# ---------------------------------------------------------------------------
# Hypergraphs
# ---------------------------------------------------------------------------


def test_pattern_of_single_triple():
    G = Hypergraph(3, 3, [[1, 2, 3]])
    assert pl.pattern_of_hypergraph(G) == Pattern(3, 3, [[1, 2, 3]])


def test_pattern_of_empty_graph():
    G = Hypergraph(4, 3, [])
    assert pl.pattern_of_hypergraph(G) == Pattern(4, 3, [])


def test_pattern_of_k4():
    P = pl.pattern_of_hypergraph(pl.complete_graph(4))
    assert P.m == 4 and P.edge_count == 6


def test_pattern_of_hypergraph_preserves_edge_count(rng):
    for _ in range(20):
        n = int(rng.integers(3, 8))
        universe = all_multisets(range(1, n + 1), 3)
        plain = [e for e in universe if len(set(e)) == 3]
        edges = [e for e in plain if rng.random() < 0.4]
        G = Hypergraph(n, 3, edges)
        assert pl.pattern_of_hypergraph(G).edge_count == G.edge_count


def test_hypergraph_invariants():
    with pytest.raises(ValueError):
        Hypergraph(3, 3, [[1, 1, 2]])  # repeated vertex
    with pytest.raises(ValueError):
        Hypergraph(3, 3, [[1, 2, 4]])  # out of range
    with pytest.raises(ValueError):
        Hypergraph(3, 3, [[1, 2]])  # wrong size


# ---------------------------------------------------------------------------
# Validation diagnostics
# ---------------------------------------------------------------------------


def test_validate_clean_pattern(p112):
    assert pl.validate(p112) == []


def test_validate_document_multiplicity_sum():
    diags = pl.validate_pattern_document({"r": 3, "m": 2, "edges": [[1, 1]]})
    assert any("multiplicity sum 2 != r=3" in d for d in diags)


def test_validate_document_out_of_range():
    diags = pl.validate_pattern_document({"r": 3, "m": 2, "edges": [[1, 1, 3]]})
    assert any("index 3 > m=2" in d for d in diags)


def test_validate_document_duplicates_and_missing():
    diags = pl.validate_pattern_document({"r": 3, "m": 2,
                                          "edges": [[1, 1, 2], [2, 1, 1]]})
    assert any(d.startswith("warning:") and "duplicates" in d for d in diags)
    assert pl.validate_pattern_document({"r": 3, "m": 2}) == ["missing field 'edges'"]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def test_canonical_text_form(pb):
    assert pl.pattern_to_json(pb) == '{"r":3,"m":2,"edges":[[1,1,2],[1,2,2]]}'


def test_empty_pattern_text_form():
    assert pl.pattern_to_json(Pattern(1, 3, [])) == '{"r":3,"m":1,"edges":[]}'


def test_round_trip_random(rng):
    for _ in range(100):
        m = int(rng.integers(1, 7))
        r = int(rng.integers(2, 5))
        P = pl.random_pattern(rng, m, r)
        assert pl.pattern_from_json(pl.pattern_to_json(P)) == P


def test_serialization_idempotent(rng):
    for _ in range(20):
        P = pl.random_pattern(rng, 4, 3)
        text = pl.pattern_to_json(P)
        assert pl.pattern_to_json(pl.pattern_from_json(text)) == text


def test_parse_error_reports_location():
    with pytest.raises(FormatError, match=r"line 1 column"):
        pl.pattern_from_json("{not json")


def test_load_rejects_invariant_violations():
    with pytest.raises(FormatError, match="multiplicity sum"):
        pl.pattern_from_json('{"r":3,"m":2,"edges":[[1,1]]}')
    with pytest.raises(FormatError, match="index 3"):
        pl.pattern_from_json('{"r":3,"m":2,"edges":[[1,1,3]]}')


def test_hypergraph_round_trip(rng):
    G = pl.complete_graph(5)
    assert pl.hypergraph_from_json(pl.hypergraph_to_json(G)) == G
    with pytest.raises(FormatError):
        pl.hypergraph_from_json('{"r":2,"n":3,"edges":[[1,1]]}')


def test_load_any_sniffs_kind(tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"r":3,"m":2,"edges":[[1,1,2]]}')
    g = tmp_path / "g.json"
    g.write_text('{"r":2,"n":3,"edges":[[1,2]]}')
    assert isinstance(pl.load_any(p), Pattern)
    assert isinstance(pl.load_any(g), Hypergraph)


def test_save_and_load(tmp_path, pb):
    path = tmp_path / "pb.json"
    pl.save_pattern(pb, path)
    assert pl.load_pattern(path) == pb
    assert path.read_text().endswith("\n")


# ---------------------------------------------------------------------------
# Stock constructions
# ---------------------------------------------------------------------------


def test_complete_pattern_counts():
    assert pl.complete_pattern(4, 3).edge_count == math.comb(4, 3)
    assert pl.complete_pattern(3, 3).edge_count == 1
    with pytest.raises(ValueError):
        pl.complete_pattern(2, 3)


def test_offdiagonal_pattern_counts():
    for m in (2, 3, 4):
        for r in (2, 3):
            P = pl.offdiagonal_pattern(m, r)
            assert P.edge_count == math.comb(m + r - 1, r) - m
            assert all(len(set(e.expansion)) > 1 for e in P.edges)


def test_offdiagonal_m2_r3_is_crossing_pattern(pb):
    assert pl.offdiagonal_pattern(2, 3) == pb


def test_iter_multisets_matches_independent_enumeration():
    for m in (1, 2, 3, 4):
        for size in (1, 2, 3):
            got = list(pl.iter_multisets(range(1, m + 1), size))
            want = all_multisets(range(1, m + 1), size)
            assert got == want
            assert len(got) == math.comb(m + size - 1, size)


def test_relabel_pattern_roundtrip(rng):
    P = pl.random_pattern(rng, 4, 3)
    perm = [3, 1, 4, 2]
    inverse = [0] * 4
    for old, new in enumerate(perm, start=1):
        inverse[new - 1] = old
    assert pl.relabel_pattern(pl.relabel_pattern(P, perm), inverse) == P
    with pytest.raises(ValueError):
        pl.relabel_pattern(P, [1, 1, 2, 3])


def test_random_pattern_exclude(rng):
    for _ in range(20):
        P = pl.random_pattern(rng, 2, 3, edge_probability=0.9, exclude=[[2, 2, 2]])
        assert Multiset([2, 2, 2]) not in P.edges
