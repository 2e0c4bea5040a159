import pytest

from subgradpush.graph import (
    CyclicSequence,
    Digraph,
    RandomBConnectedSequence,
    RegularCirculantSequence,
    StaticSequence,
    is_strongly_connected,
    make_sequence,
    union_graph,
    verify_b_connected,
    window_verdicts,
)


def test_static_sequence_is_constant():
    g = Digraph.cycle(4)
    seq = StaticSequence(g)
    assert all(seq.graph_at(t) == g for t in (0, 1, 17, 10_000))


def test_cyclic_schedule_picks_t_mod_period():
    d0 = Digraph.from_edge_list(2, [(1, 2)])
    d1 = Digraph.from_edge_list(2, [(2, 1)])
    seq = CyclicSequence([d0, d1])
    assert seq.graph_at(3) == d1
    assert seq.graph_at(4) == d0


def test_random_sequence_is_deterministic():
    a = RandomBConnectedSequence(4, B=3, seed=7)
    b = RandomBConnectedSequence(4, B=3, seed=7)
    assert a.graph_at(0).edges == a.graph_at(0).edges == b.graph_at(0).edges
    # queried out of order still agrees
    assert a.graph_at(50).edges == b.graph_at(50).edges


def test_random_sequence_seeds_differ():
    a = RandomBConnectedSequence(8, B=2, seed=1)
    b = RandomBConnectedSequence(8, B=2, seed=2)
    assert any(a.graph_at(t).edges != b.graph_at(t).edges for t in range(10))


def test_negative_round_rejected():
    with pytest.raises(ValueError):
        StaticSequence(Digraph.cycle(3)).graph_at(-1)


def test_out_degree_counts_self_loop():
    isolated = Digraph(3, frozenset())
    assert isolated.out_degree(0) == 1
    cyc = Digraph.from_edge_list(3, [(1, 2), (2, 3), (3, 1)])
    assert [cyc.out_degree(i) for i in range(3)] == [2, 2, 2]
    assert all(Digraph.complete(5).out_degree(i) == 5 for i in range(5))


def test_out_degree_bad_node():
    with pytest.raises(IndexError):
        Digraph.cycle(3).out_degree(3)


def test_digraph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Digraph(2, frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        Digraph(2, frozenset({(0, 2)}))


def test_from_edge_list_drops_self_loops():
    g = Digraph.from_edge_list(2, [(1, 1), (1, 2)])
    assert g.edges == frozenset({(0, 1)})
    assert g.to_edge_list() == [[1, 2]]


def test_in_and_out_neighbors():
    g = Digraph.from_edge_list(3, [(1, 2), (3, 2)])
    assert sorted(g.in_neighbors(1)) == [0, 1, 2]  # self included
    assert sorted(g.out_neighbors(0)) == [0, 1]


def test_strong_connectivity():
    assert is_strongly_connected(Digraph.cycle(5))
    assert not is_strongly_connected(Digraph.from_edge_list(3, [(1, 2), (2, 3)]))
    assert is_strongly_connected(Digraph(1, frozenset()))


def test_union_graph():
    u = union_graph([Digraph.from_edge_list(2, [(1, 2)]), Digraph.from_edge_list(2, [(2, 1)])])
    assert u.edges == frozenset({(0, 1), (1, 0)})


def test_verify_static_connected():
    assert verify_b_connected(StaticSequence(Digraph.cycle(4)), 1, 20) == (True, None)


def test_verify_alternating_edges():
    seq = CyclicSequence([Digraph.from_edge_list(2, [(1, 2)]), Digraph.from_edge_list(2, [(2, 1)])])
    assert verify_b_connected(seq, 2, 10) == (True, None)
    assert verify_b_connected(seq, 1, 10) == (False, 0)


def test_verify_empty_edges():
    seq = StaticSequence(Digraph(3, frozenset()))
    for B in (1, 2, 5):
        assert verify_b_connected(seq, B, 4) == (False, 0)


@pytest.mark.parametrize("n,B", [(2, 1), (5, 2), (9, 4), (20, 3)])
def test_random_generator_windows_connected(n, B):
    seq = RandomBConnectedSequence(n, B, seed=n * B, p=0.0)
    assert all(window_verdicts(seq, B, 30))


def test_circulant_is_regular():
    seq = RegularCirculantSequence(7, seed=3, c_min=1, c_max=4)
    for t in range(10):
        g = seq.graph_at(t)
        assert len(set(g.out_degrees().tolist())) == 1
        assert (g.out_degrees() == g.in_degrees()).all()


def test_make_sequence_rejects_unknown():
    with pytest.raises(ValueError):
        make_sequence("static", 3, edges=[(1, 2)], bogus=1)
    with pytest.raises(ValueError):
        make_sequence("nope", 3)
