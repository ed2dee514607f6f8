import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dihom.paths import (
    EndpointMismatch,
    InvalidPath,
    Move,
    PathT,
    are_dihomotopic,
    are_homotopic,
    check_path,
    dihomotopy_class,
    dihomotopy_classes,
    dihomotopy_neighbors,
    dihomotopy_witness,
    dipaths,
    format_path,
    homologous,
    homotopy_moves,
    homotopy_neighbors,
    is_geodesic,
    is_locally_geodesic,
    parse_path,
    path_end,
    path_from_json,
    path_to_json,
    replay,
    reverse_path,
)
from dihom.pcs_core import Step, standard_cube

from complexes import MUTEX_PAIR, SWISS_FLAG, hole_paths, program_complex, random_walk


def Y2():
    return standard_cube(2)


def path(C, text):
    return parse_path(C, text)


def concat(C, s, t):
    assert path_end(C, s) == t.start
    return PathT(s.start, s.steps + t.steps)


# ---------------------------------------------------------------------------
# basics


def test_path_checks():
    C = Y2()
    p = path(C, "-- -0--> +- -+0-> ++")
    assert p.is_dipath and len(p) == 2
    assert path_end(C, p) == C.lookup(0, "++")
    with pytest.raises(InvalidPath):
        check_path(C, PathT(C.lookup(0, "--"), (Step(C.lookup(1, "+0")),)))


def test_parse_rejects_malformed():
    C = Y2()
    with pytest.raises(InvalidPath):
        parse_path(C, "-- -0--> ++")
    with pytest.raises(InvalidPath):
        parse_path(C, "-- =0=> +-")
    with pytest.raises(InvalidPath):
        parse_path(C, "")


def test_format_parse_round_trip():
    C = Y2()
    text = "-- -0--> +- <-0-- --"
    assert format_path(C, path(C, text)) == text


def test_json_round_trip():
    C, f, g = hole_paths()
    for p in (f, g, reverse_path(C, f)):
        assert path_from_json(C, path_to_json(C, p)) == p


def test_reverse_path():
    C, f, _ = hole_paths()
    r = reverse_path(C, f)
    assert r.start == path_end(C, f) and path_end(C, r) == f.start
    assert reverse_path(C, r) == f


# ---------------------------------------------------------------------------
# moves


def test_square_tile_neighbor():
    C = Y2()
    assert dihomotopy_neighbors(C, path(C, "-- -0--> +- -+0-> ++")) == {path(C, "-- --0-> -+ -0+-> ++")}


def test_empty_path_has_no_tile_neighbors():
    assert dihomotopy_neighbors(Y2(), PathT(0, ())) == set()


def test_cube_without_bottom_path_is_alone():
    C, f, _ = hole_paths()
    s = path(C, "--- ---0-> --+ -0-+-> +-+")
    assert dihomotopy_neighbors(C, s) == set()
    assert dihomotopy_class(C, f) == [f]


def test_insertion_and_deletion():
    C = Y2()
    x = C.lookup(0, "--")
    a = Step(C.lookup(1, "-0"))
    eps = PathT(x, ())
    back = PathT(x, (a, a.inv()))
    assert back in homotopy_neighbors(C, eps)
    assert eps in homotopy_neighbors(C, back)


def test_neighbor_count_in_square():
    C = Y2()
    s = path(C, "-- -0--> +- -+0-> ++")
    moves = homotopy_moves(C, s)
    # one tile move plus two insertions at each of the three vertices
    assert len(moves) == 1 + 2 * 3
    assert sorted(m.rule for m, _ in moves) == ["insert"] * 6 + ["tile"]
    # a·ā·a·b arises from two different insertions, and so does a·b·b̄·b
    assert len(homotopy_neighbors(C, s)) == 5


def test_replay_rejects_illegal_moves():
    C, f, _ = hole_paths()
    with pytest.raises(InvalidPath):
        replay(C, f, [Move("tile", 0, f.steps)])
    with pytest.raises(InvalidPath):
        replay(C, f, [Move("delete", 0, f.steps)])
    with pytest.raises(InvalidPath):
        replay(C, f, [Move("twist", 0, ())])


# ---------------------------------------------------------------------------
# deciders


def test_square_boundaries_are_dihomotopic():
    C = Y2()
    s, t = path(C, "-- -0--> +- -+0-> ++"), path(C, "-- --0-> -+ -0+-> ++")
    assert are_dihomotopic(C, s, t)
    assert len(dihomotopy_witness(C, s, t)) == 1


def test_different_lengths_are_not_dihomotopic():
    C, f, _ = hole_paths()
    longer = concat(C, f, PathT(path_end(C, f), (Step(C.lookup(1, "+0+")),)))
    shorter = path(C, "--- ---0-> --+")
    back = concat(C, shorter, reverse_path(C, shorter))
    assert not are_dihomotopic(C, back, PathT(f.start, ()))
    assert len(longer) == 3


def test_endpoint_mismatch():
    C, f, _ = hole_paths()
    with pytest.raises(EndpointMismatch):
        are_dihomotopic(C, f, PathT(f.start, ()))


def test_hole_paths_are_homotopic_not_dihomotopic():
    C, f, g = hole_paths()
    assert not are_dihomotopic(C, f, g)
    res = are_homotopic(C, f, g, budget=6)
    assert res.verdict == "yes"
    assert replay(C, f, res.witness) == g


def test_identical_paths_are_homotopic_with_empty_witness():
    C, f, _ = hole_paths()
    assert are_homotopic(C, f, f) == ("yes", [], "identical paths")


def test_backtrack_is_homotopic_to_empty_path():
    C = Y2()
    x = C.lookup(0, "--")
    a = Step(C.lookup(1, "-0"))
    res = are_homotopic(C, PathT(x, (a, a.inv())), PathT(x, ()))
    assert res.verdict == "yes" and len(res.witness) == 1


def test_homology_rules_out_loop_around_hollow_square():
    from dihom.pcs_core import hollow_cube
    C = hollow_cube(2)
    s = path(C, "-- -0--> +- -+0-> ++")
    t = path(C, "-- --0-> -+ -0+-> ++")
    assert not homologous(C, s, t)
    res = are_homotopic(C, s, t, budget=4)
    assert res.verdict == "no"


def test_small_budget_can_be_unknown():
    C, f, g = hole_paths()
    assert are_homotopic(C, f, g, budget=0).verdict == "unknown"


# ---------------------------------------------------------------------------
# classes and geodesics


def test_square_classes():
    C = Y2()
    classes = dihomotopy_classes(C, C.lookup(0, "--"), C.lookup(0, "++"), 2)
    assert [len(c) for c in classes] == [2]


def test_mutex_pair_classes():
    pp = program_complex(MUTEX_PAIR)
    assert len(dihomotopy_classes(pp.pcs, pp.beg, pp.end, 4)) == 2


def test_swiss_flag_classes():
    pp = program_complex(SWISS_FLAG)
    assert len(dihomotopy_classes(pp.pcs, pp.beg, pp.end, 8)) == 2


def test_dipaths_are_dipaths():
    pp = program_complex(SWISS_FLAG)
    ps = dipaths(pp.pcs, pp.beg, pp.end, 8)
    assert ps and all(p.is_dipath and len(p) == 8 for p in ps)


def test_every_dipath_is_locally_geodesic():
    pp = program_complex(SWISS_FLAG)
    for p in dipaths(pp.pcs, pp.beg, pp.end, 8):
        assert is_locally_geodesic(pp.pcs, p)


def test_backtrack_is_not_locally_geodesic():
    C = Y2()
    a = Step(C.lookup(1, "-0"))
    assert not is_locally_geodesic(C, PathT(C.lookup(0, "--"), (a, a.inv())))


def test_loop_around_hole_is_locally_geodesic_but_not_geodesic():
    C, f, g = hole_paths()
    loop = concat(C, f, reverse_path(C, g))
    assert is_locally_geodesic(C, loop)
    res = is_geodesic(C, loop, budget=6)
    assert res.verdict == "no"
    assert are_homotopic(C, loop, PathT(loop.start, ()), budget=6).verdict == "yes"


def test_short_dipath_is_geodesic():
    C = Y2()
    assert is_geodesic(C, path(C, "-- -0--> +-")).verdict == "yes"


# ---------------------------------------------------------------------------
# invariants


def _corpus_dipaths():
    out = []
    for text in (MUTEX_PAIR, SWISS_FLAG, "P(a) || P(b) || P(c)"):
        pp = program_complex(text)
        for x in range(pp.pcs.count(0)):
            for y in range(pp.pcs.count(0)):
                out.extend((pp.pcs, p) for p in dipaths(pp.pcs, x, y, 4))
    return out


CORPUS_DIPATHS = _corpus_dipaths()


def test_tile_moves_preserve_length_and_direction():
    for C, p in CORPUS_DIPATHS:
        for q in dihomotopy_class(C, p):
            assert len(q) == len(p)
            assert q.is_dipath
            assert q.start == p.start and path_end(C, q) == path_end(C, p)


def test_tile_moves_preserve_length_on_any_path():
    C, f, g = hole_paths()
    rng = random.Random(5)
    for _ in range(50):
        p = random_walk(C, rng.randrange(C.count(0)), rng.randint(0, 6), rng)
        for q in dihomotopy_neighbors(C, p):
            assert len(q) == len(p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_deciders_are_equivalences(seed):
    rng = random.Random(seed)
    pp = program_complex(SWISS_FLAG)
    C = pp.pcs
    ps = dipaths(C, pp.beg, pp.end, 8)
    a, b, c = (rng.choice(ps) for _ in range(3))
    assert are_dihomotopic(C, a, a)
    assert are_dihomotopic(C, a, b) == are_dihomotopic(C, b, a)
    if are_dihomotopic(C, a, b) and are_dihomotopic(C, b, c):
        assert are_dihomotopic(C, a, c)
    hab, hba = are_homotopic(C, a, b, 4), are_homotopic(C, b, a, 4)
    assert hab.verdict == hba.verdict or "unknown" in (hab.verdict, hba.verdict)
    if hab and are_homotopic(C, b, c, 4):
        assert are_homotopic(C, a, c, 8).verdict in ("yes", "unknown")


def test_homotopy_witnesses_replay():
    C, f, g = hole_paths()
    for budget in (2, 4, 6):
        res = are_homotopic(C, f, g, budget)
        assert replay(C, f, res.witness) == g


def test_homotopy_classes_hold_one_dihomotopy_class_in_npc_semantics():
    pp = program_complex(SWISS_FLAG)
    C = pp.pcs
    classes = dihomotopy_classes(C, pp.beg, pp.end, 8)
    for c1, c2 in itertools.combinations(classes, 2):
        assert are_homotopic(C, c1[0], c2[0], budget=4).verdict != "yes"
