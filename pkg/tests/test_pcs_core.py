import itertools
import json
from math import comb

import pytest

from dihom.pcs_core import (
    DimensionBoundError,
    PcsMorphism,
    Step,
    Violation,
    complete,
    coproduct,
    find_morphisms,
    from_cells,
    from_json,
    glue_vertices,
    hollow_cube,
    hollow_in_cube,
    inclusion,
    is_isomorphic,
    iterated_face,
    lambda_complex,
    lambda_complex_by_removal,
    lambda_in_cube,
    lift_status,
    remove_vertices,
    standard_cube,
    tensor,
    tensor_morphism,
    tiles,
    to_dot,
    to_json,
    truncate,
    validate,
)

from complexes import fixture_corpus, program_complex


def names(C, n):
    return sorted(C.name(n, c) for c in range(C.count(n)))


def counts(C):
    return tuple(C.count(n) for n in range(C.dim + 1))


def chain(k):
    """A directed path graph with ``k`` edges."""
    vs = [f"v{i}" for i in range(k + 1)]
    return from_cells(vs, [(f"e{i}", vs[i], vs[i + 1]) for i in range(k)])


# ---------------------------------------------------------------------------
# validation


def test_standard_cube_is_valid():
    assert validate(standard_cube(3)) == []


def test_injected_face_mismatch_is_reported_once():
    C = standard_cube(2)
    # re-point one vertex of the square's lower edge
    neg = [list(map(list, level)) for level in C.neg]
    e = C.face(2, 0, 0, "-")
    neg[0][0][e] = C.face(1, C.face(2, 0, 1, "+"), 0, "+")
    bad = type(C).build(C.cells, neg, C.pos, names=C.names)
    rel = [v for v in validate(bad) if v.kind == "relation"]
    assert len(rel) == 1
    assert (rel[0].n, rel[0].i, rel[0].j) == (0, 0, 0)
    assert isinstance(rel[0], Violation)


def test_tensor_of_intervals_is_valid():
    Y1 = standard_cube(1)
    assert validate(tensor(Y1, Y1)) == []
    assert is_isomorphic(tensor(Y1, Y1), standard_cube(2))


def test_mismatched_square_labels_are_reported():
    Y2 = standard_cube(2)
    labels = {Y2.lookup(1, "-0"): "P a", Y2.lookup(1, "+0"): "P b"}
    C = type(Y2).build(Y2.cells, Y2.neg, Y2.pos, labels, Y2.names)
    assert [v.kind for v in validate(C)] == ["label"]


# ---------------------------------------------------------------------------
# cubes and their subcomplexes


def test_square_cells_are_words():
    Y2 = standard_cube(2)
    assert names(Y2, 0) == sorted(["--", "-+", "+-", "++"])
    assert names(Y2, 1) == sorted(["-0", "0-", "+0", "0+"])
    assert names(Y2, 2) == ["00"]


def test_zero_cube_is_a_point():
    Y0 = standard_cube(0)
    assert counts(Y0) == (1,)
    assert Y0.name(0, 0) == ""


@pytest.mark.parametrize("n", range(7))
def test_standard_cube_counts_are_binomial(n):
    assert counts(standard_cube(n)) == tuple(comb(n, k) * 2 ** (n - k) for k in range(n + 1))


def test_three_cube_has_27_cells():
    assert counts(standard_cube(3)) == (8, 12, 6, 1)
    assert sum(counts(standard_cube(3))) == 27


def test_dimension_bound(monkeypatch):
    with pytest.raises(DimensionBoundError):
        standard_cube(7)
    monkeypatch.setenv("DIHOM_MAX_DIM", "8")
    assert standard_cube(7).dim == 7


def test_hollow_cubes():
    assert counts(hollow_cube(2)) == (4, 4, 0)
    assert counts(hollow_cube(3)) == (8, 12, 6, 0)
    H0 = hollow_cube(0)
    assert counts(H0) == (0,)


def test_lambda_complexes():
    L = lambda_complex("-+")
    assert names(L, 0) == sorted(["--", "-+", "++"])
    assert names(L, 1) == sorted(["-0", "0+"])
    L = lambda_complex("++")
    assert names(L, 0) == sorted(["-+", "+-", "++"])
    assert names(L, 1) == sorted(["0+", "+0"])
    L = lambda_complex("+-+")
    assert counts(L) == (7, 9, 3, 0)
    assert names(L, 2) == sorted(["+00", "0-0", "00+"])


@pytest.mark.parametrize("u", ["".join(w) for n in range(1, 5) for w in itertools.product("-+", repeat=n)])
def test_lambda_two_constructions_agree(u):
    A, B = lambda_complex(u), lambda_complex_by_removal(u)
    for n in range(len(u) + 1):
        assert names(A, n) == names(B, n)


def test_iterated_faces():
    Y2 = standard_cube(2)
    sq = Y2.lookup(2, "00")
    assert Y2.name(0, iterated_face(Y2, sq, "-+")) == "-+"
    assert Y2.name(2, iterated_face(Y2, sq, "00")) == "00"
    assert Y2.name(1, iterated_face(Y2, sq, "0-")) == "0-"


@pytest.mark.parametrize("n", range(1, 5))
def test_iterated_face_of_top_cell_is_the_word(n):
    Y = standard_cube(n)
    for w in itertools.product("-0+", repeat=n):
        w = "".join(w)
        assert Y.name(w.count("0"), iterated_face(Y, 0, w)) == w


# ---------------------------------------------------------------------------
# constructions


def test_tensor_of_chain_and_interval():
    assert counts(tensor(chain(2), standard_cube(1))) == (6, 7, 2)


def test_remove_corner_of_square():
    Y2 = standard_cube(2)
    C = remove_vertices(Y2, {Y2.lookup(0, "++")})
    assert names(C, 0) == sorted(["--", "-+", "+-"])
    assert names(C, 1) == sorted(["-0", "0-"])
    assert C.count(2) == 0


def _brute_survivors(C, X):
    """Cells with no vertex of ``X`` among their iterated faces, by word enumeration."""
    out = []
    for n in range(C.dim + 1):
        keep = []
        for c in range(C.count(n)):
            corners = {iterated_face(C, c, "".join(w)) for w in itertools.product("-+", repeat=n)} if n else {c}
            if not corners & X:
                keep.append(C.name(n, c))
        out.append(sorted(keep))
    return out


@pytest.mark.parametrize("name", ["cube-3", "cube-4", "hollow-cube-3", "pinned-squares", "link-example"])
def test_remove_vertices_matches_iterated_face_scan(name):
    C = fixture_corpus()[name]
    for x in range(C.count(0)):
        for X in ({x}, {x, (x + 3) % C.count(0)}):
            R = remove_vertices(C, X)
            assert validate(R) == []
            assert [names(R, n) for n in range(C.dim + 1)] == _brute_survivors(C, X)


def test_gluing_two_intervals_gives_choice_shape():
    I = chain(1)
    U = coproduct(I, I)
    # after the first gluing the old vertex 3 is renumbered 2
    C = glue_vertices(glue_vertices(U, 0, 2), 1, 2)
    assert counts(C) == (2, 2)
    assert {(C.src(e), C.tgt(e)) for e in range(2)} == {(0, 1)}
    assert validate(C) == []


def _small_morphisms():
    Y1, Y2 = standard_cube(1), standard_cube(2)
    return [m for m in find_morphisms(Y1, Y2)] + [m for m in find_morphisms(Y1, chain(2))]


def test_tensor_is_functorial():
    ms = _small_morphisms()
    for f in ms[:6]:
        for g in ms[-4:]:
            h = tensor_morphism(f, g)
            assert h.errors() == []
            assert validate(h.source) == [] and validate(h.target) == []


def test_tensor_preserves_identities():
    for C in (standard_cube(2), chain(2)):
        D = standard_cube(1)
        ident_C = PcsMorphism(C, C, tuple(tuple(range(C.count(n))) for n in range(C.dim + 1)))
        ident_D = PcsMorphism(D, D, tuple(tuple(range(D.count(n))) for n in range(D.dim + 1)))
        h = tensor_morphism(ident_C, ident_D)
        assert all(list(level) == list(range(len(level))) for level in h.maps)


@pytest.mark.parametrize("n", range(1, 5))
def test_complete_of_truncate_is_identity_on_cubes(n):
    Y = standard_cube(n)
    assert is_isomorphic(complete(truncate(Y, 2), n), Y)


def test_truncate_drops_higher_cells():
    assert counts(truncate(standard_cube(3), 1)) == (8, 12)


# ---------------------------------------------------------------------------
# morphisms and lifting


def test_points_of_square():
    assert len(find_morphisms(standard_cube(0), standard_cube(2))) == 4


def test_hollow_cube_automorphism_fixing_half_is_identity():
    H = hollow_cube(3)
    incl = inclusion(lambda_complex("+-+"), H)
    partial = {(n, incl.maps[n][d]): incl.maps[n][d] for n in range(3) for d in range(incl.source.count(n))}
    found = find_morphisms(H, H, partial)
    assert len(found) == 1
    assert all(list(level) == list(range(len(level))) for level in found[0].maps)


def test_no_cube_maps_into_hollow_cube():
    assert find_morphisms(standard_cube(3), hollow_cube(3)) == []


def test_lift_counts():
    Y2 = standard_cube(2)
    incl = lambda_in_cube("-+")
    assert lift_status(Y2, incl, incl).count == 1
    H = hollow_cube(3)
    ident = inclusion(H, H)
    assert lift_status(H, hollow_in_cube(3), ident).count == 0


def test_semantics_of_three_locks_lifts_uniquely():
    C = program_complex("P(a) || P(b) || P(c)").pcs
    incl = lambda_in_cube("+-+")
    hs = find_morphisms(incl.source, C)
    assert hs
    assert all(lift_status(C, incl, h).count == 1 for h in hs)


def test_lift_rejects_non_morphism():
    Y2 = standard_cube(2)
    incl = lambda_in_cube("-+")
    bad = PcsMorphism(incl.source, Y2, ((0, 0, 0), (0, 0)))
    with pytest.raises(ValueError):
        lift_status(Y2, incl, bad)


# ---------------------------------------------------------------------------
# tiles


def test_tile_of_square():
    Y2 = standard_cube(2)
    (t,) = tiles(Y2)
    assert tuple(Y2.name(1, e) for e in (t.a, t.b, t.b2, t.a2)) == ("-0", "0+", "0-", "+0")


def test_no_tiles_in_graphs():
    assert tiles(chain(3)) == []


def test_tile_of_two_locks_is_labeled():
    C = program_complex("P(a) || P(b)").pcs
    (t,) = tiles(C)
    assert {C.labels[t.a], C.labels[t.b]} == {"P a", "P b"}
    assert C.labels[t.a] == C.labels[t.a2] and C.labels[t.b] == C.labels[t.b2]


def test_oriented_tiles_are_paths_with_common_ends():
    for C in fixture_corpus().values():
        for t in tiles(C):
            for a, b, b2, a2 in t.oriented():
                assert C.step_tgt(a) == C.step_src(b) and C.step_tgt(b2) == C.step_src(a2)
                assert C.step_src(a) == C.step_src(b2) and C.step_tgt(b) == C.step_tgt(a2)


# ---------------------------------------------------------------------------
# serialization


@pytest.mark.parametrize("name", sorted(fixture_corpus()))
def test_json_round_trip(name):
    C = fixture_corpus()[name]
    D = from_json(json.loads(json.dumps(to_json(C))))
    assert D == C


def test_from_json_rejects_invalid():
    data = to_json(standard_cube(2))
    data["faces"]["neg"][0][0][0] = 99
    with pytest.raises(ValueError):
        from_json(data)


def test_dot_lists_edges_and_squares():
    out = to_dot(standard_cube(2))
    assert out.startswith("digraph C {")
    assert out.count("->") == 4
    assert "// square" in out


def test_step_inverse():
    assert Step(3).inv() == Step(3, True)
    assert Step(3, True).inv().inv() == Step(3, True)
