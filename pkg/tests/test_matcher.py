from hypothesis import assume, given, settings
from hypothesis import strategies as st

from refaware.diffcore import EditList, FileDiff
from refaware.matcher import HINT, MOVE, SIMILARITY, cross_editlist_move_scan, match_statements
from refaware.refactoring import CodeRange, RefactoringInstance
from refaware.tokenizer import line_similarity


def one_pair(d, a):
    return EditList(10, (d,), 10, (a,))


def test_exact_threshold_is_not_matched():
    assert match_statements(one_pair("int x = 5;", "int y = 5;"), path_before="F", path_after="F") == []


def test_above_threshold_is_matched():
    [m] = match_statements(one_pair("return a + b;", "return a + b + c;"), path_before="F", path_after="F")
    assert m.provenance == SIMILARITY
    assert abs(m.similarity - 0.894427190999916) < 1e-12
    assert (m.del_ref, m.add_ref) == (("F", 10), ("F", 10))


def test_hint_matches_dissimilar_lines():
    edit = EditList(60, ("this._file = _file;",), 60, ("this.file = file;",))
    inst = RefactoringInstance(
        "Rename Attribute", "Rename Attribute _file : File to file : File in class R",
        (CodeRange("R.java", 60, 60),), (CodeRange("R.java", 60, 60),),
    )
    assert match_statements(edit, path_before="R.java", path_after="R.java") == []
    [m] = match_statements(edit, [inst], path_before="R.java", path_after="R.java")
    assert m.provenance == HINT and m.add_ref == ("R.java", 60)


def test_greedy_prefers_highest_similarity_then_distance():
    edit = EditList(1, ("foo(a, b, c, d);", "foo(a, b, c, d);"), 1, ("foo(a, b, c, d, e);",))
    [m] = match_statements(edit, path_before="F", path_after="F")
    # identical similarity: the nearer deleted line (distance 0) wins
    assert m.del_ref == ("F", 1)


def test_move_across_files():
    a = FileDiff("src/a/A.java", "src/a/A.java", (EditList(5, ("    check(x);",), 4, ()),))
    b = FileDiff("src/b/B.java", "src/b/B.java", (EditList(8, (), 9, ("    check(x);",)),))
    [m] = cross_editlist_move_scan([a, b], [])
    assert (m.del_ref, m.add_ref, m.provenance) == (("src/a/A.java", 5), ("src/b/B.java", 9), MOVE)


def test_move_prefers_same_file_candidate():
    a = FileDiff("src/a/A.java", "src/a/A.java", (EditList(5, ("run();",), 4, ()), EditList(30, (), 29, ("run();",))))
    b = FileDiff("src/a/B.java", "src/a/B.java", (EditList(29, ("run();",), 28, ()),))
    [m] = cross_editlist_move_scan([a, b], [])
    assert m.del_ref == ("src/a/A.java", 5)


def test_no_identical_counterpart_stays_unmatched():
    a = FileDiff("A", "A", (EditList(5, ("run();",), 4, ()),))
    b = FileDiff("B", "B", (EditList(5, (), 5, ("walk();",)),))
    assert cross_editlist_move_scan([a, b], []) == []


def test_comment_lines_never_move():
    a = FileDiff("A", "A", (EditList(5, ("// note",), 4, ()),))
    b = FileDiff("B", "B", (EditList(5, (), 5, ("// note",)),))
    assert cross_editlist_move_scan([a, b], []) == []


VOCAB = ["a", "b", "c", "x", "=", "+", ";", "(", ")", "f", "1"]
line_st = st.lists(st.sampled_from(VOCAB), min_size=1, max_size=6).map(" ".join)


@given(st.lists(line_st, min_size=1, max_size=6), st.lists(line_st, min_size=1, max_size=6))
def test_partial_bijection_and_strict_threshold(dels, adds):
    edit = EditList(1, tuple(dels), 1, tuple(adds))
    ms = match_statements(edit, path_before="F", path_after="F")
    assert len({m.del_ref for m in ms}) == len(ms)
    assert len({m.add_ref for m in ms}) == len(ms)
    assert all(m.similarity > 0.8 for m in ms)


@settings(max_examples=80)
@given(st.lists(line_st, min_size=1, max_size=5, unique=True), st.lists(line_st, min_size=1, max_size=5, unique=True), st.randoms())
def test_match_set_invariant_to_line_order(dels, adds, rnd):
    sims = [line_similarity(d, a) for d in dels for a in adds]
    above = [s for s in sims if s > 0.8]
    # the distance tie-break is positional by design; without ties order must not matter
    assume(len(set(above)) == len(above))

    def matched_texts(ds, as_):
        edit = EditList(1, tuple(ds), 1, tuple(as_))
        return {(ds[m.del_ref[1] - 1], as_[m.add_ref[1] - 1]) for m in match_statements(edit, path_before="F", path_after="F")}

    d2, a2 = dels[:], adds[:]
    rnd.shuffle(d2)
    rnd.shuffle(a2)
    assert matched_texts(dels, adds) == matched_texts(d2, a2)
