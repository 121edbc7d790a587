import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repcomplete.errors import DataError, EmptyCorpusError
from repcomplete.syntax import (
    DEFAULT_RULES,
    AstNode,
    JavaSyntaxError,
    NodeClass,
    TokenEvent,
    classify,
    dumps_events,
    ingest_directory,
    iter_functions,
    linearize,
    loads_events,
    parse_java,
    repetition_stats,
    resolve_variables,
    tokenize_source,
)
from repcomplete.syntax.nodes import internal, leaf

from .conftest import JPYPE


def _method(src):
    unit = parse_java(src)
    resolve_variables(unit)
    (method,) = list(iter_functions(unit))
    return method


def _names(node):
    return [n for n in node.walk() if n.kind == "SimpleName"]


# -- parsing ---------------------------------------------------------------

def test_bare_statement_parses_as_method_body():
    kinds = [n.kind for n in parse_java("int x = 0;").walk()]
    assert "VariableDeclarationStatement" in kinds
    assert "FieldDeclaration" not in kinds


def test_bare_member_parses_inside_class():
    unit = parse_java("void m(int a) { return; }")
    assert [m.child("name").content for m in iter_functions(unit)] == ["m"]


def test_malformed_source_reports_position():
    with pytest.raises(JavaSyntaxError) as info:
        parse_java("class A { void m( { }")
    assert info.value.line >= 1
    assert isinstance(info.value, DataError)


# -- linearize -------------------------------------------------------------

def test_leaf_emits_type_then_content():
    events = linearize(leaf("SimpleName", "x"))
    assert [(e.text, e.is_content) for e in events] == [("SimpleName", False), ("x", True)]


def test_empty_block_is_one_type_token():
    events = linearize(AstNode("Block"))
    assert [(e.text, e.is_content) for e in events] == [("Block", False)]


def test_length_law_on_hand_built_tree():
    tree = internal(
        "InfixExpression",
        ("left", leaf("SimpleName", "a")),
        ("right", internal("ParenthesizedExpression", ("expression", leaf("NumberLiteral", "1")))),
        ("extended", leaf("SimpleName", "b")),
        operator="+",
    )
    events = linearize(tree)
    # 2 internal nodes + 2 * 3 leaves
    assert len(events) == 2 + 2 * 3
    assert [e.position for e in events] == list(range(len(events)))
    assert events[0].text == "InfixExpression:+"


def test_content_tokens_follow_their_type_token(jpype_functions):
    for fn in jpype_functions[:50]:
        n_content = sum(e.is_content for e in fn.events)
        n_type = len(fn.events) - n_content
        # every content token directly follows its leaf's type token
        for t, e in enumerate(fn.events):
            if e.is_content:
                assert t > 0 and not fn.events[t - 1].is_content
        assert n_type >= n_content


def test_length_law_matches_node_count():
    method = _method("class A { int f(int a, int[] b) { for (int i = 0; i < a; i++) { b[i] += a * 2; } return b.length; } }")
    nodes = list(method.walk())
    leaves = sum(n.is_leaf for n in nodes)
    assert len(linearize(method)) == (len(nodes) - leaves) + 2 * leaves


# -- classify --------------------------------------------------------------

def test_classify_examples():
    m = _method("class A { void m() { Foo x = null; a.foo(b); int n = 1; } }")
    by_text = {}
    for n in _names(m):
        by_text.setdefault(n.content, classify(n))
    assert by_text["Foo"] is NodeClass.FILTERED
    assert by_text["foo"] is NodeClass.FILTERED
    assert by_text["a"] is NodeClass.CARED
    assert by_text["b"] is NodeClass.CARED
    number = next(n for n in m.walk() if n.kind == "NumberLiteral")
    assert classify(number) is NodeClass.NOT_SIMPLE_NAME


def test_unknown_parent_kind_defaults_to_cared():
    parent = internal("OtherNode", ("child", leaf("SimpleName", "q")))
    assert classify(parent.children[0]) is NodeClass.CARED


# Independent restatement of the exclusion table, checked row by row.
_ANY = object()
_ORACLE_ROWS = [
    ("ContinueStatement", _ANY), ("SimpleType", _ANY), ("TypeParameter", _ANY),
    ("MarkerAnnotation", _ANY), ("NormalAnnotation", _ANY), ("MemberValuePair", _ANY),
    ("QualifiedType", _ANY), ("QualifiedName", _ANY), ("MethodDeclaration", _ANY),
    ("LabeledStatement", _ANY), ("BreakStatement", _ANY), ("ExpressionMethodReference", _ANY),
    ("SwitchCase", _ANY),
    ("MethodInvocation", {"method-name"}),
    ("SuperConstructorInvocation", {"super-class-name"}),
    ("SuperMethodInvocation", {"method-name", "super-class-name"}),
]


def _oracle_filtered(parent_kind, role):
    for kind, roles in _ORACLE_ROWS:
        if kind == parent_kind and (roles is _ANY or role in roles):
            return True
    return False


def test_rule_table_has_sixteen_rows():
    assert len(DEFAULT_RULES) == len(_ORACLE_ROWS) == 16


def test_filter_soundness_on_jpype():
    for path in sorted(JPYPE.rglob("*.java")):
        unit = parse_java(path.read_text(encoding="utf-8"))
        for method in iter_functions(unit):
            for node in method.walk():
                if not node.is_leaf:
                    continue
                cls = classify(node)
                if node.kind != "SimpleName":
                    assert cls is NodeClass.NOT_SIMPLE_NAME
                    continue
                expected = _oracle_filtered(node.parent.kind, node.role)
                assert (cls is NodeClass.FILTERED) == expected, (path.name, node.content, node.parent.kind)


@given(st.sampled_from(sorted({k for k, _ in _ORACLE_ROWS} | {"Block", "Assignment", "FieldAccess", "OtherNode"})),
       st.sampled_from(["method-name", "super-class-name", "receiver", "argument", "name", "type", "left"]))
def test_rule_set_agrees_with_oracle(parent_kind, role):
    assert DEFAULT_RULES.matches(parent_kind, role) == _oracle_filtered(parent_kind, role)


# -- variable resolution ---------------------------------------------------

def _marks(src):
    return [(n.content, n.is_variable) for n in _names(_method(src))]


def test_same_block_resolution():
    assert _marks("void m() { int x; x = 1; }") == [("m", False), ("x", True), ("x", True)]


def test_scope_exit_unmarks():
    marks = _marks("void m() { { int x; } x.foo(); }")
    assert marks[-2:] == [("x", False), ("foo", False)]


def test_method_name_is_never_a_variable():
    marks = dict(_marks("void m(Foo x) { x.foo(); }")[-2:])
    assert marks == {"x": True, "foo": False}


def test_field_visible_in_same_file():
    src = "class A { int count; void m() { count++; other++; } }"
    unit = parse_java(src)
    resolve_variables(unit)
    (method,) = iter_functions(unit)
    assert [(n.content, n.is_variable) for n in _names(method)][1:] == [("count", True), ("other", False)]


def test_lambda_catch_and_for_variables():
    src = ("void m(java.util.List<String> xs) { for (String s : xs) { use(s); } "
           "try { go(); } catch (Exception e) { log(e); } run(v -> v); }")
    marks = [(n.content, n.is_variable) for n in _names(_method(src)) if n.content in ("s", "e", "v", "xs")]
    assert all(v for _, v in marks) and len(marks) == 8


@st.composite
def nested_blocks(draw):
    """Random nesting of blocks, each declaring variables from a tiny pool."""
    pool = ["a", "b", "c"]
    depth = draw(st.integers(1, 4))
    decls = [draw(st.lists(st.sampled_from(pool), unique=True, max_size=2)) for _ in range(depth)]
    use = draw(st.sampled_from(pool))
    exit_at = draw(st.integers(0, depth))
    return decls, use, exit_at


def _declaring_level(decls, use, level):
    for lvl in range(level, -1, -1):
        if use in decls[lvl]:
            return lvl
    return None


@settings(max_examples=200, deadline=None)
@given(nested_blocks())
def test_innermost_declaration_wins(case):
    decls, use, exit_at = case
    depth = len(decls)
    # open depth blocks, close back to level exit_at (clamped), then use the name
    level = min(exit_at, depth - 1)
    body = []
    for d, names in enumerate(decls):
        body.append("{ " + " ".join(f"int {n} = {d};" for n in names))
    body.append("} " * (depth - 1 - level))
    body.append(f"sink({use});")
    body.append("} " * (level + 1))
    method = _method("void m() " + "{ " + "".join(body) + " }")

    use_node = next(n for n in method.walk() if n.kind == "SimpleName" and n.content == use
                    and n.parent.kind == "MethodInvocation")
    expected_level = _declaring_level(decls, use, level)
    assert use_node.is_variable == (expected_level is not None)
    if expected_level is not None:
        decl = use_node.binding
        assert decl.parent.kind == "VariableDeclarationFragment"
        init = decl.parent.child("initializer")
        assert init.content == str(expected_level)


# -- token events ----------------------------------------------------------

def test_token_event_invariants():
    with pytest.raises(ValueError):
        TokenEvent("x", True, NodeClass.FILTERED, is_variable=True)
    with pytest.raises(ValueError):
        TokenEvent("SimpleName", False, NodeClass.CARED)


def test_events_round_trip_jsonl(jpype_functions):
    events = [e for fn in jpype_functions[:20] for e in fn.events]
    text = dumps_events(events)
    assert loads_events(text) == events
    first = json.loads(text.splitlines()[0])
    assert set(first) >= {"fn", "pos", "text", "content", "class", "var"}


def test_tokenize_is_deterministic():
    path = sorted(JPYPE.rglob("*.java"))[0]
    src = path.read_text(encoding="utf-8")
    a = tokenize_source(src, "x.java")
    b = tokenize_source(src, "x.java")
    assert dumps_events([e for f in a for e in f.events]) == dumps_events([e for f in b for e in f.events])


def test_function_ids_carry_path_line_and_name():
    fns = tokenize_source("class A {\n  void one() { }\n\n  int two(int x) { return x; }\n}\n", "pkg/A.java")
    assert [f.id for f in fns] == ["pkg/A.java:2:one", "pkg/A.java:4:two"]


def test_ingest_skips_malformed_file(tmp_path):
    (tmp_path / "Good.java").write_text("class Good { void m(int a) { a++; } }")
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "Bad.java").write_text("class Bad { void m( { }")
    files, skipped = ingest_directory(tmp_path)
    assert list(files) == ["Good.java"]
    assert [s.path for s in skipped] == ["sub/Bad.java"]
    assert skipped[0].line == 1


# -- repetition statistics ------------------------------------------------

def _ev(text, cls=NodeClass.CARED, content=True, parent="Assignment"):
    return TokenEvent(text, content, cls if content else NodeClass.NOT_SIMPLE_NAME, parent_kind=parent)


def test_stats_first_occurrence_is_unrepeatable():
    report = repetition_stats([[_ev("SimpleName", content=False), _ev("x"),
                                _ev("SimpleName", content=False), _ev("x")]], window=3)
    assert report.classes[NodeClass.CARED].rate == 0.5


def test_stats_no_duplicates_all_zero():
    events = [_ev(t) for t in "abcdef"]
    report = repetition_stats([events], window=25)
    assert all(b.rate == 0 for b in report.buckets.values())


def test_stats_empty_corpus():
    with pytest.raises(EmptyCorpusError):
        repetition_stats([], window=5)


def _brute_force_rate(functions, window, node_class):
    total = hit = 0
    for events in functions:
        for t, e in enumerate(events):
            if e.is_content and e.node_class is node_class:
                total += 1
                hit += any(events[j].is_content and events[j].node_class is node_class
                           and events[j].text == e.text for j in range(max(0, t - window), t))
    return hit / total


def test_stats_match_window_scan(jpype_functions):
    seqs = [f.events for f in jpype_functions]
    report = repetition_stats(seqs, window=25)
    for cls in (NodeClass.CARED, NodeClass.FILTERED):
        assert report.classes[cls].rate == pytest.approx(_brute_force_rate(seqs, 25, cls), abs=1e-12)
    assert report.total_events == sum(len(s) for s in seqs)


def test_stats_monotone_in_window(jpype_functions):
    seqs = [f.events for f in jpype_functions[:80]]
    rates = [repetition_stats(seqs, m).classes[NodeClass.CARED].rate for m in (1, 5, 25, 50)]
    assert rates == sorted(rates)


def test_method_names_repeat_less_than_variables(jpype_functions):
    report = repetition_stats([f.events for f in jpype_functions], window=25)
    assert report.bucket("filtered", "MethodInvocation").rate < report.variables.rate
