from qdelta.metrics import parse_entities


def test_minimal_class_with_one_method():
    tree = parse_entities("class A { void m() {} }")
    assert tree.errors == []
    assert [c.qualified_name for c in tree.all_classes()] == ["A"]
    assert [m.qualified_name for _, m in tree.all_methods()] == ["A.m()"]


def test_empty_input_is_an_empty_tree():
    tree = parse_entities("")
    assert tree.classes == []
    assert tree.errors == []


# Hand-drawn span table for a 20-line fixture with a nested inner class.
NESTED = """\
package fix;

public class Outer {

    private int count;

    public void bump(int by) {
        count += by;
    }

    static class Inner {

        int twice(int value) {
            return value * 2;
        }
    }

    void last() {
    }
}
"""

NESTED_SPANS = {
    "Outer": (3, 20),
    "Outer.bump(int)": (7, 9),
    "Outer.Inner": (11, 16),
    "Outer.Inner.twice(int)": (13, 15),
    "Outer.last()": (18, 19),
}


def test_nested_class_spans_match_hand_drawn_table():
    tree = parse_entities(NESTED)
    assert tree.errors == []
    spans = {c.qualified_name: (c.start_line, c.end_line) for c in tree.all_classes()}
    for cls in tree.all_classes():
        for m in cls.methods:
            spans[m.qualified_name] = (m.start_line, m.end_line)
    assert spans == NESTED_SPANS


def test_nested_spans_are_contained_in_parents():
    tree = parse_entities(NESTED)
    outer = tree.classes[0]
    inner = outer.nested[0]
    assert outer.start_line <= inner.start_line <= inner.end_line <= outer.end_line
    for m in inner.methods:
        assert inner.start_line <= m.start_line <= m.end_line <= inner.end_line


def test_method_signatures_distinguish_overloads():
    tree = parse_entities(
        """
class O {
    void go() {}
    void go(int speed) {}
    void go(int speed, String label) {}
    void go(java.util.List<String> items) {}
}
"""
    )
    names = sorted(m.signature for _, m in tree.all_methods())
    assert names == [
        "go()",
        "go(int)",
        "go(int,String)",
        "go(java.util.List<String>)",
    ]


def test_constructor_is_a_method_keyed_by_class_name():
    tree = parse_entities("class Point { Point(int x) {} }")
    assert [m.qualified_name for _, m in tree.all_methods()] == ["Point.Point(int)"]


def test_fields_and_annotations_are_not_methods():
    tree = parse_entities(
        """
class C {
    private static final int LIMIT = compute(1, 2);
    @Deprecated
    int[] table = {1, 2, 3};
    @Override
    public String toString() { return ""; }
}
"""
    )
    (cls,) = tree.all_classes()
    assert [m.name for m in cls.methods] == ["toString"]
    assert len(cls.fields) == 2


def test_interface_and_abstract_methods_have_no_body():
    tree = parse_entities(
        """
interface Task {
    void run();
    default int priority() { return 0; }
}
"""
    )
    (cls,) = tree.all_classes()
    assert cls.kind == "interface"
    bodies = {m.name: m.body for m in cls.methods}
    assert bodies["run"] is None
    assert bodies["priority"] is not None


def test_doc_comment_attachment_skips_annotations():
    tree = parse_entities(
        """
class D {
    /** documented */
    @Deprecated
    public void a() {}

    // plain comment, not documentation
    public void b() {}
}
"""
    )
    (cls,) = tree.all_classes()
    docs = {m.name: m.doc is not None for m in cls.methods}
    assert docs == {"a": True, "b": False}


def test_single_type_imports_feed_the_type_table():
    tree = parse_entities(
        """
import java.util.List;
import java.util.*;
import static java.lang.Math.max;

class E {}
"""
    )
    assert tree.imports == frozenset({"List"})


def test_unbalanced_braces_are_reported_as_errors():
    tree = parse_entities("class A { void m() {")
    assert tree.errors != []


def test_class_literal_is_not_a_declaration():
    tree = parse_entities("class F { Object t() { return F.class; } }")
    assert [c.name for c in tree.all_classes()] == ["F"]


def test_enum_constants_are_not_methods():
    tree = parse_entities(
        """
enum Color {
    RED(1), GREEN(2);

    private final int code;

    Color(int code) {
        this.code = code;
    }

    int code() { return code; }
}
"""
    )
    (cls,) = tree.all_classes()
    assert cls.kind == "enum"
    assert sorted(m.name for m in cls.methods) == ["Color", "code"]
