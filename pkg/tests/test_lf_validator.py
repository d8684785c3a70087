"""Validation checks LF001-LF007 and their determinism."""

from __future__ import annotations

from lfforge.lf import parse_model, validate


def check(text: str) -> list:
    result = parse_model(text)
    assert result.ok, result.diagnostics
    return validate(result.model)


def codes(text: str) -> list[str]:
    return [d.code for d in check(text)]


def test_minimal_valid_model_is_clean():
    assert check("target C; main reactor {}") == []


def test_missing_target_is_lf001():
    diags = check("main reactor {}")
    assert [d.code for d in diags] == ["LF001"]
    assert diags[0].severity == "error"
    assert "target" in diags[0].message


def test_no_main_is_lf002():
    assert "LF002" in codes("target C; reactor A {}")


def test_two_mains_is_lf002():
    assert "LF002" in codes("target C; main reactor A {} main reactor B {}")


def test_unknown_instantiation_is_lf003():
    assert "LF003" in codes("target C; main reactor { a = new Ghost(); }")


def test_sibling_input_to_input_is_lf004():
    text = """target C;
reactor A { input p: int; }
reactor B { input q: int; }
main reactor {
    a = new A();
    b = new B();
    a.p -> b.q;
}
"""
    diags = check(text)
    assert any(d.code == "LF004" and "direction" in d.message for d in diags)


def test_output_to_output_sibling_is_lf004():
    text = """target C;
reactor A { output p: int; }
main reactor {
    a = new A();
    b = new A();
    a.p -> b.p;
}
"""
    assert "LF004" in codes(text)


def test_legal_connection_shapes_pass():
    # covers output->input, parent-input->child-input, child-output->parent-output
    text = """target C;
reactor Inner {
    input x: int;
    output y: int;
}
reactor Outer {
    input in_port: int;
    output out_port: int;
    child = new Inner();
    in_port -> child.x;
    child.y -> out_port;
}
main reactor {
    a = new Inner();
    b = new Inner();
    o = new Outer();
    a.y -> b.x;
}
"""
    assert codes(text) == []


def test_unresolved_connection_endpoint_is_lf004():
    assert "LF004" in codes("target C; main reactor { nowhere.out -> elsewhere.x; }")


def test_unresolved_trigger_is_lf005():
    assert "LF005" in codes("target C; main reactor { reaction(ghost) {= x =} }")


def test_unresolved_effect_is_lf005():
    assert "LF005" in codes("target C; main reactor { timer T; reaction(T) -> ghost {= x =} }")


def test_trigger_on_contained_output_is_legal():
    text = """target C;
reactor A { output y: int; }
main reactor {
    a = new A();
    reaction(a.y) {= observe(); =}
}
"""
    assert codes(text) == []


def test_duplicate_element_name_is_lf006():
    assert "LF006" in codes("target C; main reactor { input x; output x; }")


def test_duplicate_reactor_name_is_lf006():
    assert "LF006" in codes("target C; reactor A {} reactor A {} main reactor {}")


def test_timer_without_unit_is_lf007():
    assert "LF007" in codes("target C; main reactor { timer T(5); }")


def test_timer_zero_and_units_are_legal():
    assert codes("target C; main reactor { timer a(0); timer b(0, 0); "
                 "timer c(100 ms, 1 s); timer d(3 hours); }") == []


def test_timer_bad_unit_is_lf007():
    assert "LF007" in codes("target C; main reactor { timer T(5 parsecs); }")


def test_timer_parameter_reference_is_lf007():
    # the subset demands literal times; references are reported
    assert "LF007" in codes("target C; main reactor { timer T(delay); }")


def test_validate_is_deterministic_and_pure():
    result = parse_model("reactor A { input x; input x; a.b -> c.d; } reactor A {}")
    assert result.ok
    first = validate(result.model)
    second = validate(result.model)
    assert first == second
    assert [d.code for d in first] == [d.code for d in second]


def test_every_span_is_inside_source():
    text = "target C;\nmain reactor {\n    timer T(5);\n    a = new Ghost();\n}\n"
    result = parse_model(text)
    for d in validate(result.model):
        lines = text.split("\n")
        offset = sum(len(line) + 1 for line in lines[: d.span.line]) + d.span.col
        assert offset + d.span.length <= len(text)
