import pytest
from hypothesis import given
from hypothesis import strategies as st

from semschema import jslt
from semschema.errors import JsltCompileError, JsltRuntimeError

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-1000, 1000) | st.text(max_size=10),
    lambda children: st.lists(children, max_size=3)
    | st.dictionaries(st.text(max_size=6), children, max_size=3),
    max_leaves=10,
)


def run(source: str, value=None):
    return jslt.compile(source).evaluate(value)


class TestLiteralsAndOperators:
    def test_literals(self):
        assert run("null") is None
        assert run("true") is True
        assert run("42") == 42
        assert run("-3.5") == -3.5
        assert run('"hi"') == "hi"
        assert run("[1, 2, [3]]") == [1, 2, [3]]
        assert run('{"a": 1, "b": {"c": 2}}') == {"a": 1, "b": {"c": 2}}

    def test_arithmetic(self):
        assert run("1 + 2 * 3") == 7
        assert run("(1 + 2) * 3") == 9
        assert run("7 / 2") == 3.5
        assert run("5 - 2 - 1") == 2
        assert run("-(2 + 3)") == -5

    def test_plus_concatenates_and_merges(self):
        assert run('"a" + "b"') == "ab"
        assert run('"a" + 1') == "a1"
        assert run('1 + "a"') == "1a"
        assert run("[1] + [2, 3]") == [1, 2, 3]
        assert run('{"a": 1, "x": 0} + {"a": 2, "y": 3}') == {"a": 1, "x": 0, "y": 3}

    def test_arithmetic_null_propagates(self):
        assert run("null + 1") is None
        assert run("1 - null") is None
        assert run("null * null") is None
        assert run("- null") is None

    def test_comparisons(self):
        assert run("1 < 2") is True
        assert run("2 <= 2") is True
        assert run('"a" < "b"') is True
        assert run("3 >= 4") is False
        assert run("1 == 1.0") is True
        assert run("true != 1") is True
        assert run('"1" == 1') is False

    def test_boolean_operators_return_bools(self):
        assert run("1 and 2") is True
        assert run("0 and []") is False  # 0 is true, [] is false
        assert run("null or {}") is False
        assert run('"" or "x"') is True

    def test_and_short_circuits(self):
        assert run("false and 1 / 0") is False
        assert run("true or 1 / 0") is True

    def test_runtime_errors(self):
        with pytest.raises(JsltRuntimeError):
            run("1 / 0")
        with pytest.raises(JsltRuntimeError):
            run("1 < null")
        with pytest.raises(JsltRuntimeError):
            run('"s" - 1')
        with pytest.raises(JsltRuntimeError):
            run('1 < "a"')


class TestContextAccess:
    def test_dot_returns_input(self):
        assert run(".", {"a": 1}) == {"a": 1}
        assert run(".", None) is None

    def test_key_chains(self):
        event = {"device": {"osType": "ios"}}
        assert run(".device.osType", event) == "ios"
        assert run(".device.missing", event) is None
        assert run(".missing.deeper", event) is None

    def test_quoted_keys(self):
        assert run('.actor."spt:userId"', {"actor": {"spt:userId": "u1"}}) == "u1"

    def test_access_on_non_objects_is_null(self):
        assert run(".key", [1, 2]) is None
        assert run(".key", "text") is None
        assert run(".key", 7) is None

    def test_indexing(self):
        assert run(".[0]", [10, 20]) == 10
        assert run(".[-1]", [10, 20]) == 20
        assert run(".[9]", [10, 20]) is None
        assert run(".[0]", "abc") == "a"
        assert run(".[0]", None) is None
        assert run('.["a"]', {"a": 5}) == 5

    def test_slicing(self):
        assert run(".[1:3]", [0, 1, 2, 3]) == [1, 2]
        assert run(".[:2]", "abcd") == "ab"
        assert run(".[1:]", [0, 1, 2]) == [1, 2]
        assert run(".[-2:]", [0, 1, 2]) == [1, 2]

    def test_non_integral_index_is_an_error(self):
        with pytest.raises(JsltRuntimeError):
            run(".[1.5]", [1, 2, 3])


class TestVariablesAndControl:
    def test_let(self):
        assert run("let x = 2 let y = $x * 3 $y + $x") == 8

    def test_let_shadowing_inside_if(self):
        source = "let x = 1 if (true) let x = 2 $x else $x"
        assert run(source) == 2

    def test_if_else(self):
        assert run('if (.flag) "y" else "n"', {"flag": True}) == "y"
        assert run('if (.flag) "y" else "n"', {}) == "n"
        assert run('if (.flag) "y"', {}) is None

    def test_zero_is_truthy_empty_is_falsy(self):
        assert run('if (0) "t" else "f"') == "t"
        assert run('if ([]) "t" else "f"') == "f"
        assert run('if ({}) "t" else "f"') == "f"
        assert run('if ("") "t" else "f"') == "f"


class TestComprehensions:
    def test_array_comprehension(self):
        assert run("[for (.) . * 2]", [1, 2, 3]) == [2, 4, 6]

    def test_array_comprehension_with_filter(self):
        assert run("[for (.) . if (. > 1)]", [1, 2, 3]) == [2, 3]

    def test_object_source_yields_key_value_pairs(self):
        assert run("[for (.) .key]", {"a": 1, "b": 2}) == ["a", "b"]
        assert run("[for (.) .value]", {"a": 1, "b": 2}) == [1, 2]

    def test_object_comprehension(self):
        result = run('{for (.) .key : .value + 1}', {"a": 1, "b": 2})
        assert result == {"a": 2, "b": 3}

    def test_object_comprehension_drops_null_values(self):
        result = run("{for (.) .key : .value}", {"a": 1, "b": None})
        assert result == {"a": 1}

    def test_null_source_yields_null(self):
        assert run("[for (.missing) .]", {}) is None
        assert run("{for (.missing) .key : .value}", {}) is None

    def test_loop_over_scalar_is_an_error(self):
        with pytest.raises(JsltRuntimeError):
            run("[for (.) .]", 42)


class TestObjectConstruction:
    def test_null_values_dropped(self):
        assert run('{"a": .x, "b": 1}', {}) == {"b": 1}

    def test_empty_object(self):
        assert run("{}", {"a": 1}) == {}

    def test_matcher_copies_the_rest(self):
        result = run('{"a": 1, * : .}', {"a": 9, "b": 2, "c": None})
        assert result == {"a": 1, "b": 2, "c": None}

    def test_matcher_exclusions(self):
        result = run("{* - b, c : .}", {"a": 1, "b": 2, "c": 3})
        assert result == {"a": 1}

    def test_matcher_expression_sees_each_value(self):
        result = run("{* : . + 1}", {"a": 1, "b": 2})
        assert result == {"a": 2, "b": 3}

    def test_matcher_on_non_object_input(self):
        assert run("{* : .}", [1, 2]) == {}

    def test_computed_keys(self):
        assert run('{"k" + "1": 2}') == {"k1": 2}
        with pytest.raises(JsltRuntimeError):
            run("{1: 2}")

    def test_object_lets(self):
        assert run('{let n = 2 "a": $n, "b": $n * 2}') == {"a": 2, "b": 4}


class TestFunctions:
    def test_user_function(self):
        assert run("def double(x) $x * 2 double(21)") == 42

    def test_recursion(self):
        source = "def fact(n) if ($n < 2) 1 else $n * fact($n - 1) fact(6)"
        assert run(source) == 720

    def test_function_body_sees_params_not_outer_lets(self):
        with pytest.raises(JsltCompileError):
            jslt.compile("let a = 1 def f(x) $a + $x f(1)")

    def test_function_body_sees_context(self):
        assert run("def grab() .name grab()", {"name": "n"}) == "n"

    def test_runaway_recursion_reported(self):
        with pytest.raises(JsltRuntimeError, match="call depth"):
            run("def loop(n) loop($n + 1) loop(0)")


class TestBuiltins:
    def test_round(self):
        assert run("round(2.4)") == 2
        assert run("round(2.5)") == 3
        assert run("round(-2.5)") == -2
        assert run("round(null)") is None

    def test_boolean_and_not(self):
        assert run("boolean(.x)", {"x": "y"}) is True
        assert run("boolean(.x)", {}) is False
        assert run("not(.x)", {}) is True

    def test_string(self):
        assert run("string(12)") == "12"
        assert run("string(1.0)") == "1"
        assert run('string("s")') == "s"
        assert run("string(null)") == "null"
        assert run("string([1, 2])") == "[1,2]"

    def test_number(self):
        assert run('number("12")') == 12
        assert run('number("3.5")') == 3.5
        assert run("number(7)") == 7
        assert run("number(null)") is None
        assert run('number("bad", 9)') == 9
        with pytest.raises(JsltRuntimeError):
            run('number("bad")')
        with pytest.raises(JsltRuntimeError):
            run("number(true)")

    def test_size(self):
        assert run('size("abc")') == 3
        assert run("size([1, 2])") == 2
        assert run('size({"a": 1})') == 1
        assert run("size(null)") is None
        with pytest.raises(JsltRuntimeError):
            run("size(5)")

    def test_contains(self):
        assert run("contains(2, [1, 2])") is True
        assert run("contains(2, [1, [2]])") is False
        assert run('contains("a", {"a": 1})') is True
        assert run('contains("bc", "abcd")') is True
        assert run("contains(1, null)") is False

    def test_test(self):
        assert run('test("sdrn:mp:user:1", "^sdrn:")') is True
        assert run('test("nope", "^sdrn:")') is False
        assert run('test(null, ".*")') is False
        assert run('test(123, "^12")') is True  # non-strings are stringified

    def test_type_predicates(self):
        assert run("is-object({})") is True
        assert run("is-object([])") is False
        assert run("is-array([])") is True
        assert run('is-array("x")') is False

    def test_uuid_validate(self):
        assert run('uuid-validate("93b15a46-5a87-4cfe-9a86-efe98d63ace6")') is True
        assert run('uuid-validate("not-a-uuid")') is False

    def test_dynamic_bad_pattern_fails_at_runtime(self):
        program = jslt.compile("test(.x, .p)")
        with pytest.raises(JsltRuntimeError):
            program.evaluate({"x": "a", "p": "("})


class TestParseTime:
    FMT = '"yyyy-MM-dd\'T\'HH:mm:ssX"'

    def test_epoch(self):
        assert run(f'parse-time("1970-01-01T00:00:00Z", {self.FMT})') == 0

    def test_known_instant(self):
        # 2020-01-02T03:04:05Z
        assert run(f'parse-time("2020-01-02T03:04:05Z", {self.FMT})') == 1577934245

    def test_zone_offsets(self):
        base = run(f'parse-time("1970-01-01T01:00:00Z", {self.FMT})')
        assert base == 3600
        assert run(f'parse-time("1970-01-01T01:00:00+01:00", {self.FMT})') == 0
        assert run(f'parse-time("1970-01-01T01:00:00+0100", {self.FMT})') == 0
        assert run(f'parse-time("1970-01-01T01:00:00+01", {self.FMT})') == 0
        assert run(f'parse-time("1970-01-01T00:30:00-00:30", {self.FMT})') == 3600

    def test_null_input(self):
        assert run(f"parse-time(null, {self.FMT})") is None

    def test_fallback_on_bad_value(self):
        assert run(f'parse-time("junk", {self.FMT}, -1)') == -1
        with pytest.raises(JsltRuntimeError):
            run(f'parse-time("junk", {self.FMT})')

    def test_bad_format_raises_even_with_fallback(self):
        # a literal bad format fails at compile time; a dynamic one at runtime
        with pytest.raises(JsltRuntimeError):
            run("parse-time(.t, .fmt, -1)", {"t": "x", "fmt": "yyyy-QQ"})

    def test_quoted_literals(self):
        assert run("parse-time(\"1970y\", \"yyyy'y'\")") == 0


class TestCompileErrors:
    @pytest.mark.parametrize(
        "source, fragment",
        [
            ("foo", "did you mean"),
            ("unknown(1)", "unknown function"),
            ("round(1, 2)", "argument"),
            ("parse-time()", "argument"),
            ("$missing", "undefined variable"),
            ("1 < 2 < 3", "chained"),
            ('{* : ., "a": 1}', "last"),
            ('test(.x, "(")', "pattern"),
            ('parse-time(.x, "bogus-QQ")', "format"),
            ("def f(x, x) $x f(1)", "parameter"),
            ("def f() 1 def f() 2 f()", "defined twice"),
            ("let x = ", "expected"),
            ("{", "expected"),
            ("if true 1", "("),
        ],
    )
    def test_messages(self, source, fragment):
        with pytest.raises(JsltCompileError) as err:
            jslt.compile(source)
        assert fragment in str(err.value)

    def test_deep_nesting_rejected(self):
        source = "[" * 600 + "1" + "]" * 600
        with pytest.raises(JsltCompileError):
            jslt.compile(source)

    def test_error_position_reported(self):
        with pytest.raises(JsltCompileError) as err:
            jslt.compile("1 +\n  bogus")
        assert err.value.line == 2


class TestPrograms:
    def test_program_reuse(self):
        program = jslt.compile('{"n": .n * 2}')
        assert program.evaluate({"n": 1}) == {"n": 2}
        assert program.evaluate({"n": 5}) == {"n": 10}

    def test_relocation_shape(self):
        program = jslt.compile(
            '{"os": .device.osType, "lang": .device.acceptLanguage,'
            ' "flags": {"logged_in": boolean(.actor."spt:userId")}}'
        )
        result = program.evaluate(
            {"device": {"osType": "android"}, "actor": {"spt:userId": "sdrn:m:user:4"}}
        )
        assert result == {"os": "android", "flags": {"logged_in": True}}

    @given(json_values)
    def test_identity_program(self, value):
        assert run(".", value) == value

    @given(st.dictionaries(st.text(max_size=6), json_values, max_size=4))
    def test_matcher_identity_on_objects(self, value):
        assert run("{* : .}", value) == value

    @given(st.lists(json_values, max_size=4))
    def test_comprehension_identity_on_arrays(self, value):
        assert run("[for (.) .]", value) == value
