"""Client-side checks of the stdio parser/printer service."""

import pytest

from fraggen import corpus
from fraggen.adapter import AdapterError, ParserAdapter
from fraggen.estree import UnsupportedKind
from fraggen.printer import print_program


@pytest.fixture(scope="module")
def adapter(adapter_command):
    with ParserAdapter(adapter_command) as a:
        yield a


def test_parse_minimal(adapter):
    ast = adapter.parse(";")
    assert ast.kind.name == "Program"
    assert ast.slot("body")[0].kind.name == "EmptyStatement"


def test_parse_fig1_source(adapter):
    source = print_program(corpus.fig1_program())
    assert adapter.parse(source) == corpus.fig1_program()


def test_print_roundtrip(adapter):
    prog = corpus.fig1_program()
    printed = adapter.print(prog)
    assert adapter.parse(printed) == prog


def test_syntax_error_reported(adapter):
    with pytest.raises(AdapterError) as exc:
        adapter.parse("var = ;")
    assert exc.value.kind == "syntax"
    assert exc.value.line == 1


def test_unsupported_kind_named(adapter):
    with pytest.raises(UnsupportedKind, match="WithStatement"):
        adapter.parse("with (a) {}")


def test_parse_print_parse_fixpoint(adapter, fixture_asts):
    for name, ast in fixture_asts[:30]:
        first = adapter.parse(print_program(ast))
        printed = adapter.print(first)
        assert adapter.parse(printed) == first, name


def test_malformed_lines_survived(adapter):
    for i in range(50):
        reply = adapter.send_raw(f"garbage {i} {{{{")
        assert reply["ok"] is False and reply["id"] is None
    assert adapter.parse("1;").kind.name == "Program"


def test_ids_match_requests(adapter):
    for source in (";", "1;", "var v0 = 1;"):
        reply = adapter.request({"op": "parse", "source": source})
        assert reply["ok"] is True
