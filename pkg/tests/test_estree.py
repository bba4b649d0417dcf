"""AST model: decode/encode round trips, registry policing, pre-order."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraggen import corpus
from fraggen.estree import (
    ABSENT,
    IncompleteAst,
    MalformedAst,
    REGISTRY,
    Stub,
    UnsupportedKind,
    decode_ast,
    encode_ast,
    kind,
    node,
    preorder,
)

MINIMAL = '{"type":"Program","body":[{"type":"EmptyStatement"}]}'

FIG1_JSON = json.dumps({
    "type": "Program",
    "body": [
        {"type": "VariableDeclaration", "kind": "var", "declarations": [
            {"type": "VariableDeclarator",
             "id": {"type": "Identifier", "name": "v0"},
             "init": {"type": "ObjectExpression", "properties": []}}]},
        {"type": "ForStatement",
         "init": {"type": "VariableDeclaration", "kind": "var", "declarations": [
             {"type": "VariableDeclarator",
              "id": {"type": "Identifier", "name": "v1"},
              "init": {"type": "Literal", "value": 0, "raw": "0"}}]},
         "test": {"type": "BinaryExpression", "operator": "<",
                  "left": {"type": "Identifier", "name": "v1"},
                  "right": {"type": "Literal", "value": 5, "raw": "5"}},
         "update": {"type": "UpdateExpression", "operator": "++", "prefix": False,
                    "argument": {"type": "Identifier", "name": "v1"}},
         "body": {"type": "BlockStatement", "body": [
             {"type": "ExpressionStatement",
              "expression": {"type": "AssignmentExpression", "operator": "=",
                             "left": {"type": "MemberExpression", "computed": True,
                                      "object": {"type": "Identifier", "name": "v0"},
                                      "property": {"type": "Identifier", "name": "v1"}},
                             "right": {"type": "BinaryExpression", "operator": "+",
                                       "left": {"type": "Identifier", "name": "v1"},
                                       "right": {"type": "Literal", "value": 5,
                                                 "raw": "5"}}}}]}},
    ],
})


def test_decode_minimal_program():
    ast = decode_ast(MINIMAL)
    assert ast.kind.name == "Program"
    body = ast.slot("body")
    assert len(body) == 1 and body[0].kind.name == "EmptyStatement"


def test_decode_fig1_shape():
    ast = decode_ast(FIG1_JSON)
    assert ast == corpus.fig1_program()
    loop = ast.slot("body")[1]
    assert loop.kind.name == "ForStatement"
    stmt = loop.slot("body").slot("body")[0]
    assert stmt.kind.name == "ExpressionStatement"
    assign = stmt.slot("expression")
    assert assign.kind.name == "AssignmentExpression"
    assert assign.slot("left").kind.name == "MemberExpression"


def test_unknown_kind_rejected():
    with pytest.raises(UnsupportedKind, match="WithStatement"):
        decode_ast('{"type":"WithStatement","object":{"type":"Identifier",'
                   '"name":"a"},"body":{"type":"EmptyStatement"}}')


@given(st.text(min_size=1, max_size=20))
def test_decode_never_accepts_unregistered_kind(name):
    if name in REGISTRY:
        return
    with pytest.raises((UnsupportedKind, MalformedAst)):
        decode_ast(json.dumps({"type": name}))


@pytest.mark.parametrize("text", [
    '{"type":"Program"}',                       # missing body list
    '{"type":"Program","body":[null]}',         # holes unsupported
    '{"type":"Identifier"}',                    # missing required value
    '{"body":[]}',                              # missing type
    'not json',
])
def test_malformed_rejected(text):
    with pytest.raises(MalformedAst):
        decode_ast(text)


def test_encode_minimal():
    ast = decode_ast(MINIMAL)
    assert json.loads(encode_ast(ast)) == json.loads(MINIMAL)


def test_encode_rejects_stub():
    broken = node("Program", body=(Stub(kind("EmptyStatement")),))
    with pytest.raises(IncompleteAst):
        encode_ast(broken)


def test_decode_encode_identity_on_fixtures(fixture_asts):
    for name, ast in fixture_asts:
        assert decode_ast(encode_ast(ast)) == ast, name


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_decode_encode_identity_random(seed):
    ast = corpus.random_program(seed)
    assert decode_ast(encode_ast(ast)) == ast


def test_preorder_trivial():
    ast = decode_ast(MINIMAL)
    names = [n.kind.name for n in preorder(ast)]
    assert names == ["Program", "EmptyStatement"]


def fig2_statement():
    """The statement `v0[v1] = v1 + 5;` from the loop body."""
    ast = decode_ast(FIG1_JSON)
    return ast.slot("body")[1].slot("body").slot("body")[0]


def test_preorder_fig2_statement_hand_walk():
    # Hand-derived from the registry slot order.
    seq = list(preorder(fig2_statement()))
    names = [n.kind.name for n in seq]
    assert names == [
        "ExpressionStatement", "AssignmentExpression", "MemberExpression",
        "Identifier", "Identifier", "BinaryExpression", "Identifier", "Literal",
    ]
    idents = [n.slot("name") for n in seq if n.kind.name == "Identifier"]
    assert idents == ["v0", "v1", "v1"]
    assert seq[-1].slot("value") == 5


def _count_nodes(ast) -> int:
    from fraggen.estree import AstNode

    total = 1
    for v in ast.slots:
        if isinstance(v, AstNode):
            total += _count_nodes(v)
        elif isinstance(v, tuple):
            total += sum(_count_nodes(x) for x in v if isinstance(x, AstNode))
    return total


def test_preorder_is_permutation_of_nodes(fixture_asts):
    for name, ast in fixture_asts[:40]:
        seq = list(preorder(ast))
        assert len(seq) == _count_nodes(ast), name
        assert seq[0] is ast
        assert len({id(n) for n in seq}) == len(seq), name


def test_regex_literal_roundtrip():
    ast = corpus.program(corpus.var_decl("v0", corpus.regex_lit("a+b", "gi")))
    back = decode_ast(encode_ast(ast))
    assert back == ast
    lit = back.slot("body")[0].slot("declarations")[0].slot("init")
    assert lit.slot("regex").pattern == "a+b"
    assert lit.slot("value") is ABSENT


def test_literal_raw_preserved():
    ast = decode_ast('{"type":"Program","body":[{"type":"ExpressionStatement",'
                     '"expression":{"type":"Literal","value":5,"raw":"0x5"}}]}')
    lit = ast.slot("body")[0].slot("expression")
    assert lit.slot("raw") == "0x5"
    assert json.loads(encode_ast(ast))["body"][0]["expression"]["raw"] == "0x5"
