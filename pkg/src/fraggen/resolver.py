"""Static repair of reference errors in generated ASTs.

Builds scopes with var/function hoisting, tracks a ten-value type per
binding updated at assignments, infers a type for each undeclared reference
from its usage, and rewrites the reference to a live same-typed binding.
When a scope chain offers no candidate at all, a fresh initialized `var`
declaration is prepended so the zero-reference-error postcondition holds
unconditionally.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .estree import ABSENT, AstNode, RegexValue, node
from .normalize import BuiltinRegistry, pattern_names


class JsType(str, Enum):
    ARRAY = "array"
    BOOLEAN = "boolean"
    FUNCTION = "function"
    NULL = "null"
    NUMBER = "number"
    OBJECT = "object"
    REGEX = "regex"
    STRING = "string"
    UNDEFINED = "undefined"
    UNKNOWN = "unknown"


_ARITH_OPS = frozenset({"-", "*", "/", "%", "**", "<<", ">>", ">>>", "&", "|", "^"})

_FUNCTION_KINDS = frozenset({
    "FunctionDeclaration", "FunctionExpression", "ArrowFunctionExpression",
})


@dataclass
class UsageHints:
    """Data-driven mapping from reference usage to an inferred type."""

    properties: dict[str, JsType]
    positions: dict[str, JsType]

    @classmethod
    def from_dict(cls, obj: dict) -> "UsageHints":
        return cls({k: JsType(v) for k, v in obj.get("properties", {}).items()},
                   {k: JsType(v) for k, v in obj.get("positions", {}).items()})

    @classmethod
    def load(cls, path: str | Path) -> "UsageHints":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "UsageHints":
        data = resources.files("fraggen").joinpath("data/usage_hints.json")
        return cls.from_dict(json.loads(data.read_text(encoding="utf-8")))


@dataclass
class Scope:
    kind: str  # builtin | program | function | block | catch
    bindings: dict[str, JsType] = field(default_factory=dict)
    parent: "Scope | None" = None
    body_owner: bool = False  # owns a statement list fresh decls can prepend to
    pending: list[AstNode] = field(default_factory=list)
    children: list["Scope"] = field(default_factory=list)

    def chain(self):
        s: Scope | None = self
        while s is not None:
            yield s
            s = s.parent

    def lookup(self, name: str) -> "Scope | None":
        for s in self.chain():
            if name in s.bindings:
                return s
        return None

    def hoist_target(self) -> "Scope":
        for s in self.chain():
            if s.kind in ("function", "program"):
                return s
        return self

    def owner(self) -> "Scope":
        for s in self.chain():
            if s.body_owner:
                return s
        raise AssertionError("program scope must own a body")


def infer_static_type(expr: AstNode) -> JsType:
    """Type of an expression readable from its node kind alone."""
    k = expr.kind.name
    if k == "ArrayExpression":
        return JsType.ARRAY
    if k == "ObjectExpression":
        return JsType.OBJECT
    if k in ("FunctionExpression", "ArrowFunctionExpression", "ClassExpression"):
        return JsType.FUNCTION
    if k == "Literal":
        if isinstance(expr.slot("regex"), RegexValue):
            return JsType.REGEX
        v = expr.slot("value")
        if isinstance(v, bool):
            return JsType.BOOLEAN
        if v is None:
            return JsType.NULL
        if isinstance(v, (int, float)):
            return JsType.NUMBER
        if isinstance(v, str):
            return JsType.STRING
        return JsType.UNKNOWN
    if k == "Identifier" and expr.slot("name") == "undefined":
        return JsType.UNDEFINED
    return JsType.UNKNOWN


def _builtin_scope(builtins: BuiltinRegistry) -> Scope:
    bindings: dict[str, JsType] = {}
    for name in sorted(builtins.names):
        bindings[name] = JsType(builtins.types.get(name, "unknown"))
    for name in sorted(builtins.test_functions):
        bindings[name] = JsType(builtins.types.get(name, "function"))
    return Scope("builtin", bindings)


def _iter_children(n: AstNode):
    for (sname, ar), v in zip(n.kind.slots, n.slots):
        if isinstance(v, AstNode):
            yield sname, v
        elif isinstance(v, tuple):
            for item in v:
                if isinstance(item, AstNode):
                    yield sname, item


def _hoist_vars(n: AstNode, scope: Scope) -> None:
    """Bind var declarators and function declarations reachable without
    crossing a nested function boundary."""
    k = n.kind.name
    if k == "FunctionDeclaration":
        scope.bindings.setdefault(n.slot("id").slot("name"), JsType.FUNCTION)
        return
    if k in ("FunctionExpression", "ArrowFunctionExpression"):
        return
    if k == "VariableDeclaration" and n.slot("kind") == "var":
        for d in n.slot("declarations"):
            for name in pattern_names(d.slot("id")):
                scope.bindings.setdefault(name, JsType.UNDEFINED)
    for _, child in _iter_children(n):
        _hoist_vars(child, scope)


def _collect_lexical(stmts, scope: Scope) -> None:
    """Bind let/const/class declared directly in this statement list."""
    for s in stmts:
        k = s.kind.name
        if k == "VariableDeclaration" and s.slot("kind") in ("let", "const"):
            for d in s.slot("declarations"):
                for name in pattern_names(d.slot("id")):
                    scope.bindings.setdefault(name, JsType.UNDEFINED)
        elif k == "ClassDeclaration":
            scope.bindings.setdefault(s.slot("id").slot("name"), JsType.FUNCTION)


def _collect_head_lexical(decl: AstNode, scope: Scope) -> None:
    if decl.kind.name == "VariableDeclaration" and decl.slot("kind") in ("let", "const"):
        for d in decl.slot("declarations"):
            for name in pattern_names(d.slot("id")):
                scope.bindings.setdefault(name, JsType.UNDEFINED)


def _function_scope(n: AstNode, parent: Scope) -> Scope:
    body = n.slot("body")
    scope = Scope("function", parent=parent,
                  body_owner=body.kind.name == "BlockStatement")
    parent.children.append(scope)
    nid = n.slot("id") if n.kind.name != "ArrowFunctionExpression" else ABSENT
    if nid is not ABSENT:
        scope.bindings.setdefault(nid.slot("name"), JsType.FUNCTION)
    for p in n.slot("params"):
        for name in pattern_names(p):
            scope.bindings.setdefault(name, JsType.UNDEFINED)
    if body.kind.name == "BlockStatement":
        for s in body.slot("body"):
            _hoist_vars(s, scope)
        _collect_lexical(body.slot("body"), scope)
    return scope


def build_scopes(ast: AstNode, builtins: BuiltinRegistry) -> Scope:
    """Scope tree with hoisted bindings; the program scope sits under a
    builtin layer carrying registry types."""
    root = Scope("program", parent=_builtin_scope(builtins), body_owner=True)
    root.parent.children.append(root)

    def visit(n: AstNode, scope: Scope) -> None:
        k = n.kind.name
        if k in _FUNCTION_KINDS:
            inner = _function_scope(n, scope)
            for _, child in _iter_children(n):
                if child is not n.slot("id") or k == "ArrowFunctionExpression":
                    visit(child, inner)
            return
        if k == "BlockStatement":
            inner = Scope("block", parent=scope, body_owner=True)
            scope.children.append(inner)
            _collect_lexical(n.slot("body"), inner)
            for s in n.slot("body"):
                visit(s, inner)
            return
        if k == "CatchClause":
            inner = Scope("catch", parent=scope, body_owner=True)
            scope.children.append(inner)
            param = n.slot("param")
            if param is not ABSENT:
                for name in pattern_names(param):
                    inner.bindings.setdefault(name, JsType.UNDEFINED)
            for s in n.slot("body").slot("body"):
                visit(s, inner)
            return
        if k in ("ForStatement", "ForInStatement", "ForOfStatement"):
            inner = Scope("block", parent=scope, body_owner=False)
            scope.children.append(inner)
            head = n.slot("init") if k == "ForStatement" else n.slot("left")
            if head is not ABSENT and isinstance(head, AstNode):
                _collect_head_lexical(head, inner)
            for _, child in _iter_children(n):
                visit(child, inner)
            return
        if k == "SwitchStatement":
            inner = Scope("block", parent=scope, body_owner=False)
            scope.children.append(inner)
            visit(n.slot("discriminant"), scope)
            for case in n.slot("cases"):
                _collect_lexical(case.slot("consequent"), inner)
                visit(case, inner)
            return
        for _, child in _iter_children(n):
            visit(child, scope)

    if ast.kind.name == "Program":
        for s in ast.slot("body"):
            _hoist_vars(s, root)
        _collect_lexical(ast.slot("body"), root)
        for s in ast.slot("body"):
            visit(s, root)
    else:
        _hoist_vars(ast, root)
        visit(ast, root)
    return root


_SKIP_REF = {
    ("LabeledStatement", "label"),
    ("BreakStatement", "label"),
    ("ContinueStatement", "label"),
    ("MetaProperty", "meta"),
    ("MetaProperty", "property"),
}


def _is_reference(parent: AstNode | None, slot_name: str | None) -> bool:
    if parent is None:
        return True
    pk = parent.kind.name
    if (pk, slot_name) in _SKIP_REF:
        return False
    if pk == "MemberExpression" and slot_name == "property" and not parent.slot("computed"):
        return False
    if pk in ("Property", "MethodDefinition") and slot_name == "key" and not parent.slot("computed"):
        return False
    return True


def _usage_hint(parent: AstNode | None, slot_name: str | None,
                hints: UsageHints) -> JsType:
    if parent is None:
        return JsType.UNKNOWN
    pk = parent.kind.name
    if pk in ("CallExpression", "NewExpression") and slot_name == "callee":
        return hints.positions.get("call", JsType.UNKNOWN)
    if pk == "UpdateExpression" and slot_name == "argument":
        return hints.positions.get("update", JsType.UNKNOWN)
    if (pk == "BinaryExpression" and slot_name in ("left", "right")
            and parent.slot("operator") in _ARITH_OPS):
        return hints.positions.get("arithmetic", JsType.UNKNOWN)
    if pk == "MemberExpression" and slot_name == "object":
        if parent.slot("computed"):
            return hints.positions.get("computed_object", JsType.UNKNOWN)
        prop = parent.slot("property")
        if prop.kind.name == "Identifier":
            return hints.properties.get(prop.slot("name"), JsType.UNKNOWN)
    return JsType.UNKNOWN


def _default_init(t: JsType) -> AstNode:
    if t == JsType.ARRAY:
        return node("ArrayExpression", elements=())
    if t == JsType.BOOLEAN:
        return node("Literal", value=False, raw="false", regex=ABSENT)
    if t == JsType.FUNCTION:
        return node("FunctionExpression", id=ABSENT, params=(),
                    body=node("BlockStatement", body=()),
                    generator=False, **{"async": False})
    if t == JsType.NULL:
        return node("Literal", value=None, raw="null", regex=ABSENT)
    if t == JsType.OBJECT:
        return node("ObjectExpression", properties=())
    if t == JsType.REGEX:
        return node("Literal", value=ABSENT, raw="/a/", regex=RegexValue("a", ""))
    if t == JsType.STRING:
        return node("Literal", value="", raw='""', regex=ABSENT)
    if t == JsType.UNDEFINED:
        return node("Identifier", name="undefined")
    return node("Literal", value=0, raw="0", regex=ABSENT)


def _used_names(ast: AstNode) -> set[str]:
    names: set[str] = set()

    def visit(n: AstNode) -> None:
        if n.kind.name == "Identifier":
            names.add(n.slot("name"))
            return
        for _, child in _iter_children(n):
            visit(child)

    visit(ast)
    return names


def scan_undeclared(ast: AstNode, builtins: BuiltinRegistry) -> list[str]:
    """Independent re-scan: names referenced without any reachable binding."""
    found: list[str] = []

    def walk(n: AstNode, scope: Scope, parent=None, slot_name=None, binding=False):
        k = n.kind.name
        if k == "Identifier":
            if binding or not _is_reference(parent, slot_name):
                return
            if scope.lookup(n.slot("name")) is None:
                found.append(n.slot("name"))
            return
        if k in _FUNCTION_KINDS:
            inner = _function_scope(n, scope)
            for p in n.slot("params"):
                walk(p, inner, n, "params", binding=True)
            walk(n.slot("body"), inner, n, "body")
            return
        if k == "BlockStatement":
            inner = Scope("block", parent=scope)
            _collect_lexical(n.slot("body"), inner)
            for s in n.slot("body"):
                walk(s, inner, n, "body")
            return
        if k == "CatchClause":
            inner = Scope("catch", parent=scope)
            param = n.slot("param")
            if param is not ABSENT:
                for name in pattern_names(param):
                    inner.bindings.setdefault(name, JsType.UNDEFINED)
            walk(n.slot("body"), inner, n, "body")
            return
        if k in ("ForStatement", "ForInStatement", "ForOfStatement"):
            inner = Scope("block", parent=scope)
            head = n.slot("init") if k == "ForStatement" else n.slot("left")
            if head is not ABSENT and isinstance(head, AstNode):
                _collect_head_lexical(head, inner)
            for sname, child in _iter_children(n):
                walk(child, inner, n, sname)
            return
        if k == "SwitchStatement":
            inner = Scope("block", parent=scope)
            for case in n.slot("cases"):
                _collect_lexical(case.slot("consequent"), inner)
            walk(n.slot("discriminant"), scope, n, "discriminant")
            for case in n.slot("cases"):
                walk(case, inner, n, "cases")
            return
        if k == "VariableDeclarator":
            walk(n.slot("id"), scope, n, "id", binding=True)
            init = n.slot("init")
            if init is not ABSENT:
                walk(init, scope, n, "init")
            return
        if k in ("ClassDeclaration", "ClassExpression"):
            sup = n.slot("superClass")
            if sup is not ABSENT:
                walk(sup, scope, n, "superClass")
            walk(n.slot("body"), scope, n, "body")
            return
        if k == "AssignmentPattern" and binding:
            walk(n.slot("left"), scope, n, "left", binding=True)
            walk(n.slot("right"), scope, n, "right")
            return
        if k in ("ObjectPattern", "ArrayPattern", "RestElement") and binding:
            for sname, child in _iter_children(n):
                if k == "ObjectPattern" and child.kind.name == "Property":
                    walk(child.slot("value"), scope, child, "value", binding=True)
                else:
                    walk(child, scope, n, sname, binding=True)
            return
        for sname, child in _iter_children(n):
            walk(child, scope, n, sname, binding=binding)

    root = Scope("program", parent=_builtin_scope(builtins))
    if ast.kind.name == "Program":
        for s in ast.slot("body"):
            _hoist_vars(s, root)
        _collect_lexical(ast.slot("body"), root)
        for s in ast.slot("body"):
            walk(s, root, ast, "body")
    else:
        _hoist_vars(ast, root)
        walk(ast, root)
    return found


def resolve_references(ast: AstNode, builtins: BuiltinRegistry,
                       rng: random.Random,
                       hints: UsageHints | None = None,
                       ) -> tuple[AstNode, list[tuple[str, str, JsType]]]:
    """Rewrite undeclared references to live bindings; returns the repaired
    tree and a (old-name, new-name, inferred-type) report."""
    hints = hints or UsageHints.default()
    report: list[tuple[str, str, JsType]] = []
    used = _used_names(ast)

    def candidates(scope: Scope, want: JsType | None) -> list[str]:
        seen: set[str] = set()
        out: list[str] = []
        for s in scope.chain():
            if s.kind == "builtin":
                break
            for name, t in s.bindings.items():
                if name in seen:
                    continue
                seen.add(name)
                if want is None or t == want:
                    out.append(name)
        return out

    def make_fresh(scope: Scope, want: JsType) -> str:
        i = 0
        while f"v{i}" in used:
            i += 1
        name = f"v{i}"
        used.add(name)
        owner = scope.owner()
        owner.bindings[name] = want
        decl = node("VariableDeclaration", kind="var", declarations=(
            node("VariableDeclarator", id=node("Identifier", name=name),
                 init=_default_init(want)),))
        owner.pending.append(decl)
        return name

    def resolve_ident(n: AstNode, scope: Scope, parent, slot_name) -> AstNode:
        name = n.slot("name")
        if scope.lookup(name) is not None:
            return n
        want = _usage_hint(parent, slot_name, hints)
        cands = candidates(scope, None if want == JsType.UNKNOWN else want)
        if not cands and want != JsType.UNKNOWN:
            cands = candidates(scope, None)
        if cands:
            new = rng.choice(cands)
        else:
            new = make_fresh(scope, want)
        report.append((name, new, want))
        return n.with_slot("name", new)

    def update_type(scope: Scope, name: str, t: JsType) -> None:
        where = scope.lookup(name)
        if where is not None and where.kind != "builtin":
            where.bindings[name] = t

    def rw_stmts(stmts, scope: Scope, parent, slot_name) -> tuple:
        return tuple(rw(s, scope, parent, slot_name) for s in stmts)

    def finalize_body(stmts: tuple, scope: Scope) -> tuple:
        return tuple(scope.pending) + stmts

    def rw_function(n: AstNode, scope: Scope) -> AstNode:
        inner = _function_scope(n, scope)
        params = tuple(rw(p, inner, n, "params", binding=True) for p in n.slot("params"))
        body = n.slot("body")
        if body.kind.name == "BlockStatement":
            stmts = rw_stmts(body.slot("body"), inner, body, "body")
            new_body = AstNode(body.kind, (finalize_body(stmts, inner),))
        else:
            new_body = rw(body, inner, n, "body")
        out = n.with_slot("params", params).with_slot("body", new_body)
        return out

    def rw(n: AstNode, scope: Scope, parent=None, slot_name=None,
           binding=False) -> AstNode:
        k = n.kind.name
        if k == "Identifier":
            if binding or not _is_reference(parent, slot_name):
                return n
            return resolve_ident(n, scope, parent, slot_name)
        if k in _FUNCTION_KINDS:
            return rw_function(n, scope)
        if k == "BlockStatement":
            inner = Scope("block", parent=scope, body_owner=True)
            scope.children.append(inner)
            _collect_lexical(n.slot("body"), inner)
            stmts = rw_stmts(n.slot("body"), inner, n, "body")
            return AstNode(n.kind, (finalize_body(stmts, inner),))
        if k == "CatchClause":
            inner = Scope("catch", parent=scope, body_owner=True)
            scope.children.append(inner)
            param = n.slot("param")
            new_param = ABSENT
            if param is not ABSENT:
                for name in pattern_names(param):
                    inner.bindings.setdefault(name, JsType.UNDEFINED)
                new_param = rw(param, inner, n, "param", binding=True)
            body = n.slot("body")
            stmts = rw_stmts(body.slot("body"), inner, body, "body")
            return node("CatchClause", param=new_param,
                        body=AstNode(body.kind, (finalize_body(stmts, inner),)))
        if k in ("ForStatement", "ForInStatement", "ForOfStatement"):
            inner = Scope("block", parent=scope, body_owner=False)
            scope.children.append(inner)
            head = n.slot("init") if k == "ForStatement" else n.slot("left")
            if head is not ABSENT and isinstance(head, AstNode):
                _collect_head_lexical(head, inner)
            new_slots = []
            for (sname, ar), v in zip(n.kind.slots, n.slots):
                if isinstance(v, AstNode):
                    new_slots.append(rw(v, inner, n, sname))
                elif isinstance(v, tuple):
                    new_slots.append(tuple(rw(i, inner, n, sname) for i in v))
                else:
                    new_slots.append(v)
            return AstNode(n.kind, tuple(new_slots))
        if k == "SwitchStatement":
            inner = Scope("block", parent=scope, body_owner=False)
            scope.children.append(inner)
            for case in n.slot("cases"):
                _collect_lexical(case.slot("consequent"), inner)
            disc = rw(n.slot("discriminant"), scope, n, "discriminant")
            cases = tuple(rw(c, inner, n, "cases") for c in n.slot("cases"))
            return node("SwitchStatement", discriminant=disc, cases=cases)
        if k == "VariableDeclarator":
            new_id = rw(n.slot("id"), scope, n, "id", binding=True)
            init = n.slot("init")
            new_init = ABSENT if init is ABSENT else rw(init, scope, n, "init")
            if new_id.kind.name == "Identifier" and new_init is not ABSENT:
                update_type(scope, new_id.slot("name"), infer_static_type(new_init))
            return node("VariableDeclarator", id=new_id, init=new_init)
        if k == "AssignmentExpression":
            new_left = rw(n.slot("left"), scope, n, "left")
            new_right = rw(n.slot("right"), scope, n, "right")
            if n.slot("operator") == "=" and new_left.kind.name == "Identifier":
                update_type(scope, new_left.slot("name"), infer_static_type(new_right))
            return node("AssignmentExpression", operator=n.slot("operator"),
                        left=new_left, right=new_right)
        if k == "AssignmentPattern" and binding:
            return node("AssignmentPattern",
                        left=rw(n.slot("left"), scope, n, "left", binding=True),
                        right=rw(n.slot("right"), scope, n, "right"))
        if k == "Property" and binding:
            new_value = rw(n.slot("value"), scope, n, "value", binding=True)
            new_key = n.slot("key")
            if n.slot("computed"):
                new_key = rw(new_key, scope, n, "key")
            return n.with_slot("key", new_key).with_slot("value", new_value)
        new_slots = []
        for (sname, ar), v in zip(n.kind.slots, n.slots):
            if isinstance(v, AstNode):
                new_slots.append(rw(v, scope, n, sname, binding=binding))
            elif isinstance(v, tuple):
                new_slots.append(tuple(rw(i, scope, n, sname, binding=binding)
                                       for i in v))
            else:
                new_slots.append(v)
        return AstNode(n.kind, tuple(new_slots))

    root = Scope("program", parent=_builtin_scope(builtins), body_owner=True)
    if ast.kind.name != "Program":
        raise ValueError("resolve_references expects a Program root")
    for s in ast.slot("body"):
        _hoist_vars(s, root)
    _collect_lexical(ast.slot("body"), root)
    stmts = rw_stmts(ast.slot("body"), root, ast, "body")
    return AstNode(ast.kind, (finalize_body(stmts, root),)), report
