"""AST data model for the supported ECMAScript subset.

Holds the node-kind registry with fixed slot schemas, the immutable AstNode
tree, ESTree-JSON decode/encode, and deterministic pre-order traversal.
Location, range, and comment attachments are dropped at ingestion; the rest
of the pipeline is purely structural.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator


class UnsupportedKind(Exception):
    """The input used a node kind outside the registry."""


class MalformedAst(Exception):
    """The input violated a kind's slot schema; the message carries a path."""


class IncompleteAst(Exception):
    """The operation requires a stub-free tree."""


class Arity(Enum):
    ONE = "one-node"
    OPT = "optional-node"
    LIST = "node-list"
    VALUE = "value"


class _Absent:
    """Singleton marking an unoccupied slot."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABSENT"


ABSENT = _Absent()


@dataclass(frozen=True)
class NodeKind:
    name: str
    slots: tuple[tuple[str, Arity], ...]

    def slot_index(self, name: str) -> int:
        for i, (sname, _) in enumerate(self.slots):
            if sname == name:
                return i
        raise KeyError(name)

    def __repr__(self):
        return f"NodeKind({self.name})"


@dataclass(frozen=True)
class RegexValue:
    pattern: str
    flags: str


@dataclass(frozen=True)
class Stub:
    """Kind-only placeholder awaiting expansion by a matching fragment."""

    kind: NodeKind


_ONE = Arity.ONE
_OPT = Arity.OPT
_LIST = Arity.LIST
_VALUE = Arity.VALUE

# Slot order is total and fixed: it defines pre-order traversal and fragment
# identity. Names mirror the ESTree field names.
_SCHEMAS: tuple[tuple[str, tuple[tuple[str, Arity], ...]], ...] = (
    ("Program", (("body", _LIST),)),
    ("EmptyStatement", ()),
    ("ExpressionStatement", (("expression", _ONE),)),
    ("BlockStatement", (("body", _LIST),)),
    ("VariableDeclaration", (("kind", _VALUE), ("declarations", _LIST))),
    ("VariableDeclarator", (("id", _ONE), ("init", _OPT))),
    ("FunctionDeclaration", (("id", _ONE), ("params", _LIST), ("body", _ONE),
                             ("generator", _VALUE), ("async", _VALUE))),
    ("FunctionExpression", (("id", _OPT), ("params", _LIST), ("body", _ONE),
                            ("generator", _VALUE), ("async", _VALUE))),
    ("ArrowFunctionExpression", (("params", _LIST), ("body", _ONE), ("async", _VALUE))),
    ("ClassDeclaration", (("id", _ONE), ("superClass", _OPT), ("body", _ONE))),
    ("ClassExpression", (("id", _OPT), ("superClass", _OPT), ("body", _ONE))),
    ("ClassBody", (("body", _LIST),)),
    ("MethodDefinition", (("key", _ONE), ("value", _ONE), ("kind", _VALUE),
                          ("computed", _VALUE), ("static", _VALUE))),
    ("ReturnStatement", (("argument", _OPT),)),
    ("IfStatement", (("test", _ONE), ("consequent", _ONE), ("alternate", _OPT))),
    ("ForStatement", (("init", _OPT), ("test", _OPT), ("update", _OPT), ("body", _ONE))),
    ("ForInStatement", (("left", _ONE), ("right", _ONE), ("body", _ONE))),
    ("ForOfStatement", (("left", _ONE), ("right", _ONE), ("body", _ONE), ("await", _VALUE))),
    ("WhileStatement", (("test", _ONE), ("body", _ONE))),
    ("DoWhileStatement", (("body", _ONE), ("test", _ONE))),
    ("SwitchStatement", (("discriminant", _ONE), ("cases", _LIST))),
    ("SwitchCase", (("test", _OPT), ("consequent", _LIST))),
    ("BreakStatement", (("label", _OPT),)),
    ("ContinueStatement", (("label", _OPT),)),
    ("LabeledStatement", (("label", _ONE), ("body", _ONE))),
    ("TryStatement", (("block", _ONE), ("handler", _OPT), ("finalizer", _OPT))),
    ("CatchClause", (("param", _OPT), ("body", _ONE))),
    ("ThrowStatement", (("argument", _ONE),)),
    ("Identifier", (("name", _VALUE),)),
    ("Literal", (("value", _VALUE), ("raw", _VALUE), ("regex", _VALUE))),
    ("ArrayExpression", (("elements", _LIST),)),
    ("ObjectExpression", (("properties", _LIST),)),
    ("Property", (("key", _ONE), ("value", _ONE), ("kind", _VALUE),
                  ("computed", _VALUE), ("shorthand", _VALUE), ("method", _VALUE))),
    ("MemberExpression", (("object", _ONE), ("property", _ONE), ("computed", _VALUE))),
    ("CallExpression", (("callee", _ONE), ("arguments", _LIST))),
    ("NewExpression", (("callee", _ONE), ("arguments", _LIST))),
    ("AssignmentExpression", (("operator", _VALUE), ("left", _ONE), ("right", _ONE))),
    ("BinaryExpression", (("operator", _VALUE), ("left", _ONE), ("right", _ONE))),
    ("LogicalExpression", (("operator", _VALUE), ("left", _ONE), ("right", _ONE))),
    ("UnaryExpression", (("operator", _VALUE), ("argument", _ONE))),
    ("UpdateExpression", (("operator", _VALUE), ("prefix", _VALUE), ("argument", _ONE))),
    ("ConditionalExpression", (("test", _ONE), ("consequent", _ONE), ("alternate", _ONE))),
    ("SequenceExpression", (("expressions", _LIST),)),
    ("SpreadElement", (("argument", _ONE),)),
    ("TemplateLiteral", (("quasis", _LIST), ("expressions", _LIST))),
    ("TemplateElement", (("raw", _VALUE), ("cooked", _VALUE), ("tail", _VALUE))),
    ("TaggedTemplateExpression", (("tag", _ONE), ("quasi", _ONE))),
    ("ObjectPattern", (("properties", _LIST),)),
    ("ArrayPattern", (("elements", _LIST),)),
    ("AssignmentPattern", (("left", _ONE), ("right", _ONE))),
    ("RestElement", (("argument", _ONE),)),
    ("Super", ()),
    ("ThisExpression", ()),
    ("YieldExpression", (("argument", _OPT), ("delegate", _VALUE))),
    ("AwaitExpression", (("argument", _ONE),)),
    ("DebuggerStatement", ()),
    ("MetaProperty", (("meta", _ONE), ("property", _ONE))),
)

REGISTRY: dict[str, NodeKind] = {name: NodeKind(name, slots) for name, slots in _SCHEMAS}

# Stable registry-order position of each kind; used to index type embeddings.
KIND_INDEX: dict[str, int] = {name: i for i, name in enumerate(REGISTRY)}

KIND_NAMES: tuple[str, ...] = tuple(REGISTRY)

# Boolean flag slots default to False when the ESTree JSON omits them.
_FLAG_SLOTS = frozenset({
    "generator", "async", "computed", "shorthand", "method", "static",
    "prefix", "delegate", "await", "tail",
})

# Value slots that stay ABSENT when missing rather than being required.
_OPTIONAL_VALUE_SLOTS = frozenset({"raw", "cooked", "regex", "value"})


def kind(name: str) -> NodeKind:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnsupportedKind(name) from None


@dataclass(frozen=True)
class AstNode:
    """Typed, ordered tree node; immutable after construction.

    Slot contents by arity: ONE holds AstNode or Stub; OPT additionally
    allows ABSENT; LIST holds a tuple of AstNode/Stub; VALUE holds a scalar
    (str, int, float, bool, None, RegexValue) or ABSENT.
    """

    kind: NodeKind
    slots: tuple[Any, ...]

    def slot(self, name: str) -> Any:
        return self.slots[self.kind.slot_index(name)]

    def with_slot(self, name: str, value: Any) -> "AstNode":
        i = self.kind.slot_index(name)
        return AstNode(self.kind, self.slots[:i] + (value,) + self.slots[i + 1:])

    def __repr__(self):
        return f"<{self.kind.name}>"


_MISSING = object()


def node(kind_name: str, **fields: Any) -> AstNode:
    """Build an AstNode by slot name, defaulting unset slots sensibly."""
    k = kind(kind_name)
    slots = []
    for sname, ar in k.slots:
        v = fields.pop(sname, _MISSING)
        if v is _MISSING:
            if ar is Arity.OPT:
                v = ABSENT
            elif ar is Arity.LIST:
                v = ()
            elif ar is Arity.VALUE and sname in _FLAG_SLOTS:
                v = False
            elif ar is Arity.VALUE:
                v = ABSENT
            else:
                raise MalformedAst(f"{kind_name}: missing required slot {sname!r}")
        if ar is Arity.LIST and isinstance(v, list):
            v = tuple(v)
        slots.append(v)
    if fields:
        raise MalformedAst(f"{kind_name}: unknown slots {sorted(fields)}")
    return AstNode(k, tuple(slots))


def _is_scalar(v: Any) -> bool:
    return v is None or isinstance(v, (str, int, float, bool))


def _decode_node(obj: Any, path: str) -> AstNode:
    if not isinstance(obj, dict):
        raise MalformedAst(f"{path}: expected a node object")
    tname = obj.get("type")
    if not isinstance(tname, str):
        raise MalformedAst(f"{path}: missing node type")
    if tname not in REGISTRY:
        raise UnsupportedKind(tname)
    k = REGISTRY[tname]

    if tname == "Literal":
        return _decode_literal(obj, path)
    if tname == "TemplateElement":
        return _decode_template_element(obj, path)

    slots = []
    for sname, ar in k.slots:
        v = obj.get(sname)
        spath = f"{path}.{sname}"
        if ar is Arity.ONE:
            slots.append(_decode_node(v, spath))
        elif ar is Arity.OPT:
            slots.append(ABSENT if v is None else _decode_node(v, spath))
        elif ar is Arity.LIST:
            if not isinstance(v, list):
                raise MalformedAst(f"{spath}: expected a list")
            items = []
            for i, item in enumerate(v):
                if item is None:
                    raise MalformedAst(f"{spath}[{i}]: holes are unsupported")
                items.append(_decode_node(item, f"{spath}[{i}]"))
            slots.append(tuple(items))
        else:
            if v is None and sname not in obj:
                if sname in _FLAG_SLOTS:
                    v = False
                elif sname in _OPTIONAL_VALUE_SLOTS:
                    v = ABSENT
                else:
                    raise MalformedAst(f"{spath}: missing value")
            if v is not ABSENT and not _is_scalar(v):
                raise MalformedAst(f"{spath}: expected a scalar value")
            slots.append(v)
    return AstNode(k, tuple(slots))


def _decode_literal(obj: dict, path: str) -> AstNode:
    raw = obj.get("raw", ABSENT)
    if raw is None:
        raw = ABSENT
    if raw is not ABSENT and not isinstance(raw, str):
        raise MalformedAst(f"{path}.raw: expected a string")
    rx = obj.get("regex")
    if rx is not None:
        if not isinstance(rx, dict) or not isinstance(rx.get("pattern"), str):
            raise MalformedAst(f"{path}.regex: expected pattern/flags")
        regex = RegexValue(rx["pattern"], rx.get("flags") or "")
        return node("Literal", value=ABSENT, raw=raw, regex=regex)
    if "value" not in obj:
        raise MalformedAst(f"{path}.value: missing value")
    v = obj["value"]
    if not _is_scalar(v):
        raise MalformedAst(f"{path}.value: expected a scalar value")
    return node("Literal", value=v, raw=raw, regex=ABSENT)


def _decode_template_element(obj: dict, path: str) -> AstNode:
    v = obj.get("value")
    if not isinstance(v, dict) or not isinstance(v.get("raw"), str):
        raise MalformedAst(f"{path}.value: expected raw/cooked")
    cooked = v.get("cooked")
    if cooked is not None and not isinstance(cooked, str):
        raise MalformedAst(f"{path}.value.cooked: expected a string")
    return node("TemplateElement", raw=v["raw"],
                cooked=ABSENT if cooked is None else cooked,
                tail=bool(obj.get("tail", False)))


def decode_json(obj: Any) -> AstNode:
    """Decode an already-parsed ESTree JSON object."""
    return _decode_node(obj, "$")


def decode_ast(text: str) -> AstNode:
    """Decode ESTree-format JSON text into a validated AstNode tree."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedAst(f"$: invalid JSON ({e.msg})") from None
    return decode_json(obj)


def _encode_node(n: Any) -> Any:
    if isinstance(n, Stub):
        raise IncompleteAst(f"stub of kind {n.kind.name} present")
    out: dict[str, Any] = {"type": n.kind.name}
    kname = n.kind.name
    for (sname, ar), v in zip(n.kind.slots, n.slots):
        if ar is Arity.ONE:
            out[sname] = _encode_node(v)
        elif ar is Arity.OPT:
            out[sname] = None if v is ABSENT else _encode_node(v)
        elif ar is Arity.LIST:
            out[sname] = [_encode_node(item) for item in v]
        else:
            if isinstance(v, RegexValue):
                out[sname] = {"pattern": v.pattern, "flags": v.flags}
            elif v is not ABSENT:
                out[sname] = v
    if kname == "Literal" and n.slot("regex") is not ABSENT:
        out["value"] = None
    elif kname == "TemplateElement":
        cooked = n.slot("cooked")
        out = {"type": kname,
               "value": {"raw": n.slot("raw"),
                         "cooked": None if cooked is ABSENT else cooked},
               "tail": n.slot("tail")}
    elif kname == "ArrowFunctionExpression":
        out["expression"] = n.slot("body").kind.name != "BlockStatement"
    elif kname == "UnaryExpression":
        out["prefix"] = True
    return out


def encode_json(ast: AstNode) -> dict:
    """Encode to an ESTree JSON object; raises IncompleteAst on stubs."""
    return _encode_node(ast)


def encode_ast(ast: AstNode) -> str:
    return json.dumps(encode_json(ast), separators=(",", ":"))


def iter_child_slots(n: AstNode) -> Iterator[Any]:
    """Yield node-slot contents (AstNode or Stub) in registry order."""
    for (sname, ar), v in zip(n.kind.slots, n.slots):
        if ar is Arity.ONE or ar is Arity.OPT:
            if v is not ABSENT:
                yield v
        elif ar is Arity.LIST:
            yield from v


def preorder(ast: AstNode) -> Iterator[AstNode]:
    """Deterministic pre-order over materialized nodes; stubs are skipped."""
    yield ast
    for child in iter_child_slots(ast):
        if isinstance(child, AstNode):
            yield from preorder(child)


Path = tuple[tuple[int, int | None], ...]


def first_stub_path(ast: AstNode) -> Path | None:
    """Path of the first stub in pre-order, or None."""
    for si, ((_, ar), v) in enumerate(zip(ast.kind.slots, ast.slots)):
        if ar is Arity.ONE or ar is Arity.OPT:
            if isinstance(v, Stub):
                return ((si, None),)
            if isinstance(v, AstNode):
                sub = first_stub_path(v)
                if sub is not None:
                    return ((si, None),) + sub
        elif ar is Arity.LIST:
            for li, item in enumerate(v):
                if isinstance(item, Stub):
                    return ((si, li),)
                sub = first_stub_path(item)
                if sub is not None:
                    return ((si, li),) + sub
    return None


def node_at_path(ast: AstNode, path: Path) -> Any:
    cur: Any = ast
    for si, li in path:
        cur = cur.slots[si]
        if li is not None:
            cur = cur[li]
    return cur


def replace_at_path(ast: AstNode, path: Path, value: Any) -> AstNode:
    """Rebuild the tree with `value` substituted at `path`."""
    if not path:
        return value
    (si, li), rest = path[0], path[1:]
    cur = ast.slots[si]
    if li is None:
        new = replace_at_path(cur, rest, value) if rest else value
    else:
        item = replace_at_path(cur[li], rest, value) if rest else value
        new = cur[:li] + (item,) + cur[li + 1:]
    return AstNode(ast.kind, ast.slots[:si] + (new,) + ast.slots[si + 1:])


def has_stub(ast: AstNode) -> bool:
    return first_stub_path(ast) is not None
