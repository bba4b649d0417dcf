"""Identifier normalization and constant-eval inlining.

Declared variable and function identifiers are renamed to v0, v1, ... and
f0, f1, ... in first-appearance order so structurally equal code from
different files deduplicates into the same fragments. Engine builtins,
vendor test helpers, property keys, and labels are left untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

from .estree import ABSENT, Arity, AstNode, node


@dataclass
class BuiltinRegistry:
    """Names excluded from normalization, with types for the resolver."""

    names: frozenset[str]
    test_functions: frozenset[str]
    types: dict[str, str] = field(default_factory=dict)

    def is_builtin(self, name: str) -> bool:
        return name in self.names or name in self.test_functions

    @classmethod
    def from_dict(cls, obj: dict) -> "BuiltinRegistry":
        return cls(names=frozenset(obj.get("names", ())),
                   test_functions=frozenset(obj.get("test_functions", ())),
                   types=dict(obj.get("types", {})))

    @classmethod
    def load(cls, path: str | Path) -> "BuiltinRegistry":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "BuiltinRegistry":
        data = resources.files("fraggen").joinpath("data/builtins_default.json")
        return cls.from_dict(json.loads(data.read_text(encoding="utf-8")))


@dataclass
class RenameMap:
    """Injective per-partition mapping from original to normalized names."""

    variables: dict[str, str] = field(default_factory=dict)
    functions: dict[str, str] = field(default_factory=dict)

    def lookup(self, name: str) -> str | None:
        return self.functions.get(name) or self.variables.get(name)


# Identifier slots that live outside the variable namespace.
_SKIP_IDENT = {
    ("LabeledStatement", "label"),
    ("BreakStatement", "label"),
    ("ContinueStatement", "label"),
    ("MetaProperty", "meta"),
    ("MetaProperty", "property"),
}


def _renameable(parent: AstNode | None, slot_name: str | None, n: AstNode) -> bool:
    if parent is None:
        return True
    pk = parent.kind.name
    if (pk, slot_name) in _SKIP_IDENT:
        return False
    if pk == "MemberExpression" and slot_name == "property" and not parent.slot("computed"):
        return False
    if pk in ("Property", "MethodDefinition") and slot_name == "key" and not parent.slot("computed"):
        return False
    return True


def _walk_identifiers(n: AstNode, visit, parent=None, slot_name=None):
    if n.kind.name == "Identifier":
        visit(n, parent, slot_name)
        return
    for (sname, ar), v in zip(n.kind.slots, n.slots):
        if ar is Arity.ONE or ar is Arity.OPT:
            if isinstance(v, AstNode):
                _walk_identifiers(v, visit, n, sname)
        elif ar is Arity.LIST:
            for item in v:
                if isinstance(item, AstNode):
                    _walk_identifiers(item, visit, n, sname)


def pattern_names(pat: AstNode) -> list[str]:
    """Names bound by a declaration target (identifier or pattern)."""
    k = pat.kind.name
    if k == "Identifier":
        return [pat.slot("name")]
    if k == "ObjectPattern":
        out = []
        for p in pat.slot("properties"):
            if p.kind.name == "RestElement":
                out += pattern_names(p.slot("argument"))
            else:
                out += pattern_names(p.slot("value"))
        return out
    if k == "ArrayPattern":
        out = []
        for e in pat.slot("elements"):
            out += pattern_names(e)
        return out
    if k == "AssignmentPattern":
        return pattern_names(pat.slot("left"))
    if k == "RestElement":
        return pattern_names(pat.slot("argument"))
    return []


def _collect_declared(ast: AstNode, builtins: BuiltinRegistry) -> tuple[set[str], set[str]]:
    """Names declared anywhere in the tree, split (variables, functions)."""
    variables: set[str] = set()
    functions: set[str] = set()

    def visit(n: AstNode) -> None:
        k = n.kind.name
        if k == "VariableDeclarator":
            variables.update(pattern_names(n.slot("id")))
        elif k in ("FunctionDeclaration", "FunctionExpression"):
            nid = n.slot("id")
            if nid is not ABSENT:
                functions.add(nid.slot("name"))
            for p in n.slot("params"):
                variables.update(pattern_names(p))
        elif k == "ArrowFunctionExpression":
            for p in n.slot("params"):
                variables.update(pattern_names(p))
        elif k in ("ClassDeclaration", "ClassExpression"):
            nid = n.slot("id")
            if nid is not ABSENT:
                functions.add(nid.slot("name"))
        elif k == "CatchClause":
            param = n.slot("param")
            if param is not ABSENT:
                variables.update(pattern_names(param))
        for (sname, ar), v in zip(n.kind.slots, n.slots):
            if ar is Arity.ONE or ar is Arity.OPT:
                if isinstance(v, AstNode):
                    visit(v)
            elif ar is Arity.LIST:
                for item in v:
                    if isinstance(item, AstNode):
                        visit(item)

    visit(ast)
    variables -= functions
    drop = {n for n in variables | functions if builtins.is_builtin(n)}
    return variables - drop, functions - drop


def _expand_shorthand(n: AstNode) -> AstNode:
    """Rewrite {a} to {a: a} so keys stay stable while values rename."""
    new_slots = []
    for (sname, ar), v in zip(n.kind.slots, n.slots):
        if ar is Arity.ONE or ar is Arity.OPT:
            new_slots.append(_expand_shorthand(v) if isinstance(v, AstNode) else v)
        elif ar is Arity.LIST:
            new_slots.append(tuple(_expand_shorthand(item) if isinstance(item, AstNode)
                                   else item for item in v))
        else:
            new_slots.append(v)
    out = AstNode(n.kind, tuple(new_slots))
    if out.kind.name == "Property" and out.slot("shorthand"):
        out = out.with_slot("shorthand", False)
    return out


def normalize(ast: AstNode, builtins: BuiltinRegistry) -> tuple[AstNode, RenameMap]:
    """Rename declared identifiers to canonical sequential names."""
    ast = _expand_shorthand(ast)
    variables, functions = _collect_declared(ast, builtins)
    rename = RenameMap()

    def number(n: AstNode, parent, slot_name) -> None:
        name = n.slot("name")
        if not _renameable(parent, slot_name, n):
            return
        if name in functions and name not in rename.functions:
            rename.functions[name] = f"f{len(rename.functions)}"
        elif name in variables and name not in rename.variables:
            rename.variables[name] = f"v{len(rename.variables)}"

    _walk_identifiers(ast, number)

    def rewrite(n: AstNode, parent=None, slot_name=None) -> AstNode:
        if n.kind.name == "Identifier":
            if _renameable(parent, slot_name, n):
                new = rename.lookup(n.slot("name"))
                if new is not None:
                    return n.with_slot("name", new)
            return n
        new_slots = []
        for (sname, ar), v in zip(n.kind.slots, n.slots):
            if ar is Arity.ONE or ar is Arity.OPT:
                new_slots.append(rewrite(v, n, sname) if isinstance(v, AstNode) else v)
            elif ar is Arity.LIST:
                new_slots.append(tuple(rewrite(item, n, sname) if isinstance(item, AstNode)
                                       else item for item in v))
            else:
                new_slots.append(v)
        return AstNode(n.kind, tuple(new_slots))

    return rewrite(ast), rename


def _is_constant_eval_call(n: AstNode) -> bool:
    if n.kind.name != "CallExpression":
        return False
    callee = n.slot("callee")
    if callee.kind.name != "Identifier" or callee.slot("name") != "eval":
        return False
    args = n.slot("arguments")
    return (len(args) == 1 and args[0].kind.name == "Literal"
            and isinstance(args[0].slot("value"), str))


def inline_eval(ast: AstNode, parse_source: Callable[[str], AstNode],
                max_depth: int = 3) -> AstNode:
    """Splice constant `eval` argument strings into the surrounding tree.

    A single-expression argument replaces the call expression itself; a
    multi-statement argument replaces the call's enclosing expression
    statement with a block. Non-constant or unparseable arguments are left
    untouched. Inlined code is processed recursively up to `max_depth`.
    """
    if max_depth <= 0:
        return ast

    def parsed_program(call_node: AstNode) -> AstNode | None:
        source = call_node.slot("arguments")[0].slot("value")
        try:
            prog = parse_source(source)
        except Exception:
            return None
        if prog is None or prog.kind.name != "Program":
            return None
        return inline_eval(prog, parse_source, max_depth - 1)

    def rewrite(n: AstNode) -> AstNode:
        if (n.kind.name == "ExpressionStatement"
                and _is_constant_eval_call(n.slot("expression"))):
            prog = parsed_program(n.slot("expression"))
            if prog is not None:
                body = prog.slot("body")
                if len(body) == 1 and body[0].kind.name == "ExpressionStatement":
                    return body[0]
                return node("BlockStatement", body=body)
        if _is_constant_eval_call(n):
            prog = parsed_program(n)
            if prog is not None:
                body = prog.slot("body")
                if len(body) == 1 and body[0].kind.name == "ExpressionStatement":
                    return body[0].slot("expression")
                return n  # multi-statement code cannot inline at expression position
        new_slots = []
        for (sname, ar), v in zip(n.kind.slots, n.slots):
            if ar is Arity.ONE or ar is Arity.OPT:
                new_slots.append(rewrite(v) if isinstance(v, AstNode) else v)
            elif ar is Arity.LIST:
                new_slots.append(tuple(rewrite(item) if isinstance(item, AstNode)
                                       else item for item in v))
            else:
                new_slots.append(v)
        return AstNode(n.kind, tuple(new_slots))

    return rewrite(ast)
