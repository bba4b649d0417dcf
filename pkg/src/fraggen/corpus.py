"""Deterministic synthetic program corpus.

Builds small, runnable programs in the supported ECMAScript subset. These
stand in for engine regression suites at desk scale: fixture corpora for
round-trip and ingestion tests, a duplicated-family toy corpus for model
overfitting checks, and seed pools for generation campaigns.

Programs are built so that a stock engine executes them with exit code 0:
loops are bounded, throws are caught, and every referenced name is declared.
"""

from __future__ import annotations

import random
from pathlib import Path

from .estree import ABSENT, AstNode, RegexValue, encode_ast, node


def ident(name: str) -> AstNode:
    return node("Identifier", name=name)


def lit(value, raw=None) -> AstNode:
    if raw is None:
        if isinstance(value, bool):
            raw = "true" if value else "false"
        elif value is None:
            raw = "null"
        elif isinstance(value, str):
            raw = '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        else:
            raw = repr(value) if isinstance(value, float) else str(value)
    return node("Literal", value=value, raw=raw, regex=ABSENT)


def regex_lit(pattern: str, flags: str = "") -> AstNode:
    return node("Literal", value=ABSENT, raw=f"/{pattern}/{flags}",
                regex=RegexValue(pattern, flags))


def var_decl(name: str, init: AstNode | None = None, kw: str = "var") -> AstNode:
    d = node("VariableDeclarator", id=ident(name),
             init=init if init is not None else ABSENT)
    return node("VariableDeclaration", kind=kw, declarations=(d,))


def expr_stmt(e: AstNode) -> AstNode:
    return node("ExpressionStatement", expression=e)


def assign(target: AstNode, value: AstNode, op: str = "=") -> AstNode:
    return expr_stmt(node("AssignmentExpression", operator=op, left=target, right=value))


def binop(op: str, left: AstNode, right: AstNode) -> AstNode:
    return node("BinaryExpression", operator=op, left=left, right=right)


def call(callee: AstNode, *args: AstNode) -> AstNode:
    return node("CallExpression", callee=callee, arguments=tuple(args))


def member(obj: AstNode, prop: str) -> AstNode:
    return node("MemberExpression", object=obj, property=ident(prop), computed=False)


def index(obj: AstNode, key: AstNode) -> AstNode:
    return node("MemberExpression", object=obj, property=key, computed=True)


def block(*stmts: AstNode) -> AstNode:
    return node("BlockStatement", body=tuple(stmts))


def program(*stmts: AstNode) -> AstNode:
    return node("Program", body=tuple(stmts))


def count_for(counter: str, bound: int, *body: AstNode) -> AstNode:
    return node(
        "ForStatement",
        init=var_decl(counter, lit(0)),
        test=binop("<", ident(counter), lit(bound)),
        update=node("UpdateExpression", operator="++", prefix=False,
                    argument=ident(counter)),
        body=block(*body),
    )


class _NamePool:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def fresh(self, hint: str = "a") -> str:
        self.counter += 1
        return f"{hint}{self.counter}"


class _Env:
    """Declared names grouped by rough runtime type."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.by_type: dict[str, list[str]] = {}

    def add(self, name: str, jstype: str) -> None:
        self.by_type.setdefault(jstype, []).append(name)

    def pick(self, jstype: str) -> str:
        return self.rng.choice(self.by_type[jstype])

    def has(self, jstype: str) -> bool:
        return bool(self.by_type.get(jstype))


def _mk_decl_number(rng, names, env):
    name = names.fresh("n")
    env.add(name, "number")
    return [var_decl(name, lit(rng.randrange(100)))]


def _mk_decl_string(rng, names, env):
    name = names.fresh("s")
    env.add(name, "string")
    word = rng.choice(["alpha", "beta", "gamma", "delta", "text", "key"])
    return [var_decl(name, lit(word))]


def _mk_decl_array(rng, names, env):
    name = names.fresh("arr")
    env.add(name, "array")
    elems = tuple(lit(rng.randrange(10)) for _ in range(rng.randrange(2, 5)))
    return [var_decl(name, node("ArrayExpression", elements=elems))]


def _mk_decl_object(rng, names, env):
    name = names.fresh("o")
    env.add(name, "object")
    props = (
        node("Property", key=ident("x"), value=lit(rng.randrange(10)),
             kind="init", computed=False, shorthand=False, method=False),
        node("Property", key=lit("y"), value=lit(rng.choice(["u", "v"])),
             kind="init", computed=False, shorthand=False, method=False),
    )
    return [var_decl(name, node("ObjectExpression", properties=props))]


def _mk_func(rng, names, env):
    fname = names.fresh("fn")
    p = names.fresh("p")
    body = block(
        var_decl("t", binop("+", ident(p), lit(rng.randrange(5)))),
        node("ReturnStatement", argument=binop("*", ident("t"), lit(2))),
    )
    env.add(fname, "function")
    out = [node("FunctionDeclaration", id=ident(fname), params=(ident(p),),
                body=body, generator=False, **{"async": False})]
    if env.has("number"):
        arg = env.pick("number")
        r = names.fresh("r")
        out.append(var_decl(r, call(ident(fname), ident(arg))))
        env.add(r, "number")
    return out


def _mk_arrow(rng, names, env):
    gname = names.fresh("g")
    p = names.fresh("q")
    arrow = node("ArrowFunctionExpression", params=(ident(p),),
                 body=binop("+", ident(p), lit(rng.randrange(9))),
                 **{"async": False})
    env.add(gname, "function")
    out = [var_decl(gname, arrow)]
    if env.has("number"):
        out.append(expr_stmt(call(ident(gname), ident(env.pick("number")))))
    return out


def _mk_for_fill(rng, names, env):
    if not (env.has("array") or env.has("object")):
        return []
    target = env.pick("array") if env.has("array") else env.pick("object")
    i = names.fresh("i")
    return [count_for(i, rng.randrange(3, 7),
                      assign(index(ident(target), ident(i)),
                             binop("+", ident(i), lit(rng.randrange(9)))))]


def _mk_while(rng, names, env):
    n = names.fresh("w")
    env.add(n, "number")
    return [
        var_decl(n, lit(rng.randrange(3, 8))),
        node("WhileStatement",
             test=binop(">", ident(n), lit(0)),
             body=block(expr_stmt(node("UpdateExpression", operator="--",
                                       prefix=False, argument=ident(n))))),
    ]


def _mk_dowhile(rng, names, env):
    n = names.fresh("d")
    env.add(n, "number")
    return [
        var_decl(n, lit(rng.randrange(2, 5))),
        node("DoWhileStatement",
             body=block(assign(ident(n), binop("-", ident(n), lit(1)))),
             test=binop(">", ident(n), lit(0))),
    ]


def _mk_if(rng, names, env):
    if not env.has("number"):
        return []
    a = env.pick("number")
    out = names.fresh("c")
    env.add(out, "number")
    return [
        var_decl(out, lit(0)),
        node("IfStatement",
             test=binop(rng.choice(("<", ">", "===")), ident(a), lit(rng.randrange(50))),
             consequent=block(assign(ident(out), lit(1))),
             alternate=block(assign(ident(out), lit(2)))),
    ]


def _mk_try(rng, names, env):
    e = names.fresh("e")
    m = names.fresh("m")
    env.add(m, "unknown")
    return [
        var_decl(m),
        node("TryStatement",
             block=block(node("ThrowStatement",
                              argument=lit(rng.choice(["oops", "bad"])))),
             handler=node("CatchClause", param=ident(e),
                          body=block(assign(ident(m), ident(e)))),
             finalizer=ABSENT),
    ]


def _mk_switch(rng, names, env):
    if not env.has("number"):
        return []
    n = env.pick("number")
    out = names.fresh("sw")
    env.add(out, "string")
    cases = (
        node("SwitchCase", test=lit(0),
             consequent=(assign(ident(out), lit("zero")), node("BreakStatement"))),
        node("SwitchCase", test=ABSENT,
             consequent=(assign(ident(out), lit("many")),)),
    )
    return [var_decl(out, lit("")),
            node("SwitchStatement", discriminant=binop("%", ident(n), lit(2)),
                 cases=cases)]


def _mk_string_ops(rng, names, env):
    if not env.has("string"):
        return []
    s = env.pick("string")
    L = names.fresh("len")
    env.add(L, "number")
    return [
        var_decl(L, binop("+", member(ident(s), "length"), lit(1))),
        expr_stmt(call(member(ident(s), "charAt"), lit(0))),
    ]


def _mk_array_ops(rng, names, env):
    if not env.has("array"):
        return []
    a = env.pick("array")
    j = names.fresh("j")
    env.add(j, "string")
    return [
        expr_stmt(call(member(ident(a), "push"), lit(rng.randrange(9)))),
        var_decl(j, call(member(ident(a), "join"), lit(","))),
    ]


def _mk_member_assign(rng, names, env):
    if not env.has("object"):
        return []
    o = env.pick("object")
    return [
        assign(member(ident(o), "k"), lit(rng.randrange(20))),
        assign(index(ident(o), lit("z")), lit(True)),
    ]


def _mk_forin(rng, names, env):
    if not env.has("object"):
        return []
    o = env.pick("object")
    k = names.fresh("k")
    acc = names.fresh("seen")
    env.add(acc, "number")
    return [var_decl(acc, lit(0)),
            node("ForInStatement", left=var_decl(k), right=ident(o),
                 body=block(assign(ident(acc), binop("+", ident(acc), lit(1)))))]


def _mk_forof(rng, names, env):
    if not env.has("array"):
        return []
    a = env.pick("array")
    x = names.fresh("x")
    total = names.fresh("sum")
    env.add(total, "number")
    return [var_decl(total, lit(0)),
            node("ForOfStatement", left=var_decl(x), right=ident(a),
                 body=block(assign(ident(total), binop("+", ident(total), ident(x)))),
                 **{"await": False})]


def _mk_updates(rng, names, env):
    if not env.has("number"):
        return []
    n = env.pick("number")
    return [
        expr_stmt(node("UpdateExpression", operator="++", prefix=True,
                       argument=ident(n))),
        assign(ident(n), lit(rng.randrange(5)), op="+="),
    ]


def _mk_logical(rng, names, env):
    if not env.has("number"):
        return []
    a = env.pick("number")
    z = names.fresh("z")
    env.add(z, "unknown")
    choice = node("ConditionalExpression",
                  test=binop(">", ident(a), lit(10)),
                  consequent=lit("big"), alternate=lit("small"))
    return [var_decl(z, node("LogicalExpression", operator="||",
                             left=node("LogicalExpression", operator="&&",
                                       left=ident(a), right=lit(True)),
                             right=lit(1))),
            var_decl(names.fresh("pick"), choice)]


def _mk_class(rng, names, env):
    cname = names.fresh("Box")
    inst = names.fresh("inst")
    ctor = node("MethodDefinition",
                key=ident("constructor"),
                value=node("FunctionExpression", id=ABSENT, params=(ident("v"),),
                           body=block(assign(member(node("ThisExpression"), "v"),
                                             ident("v"))),
                           generator=False, **{"async": False}),
                kind="constructor", computed=False, static=False)
    getter = node("MethodDefinition",
                  key=ident("get_v"),
                  value=node("FunctionExpression", id=ABSENT, params=(),
                             body=block(node("ReturnStatement",
                                             argument=member(node("ThisExpression"), "v"))),
                             generator=False, **{"async": False}),
                  kind="method", computed=False, static=False)
    env.add(inst, "object")
    return [
        node("ClassDeclaration", id=ident(cname), superClass=ABSENT,
             body=node("ClassBody", body=(ctor, getter))),
        var_decl(inst, node("NewExpression", callee=ident(cname),
                            arguments=(lit(rng.randrange(9)),))),
        expr_stmt(call(member(ident(inst), "get_v"))),
    ]


def _mk_labeled(rng, names, env):
    i = names.fresh("li")
    j = names.fresh("lj")
    label = names.fresh("outer")
    inner = count_for(
        j, 3,
        node("IfStatement",
             test=binop("===", ident(i), ident(j)),
             consequent=block(node("BreakStatement", label=ident(label))),
             alternate=ABSENT))
    return [node("LabeledStatement", label=ident(label),
                 body=count_for(i, 3, inner))]


def _mk_generator_fn(rng, names, env):
    gname = names.fresh("gen")
    it = names.fresh("it")
    body = block(
        expr_stmt(node("YieldExpression", argument=lit(1), delegate=False)),
        expr_stmt(node("YieldExpression", argument=lit(2), delegate=False)),
    )
    env.add(it, "object")
    return [
        node("FunctionDeclaration", id=ident(gname), params=(), body=body,
             generator=True, **{"async": False}),
        var_decl(it, call(ident(gname))),
        expr_stmt(call(member(ident(it), "next"))),
    ]


def _mk_builtin_calls(rng, names, env):
    if not env.has("number"):
        return []
    n = env.pick("number")
    f = names.fresh("fl")
    env.add(f, "number")
    out = [var_decl(f, call(member(ident("Math"), "floor"),
                            binop("/", ident(n), lit(2))))]
    if env.has("object"):
        out.append(expr_stmt(call(member(ident("JSON"), "stringify"),
                                  ident(env.pick("object")))))
    return out


def _mk_template(rng, names, env):
    if not env.has("number"):
        return []
    n = env.pick("number")
    t = names.fresh("tpl")
    env.add(t, "string")
    quasis = (node("TemplateElement", raw="v=", cooked="v=", tail=False),
              node("TemplateElement", raw="!", cooked="!", tail=True))
    return [var_decl(t, node("TemplateLiteral", quasis=quasis,
                             expressions=(ident(n),)))]


def _mk_typeof(rng, names, env):
    if not env.has("string"):
        return []
    s = env.pick("string")
    hit = names.fresh("isstr")
    env.add(hit, "boolean")
    return [var_decl(hit, binop("===",
                                node("UnaryExpression", operator="typeof",
                                     argument=ident(s)),
                                lit("string")))]


def _mk_unary(rng, names, env):
    if not env.has("number"):
        return []
    n = env.pick("number")
    neg = names.fresh("neg")
    env.add(neg, "number")
    return [var_decl(neg, node("UnaryExpression", operator="-", argument=ident(n))),
            var_decl(names.fresh("flag"),
                     node("UnaryExpression", operator="!", argument=ident(n)))]


def _mk_spread(rng, names, env):
    if not env.has("array"):
        return []
    a = env.pick("array")
    m = names.fresh("mx")
    env.add(m, "number")
    return [var_decl(m, call(member(ident("Math"), "max"), lit(0),
                             node("SpreadElement", argument=ident(a))))]


def _mk_destructure(rng, names, env):
    if not env.has("array"):
        return []
    a = env.pick("array")
    p, q = names.fresh("h"), names.fresh("rest")
    env.add(p, "unknown")
    pat = node("ArrayPattern", elements=(ident(p),
                                         node("RestElement", argument=ident(q))))
    d = node("VariableDeclarator", id=pat, init=ident(a))
    env.add(q, "array")
    return [node("VariableDeclaration", kind="var", declarations=(d,))]


def _mk_sequence(rng, names, env):
    if not env.has("number"):
        return []
    n = env.pick("number")
    q = names.fresh("seq")
    env.add(q, "number")
    seq = node("SequenceExpression",
               expressions=(node("UpdateExpression", operator="++", prefix=False,
                                 argument=ident(n)),
                            binop("+", ident(n), lit(1))))
    return [var_decl(q, seq)]


def _mk_regex(rng, names, env):
    if not env.has("string"):
        return []
    s = env.pick("string")
    r = names.fresh("re")
    env.add(r, "regex")
    return [var_decl(r, regex_lit("[a-z]+", "g")),
            expr_stmt(call(member(ident(r), "test"), ident(s)))]


_MAKERS = (
    _mk_decl_number, _mk_decl_string, _mk_decl_array, _mk_decl_object,
    _mk_func, _mk_arrow, _mk_for_fill, _mk_while, _mk_dowhile, _mk_if,
    _mk_try, _mk_switch, _mk_string_ops, _mk_array_ops, _mk_member_assign,
    _mk_forin, _mk_forof, _mk_updates, _mk_logical, _mk_class, _mk_labeled,
    _mk_generator_fn, _mk_builtin_calls, _mk_template, _mk_typeof, _mk_unary,
    _mk_spread, _mk_destructure, _mk_sequence, _mk_regex,
)


def random_program(seed: int) -> AstNode:
    """Build one runnable program; identical seed gives an identical tree."""
    rng = random.Random(seed)
    names = _NamePool(rng)
    env = _Env(rng)
    stmts: list[AstNode] = []
    stmts += _mk_decl_number(rng, names, env)
    stmts += rng.choice((_mk_decl_string, _mk_decl_array, _mk_decl_object))(rng, names, env)
    for _ in range(rng.randrange(3, 8)):
        stmts += rng.choice(_MAKERS)(rng, names, env)
    return program(*stmts)


def fixture_corpus(count: int, seed: int = 0) -> list[tuple[str, AstNode]]:
    """Named fixture programs; deterministic for a given (count, seed)."""
    return [(f"fixture_{seed}_{i:05d}.js", random_program(seed * 1_000_003 + i))
            for i in range(count)]


# --- toy overfit corpus ---------------------------------------------------

def _family(tag_value: int, variant: str) -> AstNode:
    """One toy family; families share top-level shape but diverge at the
    first literal so a sequence model can separate them early."""
    stmts = [
        var_decl("seed", lit(tag_value)),
        var_decl("acc", lit(0)),
    ]
    if variant == "loop":
        stmts += [
            count_for("i", 4, assign(ident("acc"),
                                     binop("+", ident("acc"), ident("i")))),
            node("IfStatement",
                 test=binop(">", ident("acc"), lit(3)),
                 consequent=block(assign(ident("acc"), lit(1))),
                 alternate=block(assign(ident("acc"), lit(2)))),
            expr_stmt(call(member(ident("Math"), "floor"), ident("acc"))),
        ]
    elif variant == "func":
        stmts += [
            node("FunctionDeclaration", id=ident("step"), params=(ident("p"),),
                 body=block(node("ReturnStatement",
                                 argument=binop("*", ident("p"), lit(3)))),
                 generator=False, **{"async": False}),
            var_decl("out", call(ident("step"), ident("seed"))),
            assign(ident("acc"), binop("+", ident("out"), lit(1))),
            expr_stmt(call(ident("step"), ident("acc"))),
        ]
    elif variant == "object":
        stmts += [
            var_decl("box", node("ObjectExpression", properties=(
                node("Property", key=ident("v"), value=ident("seed"),
                     kind="init", computed=False, shorthand=False, method=False),
            ))),
            assign(member(ident("box"), "w"), binop("+", ident("seed"), lit(2))),
            node("ForInStatement", left=var_decl("k"), right=ident("box"),
                 body=block(assign(ident("acc"),
                                   binop("+", ident("acc"), lit(1))))),
            expr_stmt(call(member(ident("JSON"), "stringify"), ident("box"))),
        ]
    else:
        stmts += [
            var_decl("word", lit("text")),
            var_decl("n", member(ident("word"), "length")),
            node("WhileStatement",
                 test=binop(">", ident("n"), lit(0)),
                 body=block(expr_stmt(node("UpdateExpression", operator="--",
                                           prefix=False, argument=ident("n"))),
                            assign(ident("acc"),
                                   binop("+", ident("acc"), lit(1))))),
            expr_stmt(call(member(ident("word"), "charAt"), lit(0))),
        ]
    return program(*stmts)


def toy_corpus() -> list[tuple[str, AstNode]]:
    """20 files: 4 structural families, 5 verbatim copies each.

    Copies push every fragment to frequency >= 5, so the default vocabulary
    threshold keeps the corpus fully in-vocabulary.
    """
    families = [
        _family(111, "loop"),
        _family(222, "func"),
        _family(333, "object"),
        _family(444, "string"),
    ]
    out = []
    for f, ast in enumerate(families):
        for c in range(5):
            out.append((f"toy_f{f}_c{c}.js", ast))
    return out


def kitchen_sink_programs() -> list[tuple[str, AstNode]]:
    """Handcrafted programs covering registry kinds the random makers skip."""
    meta = program(
        node("FunctionDeclaration", id=ident("probe"), params=(),
             body=block(
                 node("IfStatement",
                      test=binop("===", node("MetaProperty", meta=ident("new"),
                                             property=ident("target")),
                                 node("Identifier", name="undefined")),
                      consequent=block(node("ReturnStatement", argument=lit(1))),
                      alternate=ABSENT),
                 node("ReturnStatement", argument=lit(2))),
             generator=False, **{"async": False}),
        expr_stmt(call(ident("probe"))),
        expr_stmt(node("NewExpression", callee=ident("probe"), arguments=())),
    )
    supers = program(
        node("ClassDeclaration", id=ident("Base"), superClass=ABSENT,
             body=node("ClassBody", body=(
                 node("MethodDefinition", key=ident("constructor"),
                      value=node("FunctionExpression", id=ABSENT, params=(ident("v"),),
                                 body=block(assign(member(node("ThisExpression"), "v"),
                                                   ident("v"))),
                                 generator=False, **{"async": False}),
                      kind="constructor", computed=False, static=False),
                 node("MethodDefinition", key=ident("peek"),
                      value=node("FunctionExpression", id=ABSENT, params=(),
                                 body=block(node("ReturnStatement",
                                                 argument=member(node("ThisExpression"), "v"))),
                                 generator=False, **{"async": False}),
                      kind="method", computed=False, static=False),
             ))),
        node("ClassDeclaration", id=ident("Derived"), superClass=ident("Base"),
             body=node("ClassBody", body=(
                 node("MethodDefinition", key=ident("constructor"),
                      value=node("FunctionExpression", id=ABSENT, params=(),
                                 body=block(expr_stmt(call(node("Super"), lit(7)))),
                                 generator=False, **{"async": False}),
                      kind="constructor", computed=False, static=False),
                 node("MethodDefinition", key=ident("peek"),
                      value=node("FunctionExpression", id=ABSENT, params=(),
                                 body=block(node("ReturnStatement",
                                                 argument=call(member(node("Super"), "peek")))),
                                 generator=False, **{"async": False}),
                      kind="method", computed=False, static=False),
             ))),
        var_decl("d", node("NewExpression", callee=ident("Derived"), arguments=())),
        expr_stmt(call(member(ident("d"), "peek"))),
    )
    misc = program(
        node("EmptyStatement"),
        node("DebuggerStatement"),
        var_decl("obj", node("ObjectExpression", properties=(
            node("Property", key=ident("plain"), value=lit(1),
                 kind="init", computed=False, shorthand=False, method=False),
            node("Property", key=ident("val"),
                 value=node("FunctionExpression", id=ABSENT, params=(),
                            body=block(node("ReturnStatement", argument=lit(3))),
                            generator=False, **{"async": False}),
                 kind="get", computed=False, shorthand=False, method=False),
            node("Property", key=lit("m"),
                 value=node("FunctionExpression", id=ABSENT, params=(ident("a"),),
                            body=block(node("ReturnStatement", argument=ident("a"))),
                            generator=False, **{"async": False}),
                 kind="init", computed=False, shorthand=False, method=True),
        ))),
        expr_stmt(member(ident("obj"), "val")),
        node("FunctionDeclaration", id=ident("tagf"), params=(ident("parts"),),
             body=block(node("ReturnStatement",
                             argument=index(ident("parts"), lit(0)))),
             generator=False, **{"async": False}),
        expr_stmt(node("TaggedTemplateExpression", tag=ident("tagf"),
                       quasi=node("TemplateLiteral",
                                  quasis=(node("TemplateElement", raw="one",
                                               cooked="one", tail=True),),
                                  expressions=()))),
        node("FunctionDeclaration", id=ident("pair"),
             params=(node("ObjectPattern", properties=(
                 node("Property", key=ident("x"),
                      value=node("AssignmentPattern", left=ident("x"), right=lit(0)),
                      kind="init", computed=False, shorthand=True, method=False),
             )),),
             body=block(node("ReturnStatement", argument=ident("x"))),
             generator=False, **{"async": False}),
        expr_stmt(call(ident("pair"), node("ObjectExpression", properties=()))),
        node("FunctionDeclaration", id=ident("gen2"), params=(),
             body=block(
                 expr_stmt(node("YieldExpression", argument=node(
                     "ArrayExpression", elements=(lit(1), lit(2))), delegate=True)),
                 expr_stmt(node("YieldExpression", argument=ABSENT, delegate=False))),
             generator=True, **{"async": False}),
        node("LabeledStatement", label=ident("again"),
             body=count_for("z", 2,
                            node("IfStatement", test=binop("<", ident("z"), lit(1)),
                                 consequent=block(node("ContinueStatement",
                                                       label=ident("again"))),
                                 alternate=ABSENT))),
    )
    asyncs = program(
        node("FunctionDeclaration", id=ident("later"), params=(),
             body=block(node("ReturnStatement",
                             argument=node("AwaitExpression", argument=lit(5)))),
             generator=False, **{"async": True}),
        expr_stmt(call(ident("later"))),
        node("TryStatement",
             block=block(node("ThrowStatement", argument=regex_lit("x", "i"))),
             handler=node("CatchClause", param=ABSENT,
                          body=block(node("EmptyStatement"))),
             finalizer=block(node("EmptyStatement"))),
    )
    return [("sink_meta.js", meta), ("sink_super.js", supers),
            ("sink_misc.js", misc), ("sink_async.js", asyncs)]


def fig1_program() -> AstNode:
    """The normalized two-variable loop example used across the test suite."""
    return program(
        var_decl("v0", node("ObjectExpression", properties=())),
        node("ForStatement",
             init=var_decl("v1", lit(0)),
             test=binop("<", ident("v1"), lit(5)),
             update=node("UpdateExpression", operator="++", prefix=False,
                         argument=ident("v1")),
             body=block(assign(index(ident("v0"), ident("v1")),
                               binop("+", ident("v1"), lit(5))))),
    )


def fig1_source_names() -> AstNode:
    """Same tree as fig1_program but with pre-normalization identifiers."""
    return program(
        var_decl("obj", node("ObjectExpression", properties=())),
        node("ForStatement",
             init=var_decl("count", lit(0)),
             test=binop("<", ident("count"), lit(5)),
             update=node("UpdateExpression", operator="++", prefix=False,
                         argument=ident("count")),
             body=block(assign(index(ident("obj"), ident("count")),
                               binop("+", ident("count"), lit(5))))),
    )


def write_fixtures(directory: str | Path, programs: list[tuple[str, AstNode]]) -> int:
    """Write one ESTree .json per program; returns the file count."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, ast in programs:
        out = directory / (name[:-3] + ".json" if name.endswith(".js") else name + ".json")
        out.write_text(encode_ast(ast), encoding="utf-8")
    return len(programs)
