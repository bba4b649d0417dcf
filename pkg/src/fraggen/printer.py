"""Source-text emitter for AstNode trees.

Style is correctness over beauty: every statement is semicolon-terminated and
subexpressions are parenthesized whenever precedence is equal, so operator
shape always survives a reparse.
"""

from __future__ import annotations

from .estree import ABSENT, AstNode, IncompleteAst, RegexValue, Stub

# Binding strength per expression shape; higher binds tighter.
_BIN_PREC = {
    "|": 6, "^": 7, "&": 8,
    "==": 9, "!=": 9, "===": 9, "!==": 9,
    "<": 10, ">": 10, "<=": 10, ">=": 10, "in": 10, "instanceof": 10,
    "<<": 11, ">>": 11, ">>>": 11,
    "+": 12, "-": 12,
    "*": 13, "/": 13, "%": 13,
    "**": 14,
}

_STMT_KINDS = frozenset({
    "Program", "EmptyStatement", "ExpressionStatement", "BlockStatement",
    "VariableDeclaration", "FunctionDeclaration", "ClassDeclaration",
    "ReturnStatement", "IfStatement", "ForStatement", "ForInStatement",
    "ForOfStatement", "WhileStatement", "DoWhileStatement", "SwitchStatement",
    "BreakStatement", "ContinueStatement", "LabeledStatement", "TryStatement",
    "ThrowStatement", "DebuggerStatement",
})


def _prec(n: AstNode) -> int:
    k = n.kind.name
    if k == "SequenceExpression":
        return 1
    if k in ("AssignmentExpression", "ArrowFunctionExpression", "YieldExpression"):
        return 2
    if k == "ConditionalExpression":
        return 3
    if k == "LogicalExpression":
        return 4 if n.slot("operator") == "||" else 5
    if k == "BinaryExpression":
        return _BIN_PREC[n.slot("operator")]
    if k in ("UnaryExpression", "AwaitExpression"):
        return 15
    if k == "UpdateExpression":
        return 16
    if k in ("CallExpression", "TaggedTemplateExpression"):
        return 17
    if k in ("NewExpression", "MemberExpression"):
        return 18
    return 20


def escape_string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ch in (" ", " ") or ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    r = repr(float(v))
    return r


def _literal(n: AstNode) -> str:
    rx = n.slot("regex")
    raw = n.slot("raw")
    if isinstance(rx, RegexValue):
        if raw is not ABSENT:
            return raw
        return f"/{rx.pattern}/{rx.flags}"
    if raw is not ABSENT:
        return raw
    v = n.slot("value")
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return escape_string(v)
    return _number(v)


class _Printer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def emit(self, text: str) -> None:
        self.lines.append("  " * self.depth + text)

    # --- expressions -----------------------------------------------------

    def expr(self, n: AstNode, need: int = 1) -> str:
        if isinstance(n, Stub):
            raise IncompleteAst(f"stub of kind {n.kind.name} present")
        text = self._expr(n)
        if _prec(n) < need:
            return f"({text})"
        return text

    def _expr(self, n: AstNode) -> str:
        k = n.kind.name
        fn = getattr(self, f"_x_{k}", None)
        if fn is None:
            raise IncompleteAst(f"{k} is not an expression")
        return fn(n)

    def _x_Identifier(self, n):
        return n.slot("name")

    def _x_Literal(self, n):
        return _literal(n)

    def _x_ThisExpression(self, n):
        return "this"

    def _x_Super(self, n):
        return "super"

    def _x_MetaProperty(self, n):
        return f"{self.expr(n.slot('meta'), 20)}.{self.expr(n.slot('property'), 20)}"

    def _x_ArrayExpression(self, n):
        return "[" + ", ".join(self.expr(e, 2) for e in n.slot("elements")) + "]"

    def _x_ArrayPattern(self, n):
        return "[" + ", ".join(self.expr(e, 2) for e in n.slot("elements")) + "]"

    def _x_ObjectExpression(self, n):
        props = ", ".join(self._property(p) for p in n.slot("properties"))
        return "{ " + props + " }" if props else "{}"

    def _x_ObjectPattern(self, n):
        return self._x_ObjectExpression(n)

    def _property(self, p: AstNode) -> str:
        if p.kind.name == "SpreadElement" or p.kind.name == "RestElement":
            return self._expr(p)
        key = p.slot("key")
        key_txt = f"[{self.expr(key, 2)}]" if p.slot("computed") else self.expr(key, 20)
        value = p.slot("value")
        pk = p.slot("kind")
        if pk in ("get", "set"):
            return f"{pk} {key_txt}{self._fn_tail(value)}"
        if p.slot("method"):
            return f"{self._fn_flags(value)}{key_txt}{self._fn_tail(value)}"
        if p.slot("shorthand"):
            return self.expr(value, 2)
        return f"{key_txt}: {self.expr(value, 2)}"

    def _fn_flags(self, fn: AstNode) -> str:
        out = ""
        if fn.slot("async"):
            out += "async "
        if fn.slot("generator"):
            out += "*"
        return out

    def _fn_tail(self, fn: AstNode) -> str:
        params = ", ".join(self.expr(p, 2) for p in fn.slot("params"))
        return f"({params}) {self.block_text(fn.slot('body'))}"

    def _x_AssignmentPattern(self, n):
        return f"{self.expr(n.slot('left'), 18)} = {self.expr(n.slot('right'), 3)}"

    def _x_RestElement(self, n):
        return f"...{self.expr(n.slot('argument'), 18)}"

    def _x_SpreadElement(self, n):
        return f"...{self.expr(n.slot('argument'), 2)}"

    def _x_MemberExpression(self, n):
        obj = n.slot("object")
        obj_txt = self.expr(obj, 17)
        if obj.kind.name == "Literal" and isinstance(obj.slot("value"), (int, float)) \
                and not isinstance(obj.slot("value"), bool):
            obj_txt = f"({obj_txt})"
        if n.slot("computed"):
            return f"{obj_txt}[{self.expr(n.slot('property'), 1)}]"
        return f"{obj_txt}.{self.expr(n.slot('property'), 20)}"

    def _x_CallExpression(self, n):
        args = ", ".join(self.expr(a, 2) for a in n.slot("arguments"))
        return f"{self.expr(n.slot('callee'), 17)}({args})"

    def _x_NewExpression(self, n):
        args = ", ".join(self.expr(a, 2) for a in n.slot("arguments"))
        return f"new {self.expr(n.slot('callee'), 18)}({args})"

    def _x_TaggedTemplateExpression(self, n):
        return f"{self.expr(n.slot('tag'), 17)}{self.expr(n.slot('quasi'), 20)}"

    def _x_TemplateLiteral(self, n):
        quasis = n.slot("quasis")
        exprs = n.slot("expressions")
        out = ["`"]
        for i, q in enumerate(quasis):
            out.append(q.slot("raw"))
            if i < len(exprs):
                out.append("${" + self.expr(exprs[i], 1) + "}")
        out.append("`")
        return "".join(out)

    def _x_TemplateElement(self, n):
        return n.slot("raw")

    def _x_BinaryExpression(self, n):
        op = n.slot("operator")
        p = _BIN_PREC[op]
        text = f"{self.expr(n.slot('left'), p + 1)} {op} {self.expr(n.slot('right'), p + 1)}"
        # `in` may not appear bare inside a for-statement head; blanket parens
        # keep printing context-free.
        if op == "in":
            return f"({text})"
        return text

    def _x_LogicalExpression(self, n):
        p = _prec(n)
        op = n.slot("operator")
        return f"{self.expr(n.slot('left'), p + 1)} {op} {self.expr(n.slot('right'), p + 1)}"

    def _x_AssignmentExpression(self, n):
        return f"{self.expr(n.slot('left'), 18)} {n.slot('operator')} {self.expr(n.slot('right'), 3)}"

    def _x_ConditionalExpression(self, n):
        return (f"{self.expr(n.slot('test'), 4)} ? {self.expr(n.slot('consequent'), 2)}"
                f" : {self.expr(n.slot('alternate'), 2)}")

    def _x_UnaryExpression(self, n):
        op = n.slot("operator")
        sep = " " if op.isalpha() else ""
        return f"{op}{sep}{self.expr(n.slot('argument'), 16)}"

    def _x_UpdateExpression(self, n):
        arg = self.expr(n.slot("argument"), 17)
        op = n.slot("operator")
        return f"{op}{arg}" if n.slot("prefix") else f"{arg}{op}"

    def _x_SequenceExpression(self, n):
        return ", ".join(self.expr(e, 2) for e in n.slot("expressions"))

    def _x_YieldExpression(self, n):
        star = "*" if n.slot("delegate") else ""
        arg = n.slot("argument")
        if arg is ABSENT:
            return f"yield{star}"
        return f"yield{star} {self.expr(arg, 2)}"

    def _x_AwaitExpression(self, n):
        return f"await {self.expr(n.slot('argument'), 16)}"

    def _x_FunctionExpression(self, n):
        name = "" if n.slot("id") is ABSENT else " " + n.slot("id").slot("name")
        params = ", ".join(self.expr(p, 2) for p in n.slot("params"))
        head = "async function" if n.slot("async") else "function"
        if n.slot("generator"):
            head += "*"
        return f"{head}{name}({params}) {self.block_text(n.slot('body'))}"

    def _x_ArrowFunctionExpression(self, n):
        params = ", ".join(self.expr(p, 2) for p in n.slot("params"))
        head = "async " if n.slot("async") else ""
        body = n.slot("body")
        if body.kind.name == "BlockStatement":
            return f"{head}({params}) => {self.block_text(body)}"
        body_txt = self.expr(body, 2)
        if body_txt.startswith("{"):
            body_txt = f"({body_txt})"
        return f"{head}({params}) => {body_txt}"

    def _x_ClassExpression(self, n):
        return self._class_text(n)

    def _class_text(self, n: AstNode) -> str:
        name = "" if n.slot("id") is ABSENT else " " + n.slot("id").slot("name")
        sup = n.slot("superClass")
        ext = "" if sup is ABSENT else f" extends {self.expr(sup, 17)}"
        body = n.slot("body")
        methods = " ".join(self._method(m) for m in body.slot("body"))
        inner = f" {methods} " if methods else ""
        return f"class{name}{ext} {{{inner}}}"

    def _method(self, m: AstNode) -> str:
        fn = m.slot("value")
        key = m.slot("key")
        key_txt = f"[{self.expr(key, 2)}]" if m.slot("computed") else self.expr(key, 20)
        head = "static " if m.slot("static") else ""
        mk = m.slot("kind")
        if mk in ("get", "set"):
            return f"{head}{mk} {key_txt}{self._fn_tail(fn)}"
        return f"{head}{self._fn_flags(fn)}{key_txt}{self._fn_tail(fn)}"

    # --- statements ------------------------------------------------------

    def block_text(self, n: AstNode) -> str:
        """Render a BlockStatement inline relative to the current depth."""
        body = n.slot("body")
        if not body:
            return "{}"
        sub = _Printer()
        sub.depth = self.depth + 1
        for s in body:
            sub.stmt(s)
        inner = "\n".join(sub.lines)
        return "{\n" + inner + "\n" + "  " * self.depth + "}"

    def stmt(self, n: AstNode) -> None:
        if isinstance(n, Stub):
            raise IncompleteAst(f"stub of kind {n.kind.name} present")
        k = n.kind.name
        fn = getattr(self, f"_s_{k}", None)
        if fn is None:
            raise IncompleteAst(f"{k} is not a statement")
        fn(n)

    def _s_EmptyStatement(self, n):
        self.emit(";")

    def _s_DebuggerStatement(self, n):
        self.emit("debugger;")

    def _s_ExpressionStatement(self, n):
        text = self.expr(n.slot("expression"), 1)
        if text.startswith(("{", "function", "class", "async function")):
            text = f"({text})"
        self.emit(text + ";")

    def _s_BlockStatement(self, n):
        self.emit(self.block_text(n))

    def _var_decl_text(self, n: AstNode) -> str:
        parts = []
        for d in n.slot("declarations"):
            init = d.slot("init")
            if init is ABSENT:
                parts.append(self.expr(d.slot("id"), 18))
            else:
                parts.append(f"{self.expr(d.slot('id'), 18)} = {self.expr(init, 2)}")
        return f"{n.slot('kind')} {', '.join(parts)}"

    def _s_VariableDeclaration(self, n):
        self.emit(self._var_decl_text(n) + ";")

    def _s_FunctionDeclaration(self, n):
        params = ", ".join(self.expr(p, 2) for p in n.slot("params"))
        head = "async function" if n.slot("async") else "function"
        if n.slot("generator"):
            head += "*"
        name = n.slot("id").slot("name")
        self.emit(f"{head} {name}({params}) {self.block_text(n.slot('body'))}")

    def _s_ClassDeclaration(self, n):
        self.emit(self._class_text(n))

    def _s_ReturnStatement(self, n):
        arg = n.slot("argument")
        self.emit("return;" if arg is ABSENT else f"return {self.expr(arg, 1)};")

    def _s_ThrowStatement(self, n):
        self.emit(f"throw {self.expr(n.slot('argument'), 1)};")

    def _s_BreakStatement(self, n):
        label = n.slot("label")
        self.emit("break;" if label is ABSENT else f"break {label.slot('name')};")

    def _s_ContinueStatement(self, n):
        label = n.slot("label")
        self.emit("continue;" if label is ABSENT else f"continue {label.slot('name')};")

    def _s_LabeledStatement(self, n):
        sub = _Printer()
        sub.depth = self.depth
        sub.stmt(n.slot("body"))
        lines = sub.lines
        first = lines[0].lstrip()
        self.emit(f"{n.slot('label').slot('name')}: {first}")
        self.lines.extend(lines[1:])

    def _nested(self, n: AstNode) -> str:
        """Render a loop/if body; blocks inline, other statements on the line."""
        if n.kind.name == "BlockStatement":
            return self.block_text(n)
        sub = _Printer()
        sub.depth = self.depth
        sub.stmt(n)
        return "\n".join(sub.lines).lstrip() if len(sub.lines) == 1 else \
            "\n".join(sub.lines)[len("  " * self.depth):]

    def _s_IfStatement(self, n):
        text = f"if ({self.expr(n.slot('test'), 1)}) {self._nested(n.slot('consequent'))}"
        alt = n.slot("alternate")
        if alt is not ABSENT:
            text += f" else {self._nested(alt)}"
        self.emit(text)

    def _s_WhileStatement(self, n):
        self.emit(f"while ({self.expr(n.slot('test'), 1)}) {self._nested(n.slot('body'))}")

    def _s_DoWhileStatement(self, n):
        self.emit(f"do {self._nested(n.slot('body'))} while ({self.expr(n.slot('test'), 1)});")

    def _for_head_left(self, left: AstNode) -> str:
        if left.kind.name == "VariableDeclaration":
            return self._var_decl_text(left)
        return self.expr(left, 18)

    def _s_ForStatement(self, n):
        init = n.slot("init")
        if init is ABSENT:
            init_txt = ""
        elif init.kind.name == "VariableDeclaration":
            init_txt = self._var_decl_text(init)
        else:
            init_txt = self.expr(init, 1)
        test = n.slot("test")
        test_txt = "" if test is ABSENT else self.expr(test, 1)
        update = n.slot("update")
        update_txt = "" if update is ABSENT else self.expr(update, 1)
        self.emit(f"for ({init_txt}; {test_txt}; {update_txt}) {self._nested(n.slot('body'))}")

    def _s_ForInStatement(self, n):
        self.emit(f"for ({self._for_head_left(n.slot('left'))} in "
                  f"{self.expr(n.slot('right'), 2)}) {self._nested(n.slot('body'))}")

    def _s_ForOfStatement(self, n):
        kw = "for await" if n.slot("await") else "for"
        self.emit(f"{kw} ({self._for_head_left(n.slot('left'))} of "
                  f"{self.expr(n.slot('right'), 3)}) {self._nested(n.slot('body'))}")

    def _s_SwitchStatement(self, n):
        self.emit(f"switch ({self.expr(n.slot('discriminant'), 1)}) {{")
        self.depth += 1
        for case in n.slot("cases"):
            test = case.slot("test")
            self.emit("default:" if test is ABSENT else f"case {self.expr(test, 1)}:")
            self.depth += 1
            for s in case.slot("consequent"):
                self.stmt(s)
            self.depth -= 1
        self.depth -= 1
        self.emit("}")

    def _s_TryStatement(self, n):
        text = f"try {self.block_text(n.slot('block'))}"
        handler = n.slot("handler")
        if handler is not ABSENT:
            param = handler.slot("param")
            head = "catch" if param is ABSENT else f"catch ({self.expr(param, 2)})"
            text += f" {head} {self.block_text(handler.slot('body'))}"
        finalizer = n.slot("finalizer")
        if finalizer is not ABSENT:
            text += f" finally {self.block_text(finalizer)}"
        self.emit(text)


def print_program(ast: AstNode) -> str:
    """Emit executable source text for a stub-free Program."""
    if ast.kind.name != "Program":
        raise IncompleteAst("print_program expects a Program root")
    p = _Printer()
    for s in ast.slot("body"):
        p.stmt(s)
    return "\n".join(p.lines) + ("\n" if p.lines else "")
