"""Lexer and recursive-descent parser for `.mj` source.

One token of lookahead suffices. The parser enforces the structural rules the
loop rewriter depends on:

  * `return` is only legal as the last statement of its enclosing block and
    never inside a loop body (so a loop can never exit early);
  * duplicate method names and duplicate parameter names are rejected;
  * a method call appears only as a statement (optionally declaring or
    assigning its target) or as the operand of `return`.

Any input yields either a Program or a ParseError; nothing else escapes.
"""

from __future__ import annotations

from .ast import (
    ArrayLit,
    Assign,
    AssignIndex,
    BOOL,
    Binary,
    Block,
    BoolLit,
    Builtin,
    Call,
    CallAssign,
    Cast,
    DOUBLE,
    DoWhile,
    DoubleLit,
    Expr,
    For,
    Foreach,
    INT,
    If,
    Index,
    IntLit,
    Length,
    ListLit,
    Loc,
    MethodDef,
    OBJECT,
    OBJECT_ARRAY,
    Param,
    Print,
    Program,
    Return,
    Stmt,
    Type,
    Unary,
    VOID,
    Var,
    VarDecl,
    While,
    array_of,
    assign_loop_ids,
    iterator_of,
    list_of,
)

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1


class ParseError(Exception):
    def __init__(self, line: int, col: int, expected: str, found: str):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        super().__init__(f"{line}:{col}: expected {expected}, found {found}")


KEYWORDS = {
    "void", "int", "double", "bool", "Object", "List", "Iterator",
    "if", "else", "while", "do", "for", "return", "print",
    "true", "false", "new",
    "abs", "nan", "length", "iterator", "hasNext", "next",
}

_TYPE_STARTS = {"void", "int", "double", "bool", "Object", "List", "Iterator"}

_SYMBOLS = [
    "&&", "||", "==", "!=", "<=", ">=",
    "(", ")", "{", "}", "[", "]", "<", ">",
    "+", "-", "*", "/", "=", "!", ";", ",", ":",
]


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind  # ident | int | double | sym | kw | eof
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list:
    toks = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if c.isdigit():
            l0, c0 = line, col
            j = i
            while j < n and text[j].isdigit():
                j += 1
            is_double = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_double = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_double = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            advance(j - i)
            # range checking happens in the parser: `-2147483648` is one
            # negated literal there, while the bare magnitude is too big
            toks.append(Token("double" if is_double else "int", lexeme, l0, c0))
            continue
        if c.isalpha() or c == "_":
            l0, c0 = line, col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            advance(j - i)
            kind = "kw" if lexeme in KEYWORDS else "ident"
            toks.append(Token(kind, lexeme, l0, c0))
            continue
        matched = None
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched is None:
            raise ParseError(line, col, "a token", repr(c))
        toks.append(Token("sym", matched, line, col))
        advance(len(matched))
    toks.append(Token("eof", "<eof>", line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.pos = 0

    # ------------------------------------------------------------ utilities

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_sym(self, s: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.kind == "sym" and t.text == s

    def at_kw(self, w: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.kind == "kw" and t.text == w

    def expect_sym(self, s: str) -> Token:
        t = self.peek()
        if not self.at_sym(s):
            raise ParseError(t.line, t.col, f"'{s}'", t.text)
        return self.next()

    def expect_kw(self, w: str) -> Token:
        t = self.peek()
        if not self.at_kw(w):
            raise ParseError(t.line, t.col, f"'{w}'", t.text)
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(t.line, t.col, what, t.text)
        return self.next()

    def loc(self) -> Loc:
        t = self.peek()
        return Loc(t.line, t.col)

    def fail(self, expected: str) -> ParseError:
        t = self.peek()
        return ParseError(t.line, t.col, expected, t.text)

    # ------------------------------------------------------------ types

    def at_type(self) -> bool:
        return self.peek().kind == "kw" and self.peek().text in _TYPE_STARTS

    def parse_type(self) -> Type:
        t = self.peek()
        if t.kind != "kw" or t.text not in _TYPE_STARTS:
            raise self.fail("a type")
        self.next()
        if t.text == "List" or t.text == "Iterator":
            self.expect_sym("<")
            elem = self.parse_type()
            if elem == VOID:
                raise ParseError(t.line, t.col, "non-void element type", "void")
            self.expect_sym(">")
            base = list_of(elem) if t.text == "List" else iterator_of(elem)
        else:
            base = {
                "void": VOID, "int": INT, "double": DOUBLE,
                "bool": BOOL, "Object": OBJECT,
            }[t.text]
        while self.at_sym("[") and self.at_sym("]", 1):
            self.next()
            self.next()
            if base == VOID:
                raise ParseError(t.line, t.col, "non-void element type", "void[]")
            base = OBJECT_ARRAY if base == OBJECT else array_of(base)
        return base

    # ------------------------------------------------------------ program

    def parse_program(self) -> Program:
        methods = []
        seen = set()
        while not self.peek().kind == "eof":
            m = self.parse_method()
            if m.name in seen:
                raise ParseError(m.loc.line, m.loc.col, "a new method name",
                                 f"duplicate method '{m.name}'")
            seen.add(m.name)
            methods.append(m)
        return Program(methods)

    def parse_method(self) -> MethodDef:
        loc = self.loc()
        ret_type = self.parse_type()
        name = self.expect_ident("method name").text
        self.expect_sym("(")
        params = []
        seen = set()
        if not self.at_sym(")"):
            while True:
                pt = self.parse_type()
                if pt == VOID:
                    raise self.fail("non-void parameter type")
                pn = self.expect_ident("parameter name")
                if pn.text in seen:
                    raise ParseError(pn.line, pn.col, "a new parameter name",
                                     f"duplicate parameter '{pn.text}'")
                seen.add(pn.text)
                params.append(Param(pn.text, pt))
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym(")")
        self.expect_sym("{")
        body = self.parse_seq(in_loop=False)
        self.expect_sym("}")
        ret = None
        if body and isinstance(body[-1], Return):
            ret = body.pop().value
        return MethodDef(ret_type, name, params, body, ret, loc=loc)

    # ------------------------------------------------------------ statements

    def parse_seq(self, in_loop: bool) -> list:
        """Statements up to '}' . A `return` must be the last statement."""
        stmts = []
        while not self.at_sym("}") and self.peek().kind != "eof":
            if stmts and isinstance(stmts[-1], Return):
                t = self.peek()
                raise ParseError(t.line, t.col, "'}' (return must be the last "
                                 "statement in its block)", t.text)
            stmts.append(self.parse_stmt(in_loop))
        return stmts

    def parse_body(self, in_loop: bool) -> list:
        """Either a braced block or a single statement."""
        if self.at_sym("{"):
            self.next()
            stmts = self.parse_seq(in_loop)
            self.expect_sym("}")
            return stmts
        return [self.parse_stmt(in_loop)]

    def parse_stmt(self, in_loop: bool) -> Stmt:
        loc = self.loc()
        t = self.peek()
        if self.at_kw("if"):
            return self.parse_if(in_loop)
        if self.at_kw("while"):
            self.next()
            self.expect_sym("(")
            cond = self.parse_expr()
            self.expect_sym(")")
            body = self.parse_body(in_loop=True)
            return While(cond, body, loc=loc)
        if self.at_kw("do"):
            self.next()
            body = self.parse_body(in_loop=True)
            self.expect_kw("while")
            self.expect_sym("(")
            cond = self.parse_expr()
            self.expect_sym(")")
            self.expect_sym(";")
            return DoWhile(body, cond, loc=loc)
        if self.at_kw("for"):
            return self.parse_for(loc)
        if self.at_kw("return"):
            if in_loop:
                raise ParseError(t.line, t.col, "a statement",
                                 "'return' (not allowed inside a loop)")
            self.next()
            value = self.parse_return_value()
            self.expect_sym(";")
            return Return(value, loc=loc)
        if self.at_kw("print"):
            self.next()
            self.expect_sym("(")
            value = self.parse_expr()
            self.expect_sym(")")
            self.expect_sym(";")
            return Print(value, loc=loc)
        if self.at_sym("{"):
            self.next()
            body = self.parse_seq(in_loop)
            self.expect_sym("}")
            return Block(body, loc=loc)
        if self.at_type():
            st = self.parse_decl(loc)
            self.expect_sym(";")
            return st
        if t.kind == "ident":
            st = self.parse_assign_or_call(loc)
            self.expect_sym(";")
            return st
        raise self.fail("a statement")

    def parse_if(self, in_loop: bool) -> Stmt:
        loc = self.loc()
        self.expect_kw("if")
        self.expect_sym("(")
        cond = self.parse_expr()
        self.expect_sym(")")
        then = self.parse_body(in_loop)
        orelse = None
        if self.at_kw("else"):
            self.next()
            orelse = self.parse_body(in_loop)
        return If(cond, then, orelse, loc=loc)

    def parse_return_value(self) -> Expr:
        if self.peek().kind == "ident" and self.at_sym("(", 1):
            name = self.next().text
            args = self.parse_call_args()
            return Call(name, args)
        return self.parse_expr()

    def parse_decl(self, loc: Loc) -> Stmt:
        """`type name = expr` or the declaring call form `type name = f(...)`."""
        ty = self.parse_type()
        if ty == VOID:
            raise self.fail("a non-void declaration type")
        name = self.expect_ident("variable name").text
        self.expect_sym("=")
        if self.peek().kind == "ident" and self.at_sym("(", 1):
            mname = self.next().text
            args = self.parse_call_args()
            return CallAssign(name, mname, args, decl_type=ty, loc=loc)
        init = self.parse_expr()
        return VarDecl(ty, name, init, loc=loc)

    def parse_assign_or_call(self, loc: Loc) -> Stmt:
        name = self.expect_ident().text
        if self.at_sym("("):
            args = self.parse_call_args()
            return CallAssign(None, name, args, loc=loc)
        if self.at_sym("["):
            self.next()
            index = self.parse_expr()
            self.expect_sym("]")
            self.expect_sym("=")
            value = self.parse_expr()
            return AssignIndex(name, index, value, loc=loc)
        self.expect_sym("=")
        if self.peek().kind == "ident" and self.at_sym("(", 1):
            mname = self.next().text
            args = self.parse_call_args()
            return CallAssign(name, mname, args, loc=loc)
        value = self.parse_expr()
        return Assign(name, value, loc=loc)

    def parse_call_args(self) -> list:
        self.expect_sym("(")
        args = []
        if not self.at_sym(")"):
            while True:
                args.append(self.parse_expr())
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym(")")
        return args

    def parse_for(self, loc: Loc) -> Stmt:
        self.expect_kw("for")
        self.expect_sym("(")
        # foreach: `for (type name : collection)`
        if self.at_type():
            save = self.pos
            elem_type = self.parse_type()
            if self.peek().kind == "ident" and self.at_sym(":", 1):
                elem = self.expect_ident().text
                self.expect_sym(":")
                coll = self.parse_expr()
                self.expect_sym(")")
                body = self.parse_body(in_loop=True)
                return Foreach(elem_type, elem, coll, body, loc=loc)
            self.pos = save
        init = self.parse_for_init()
        self.expect_sym(";")
        cond = BoolLit(True) if self.at_sym(";") else self.parse_expr()
        self.expect_sym(";")
        update = self.parse_for_update()
        self.expect_sym(")")
        body = self.parse_body(in_loop=True)
        return For(init, cond, update, body, loc=loc)

    def parse_for_init(self) -> list:
        if self.at_sym(";"):
            return []
        loc = self.loc()
        if self.at_type():
            ty = self.parse_type()
            if ty == VOID:
                raise self.fail("a non-void declaration type")
            decls = []
            while True:
                name = self.expect_ident("variable name").text
                self.expect_sym("=")
                init = self.parse_expr()
                decls.append(VarDecl(ty, name, init, loc=loc))
                if self.at_sym(","):
                    self.next()
                    continue
                break
            return decls
        assigns = []
        while True:
            name = self.expect_ident("variable name").text
            self.expect_sym("=")
            value = self.parse_expr()
            assigns.append(Assign(name, value, loc=loc))
            if self.at_sym(","):
                self.next()
                continue
            break
        return assigns

    def parse_for_update(self) -> list:
        if self.at_sym(")"):
            return []
        updates = []
        while True:
            loc = self.loc()
            name = self.expect_ident("variable name").text
            if self.at_sym("("):
                args = self.parse_call_args()
                updates.append(CallAssign(None, name, args, loc=loc))
            else:
                self.expect_sym("=")
                if self.peek().kind == "ident" and self.at_sym("(", 1):
                    mname = self.next().text
                    args = self.parse_call_args()
                    updates.append(CallAssign(name, mname, args, loc=loc))
                else:
                    updates.append(Assign(name, self.parse_expr(), loc=loc))
            if self.at_sym(","):
                self.next()
                continue
            break
        return updates

    # ------------------------------------------------------------ expressions

    def parse_expr(self) -> Expr:
        return self.parse_binary(1)

    _LEVELS = {
        1: ("||",),
        2: ("&&",),
        3: ("==", "!="),
        4: ("<", "<=", ">", ">="),
        5: ("+", "-"),
        6: ("*", "/"),
    }

    def parse_binary(self, level: int) -> Expr:
        if level > 6:
            return self.parse_unary()
        e = self.parse_binary(level + 1)
        ops = self._LEVELS[level]
        while self.peek().kind == "sym" and self.peek().text in ops:
            op = self.next().text
            rhs = self.parse_binary(level + 1)
            e = Binary(op, e, rhs)
        return e

    def parse_unary(self) -> Expr:
        if self.at_sym("-"):
            minus = self.next()
            # fold a negated numeric literal so INT_MIN is writable and
            # printed negative literals re-parse to the same tree
            t = self.peek()
            if t.kind == "int":
                self.next()
                value = -int(t.text)
                if value < INT_MIN:
                    raise ParseError(minus.line, minus.col,
                                     "int literal within 32-bit range", f"-{t.text}")
                return IntLit(value)
            if t.kind == "double":
                self.next()
                return DoubleLit(-float(t.text))
            return Unary("-", self.parse_unary())
        if self.at_sym("!"):
            self.next()
            return Unary("!", self.parse_unary())
        if self.at_sym("(") and self.peek(1).kind == "kw" and self.peek(1).text in _TYPE_STARTS:
            self.next()
            ty = self.parse_type()
            self.expect_sym(")")
            if ty == VOID:
                raise self.fail("a non-void cast type")
            return Cast(ty, self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while self.at_sym("["):
            self.next()
            idx = self.parse_expr()
            self.expect_sym("]")
            e = Index(e, idx)
        return e

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            if int(t.text) > INT_MAX:
                raise ParseError(t.line, t.col, "int literal within 32-bit range", t.text)
            return IntLit(int(t.text))
        if t.kind == "double":
            self.next()
            return DoubleLit(float(t.text))
        if self.at_kw("true"):
            self.next()
            return BoolLit(True)
        if self.at_kw("false"):
            self.next()
            return BoolLit(False)
        if self.at_kw("length"):
            self.next()
            self.expect_sym("(")
            e = self.parse_expr()
            self.expect_sym(")")
            return Length(e)
        if t.kind == "kw" and t.text in ("abs", "nan", "iterator", "hasNext", "next"):
            self.next()
            args = self.parse_call_args()
            return Builtin(t.text, args)
        if self.at_kw("new"):
            return self.parse_collection_literal()
        if t.kind == "ident":
            if self.at_sym("(", 1):
                raise ParseError(t.line, t.col, "an expression",
                                 f"'{t.text}(' (method calls cannot appear inside expressions)")
            self.next()
            return Var(t.text)
        if self.at_sym("("):
            self.next()
            e = self.parse_expr()
            self.expect_sym(")")
            return e
        raise self.fail("an expression")

    def parse_collection_literal(self) -> Expr:
        # `new T[] { ... }` or `new List<T> { ... }`; parse_type consumes any
        # [] suffix itself, so `new List<T>[] { ... }` lands in the array case
        self.expect_kw("new")
        ty = self.parse_type()
        if ty.kind == "list":
            return ListLit(ty.elem, self.parse_brace_elems())
        if ty == OBJECT_ARRAY:
            elem = OBJECT
        elif ty.kind == "array":
            elem = ty.elem
        else:
            raise self.fail("an array or list type after 'new'")
        return ArrayLit(elem, self.parse_brace_elems())

    def parse_brace_elems(self) -> list:
        self.expect_sym("{")
        elems = []
        if not self.at_sym("}"):
            while True:
                elems.append(self.parse_expr())
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym("}")
        return elems


def parse(text: str) -> Program:
    """Parse source text. Raises ParseError on the first violation."""
    program = _Parser(tokenize(text)).parse_program()
    assign_loop_ids(program)
    return program
