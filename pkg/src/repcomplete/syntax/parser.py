"""Recursive-descent parser for a Java subset producing JDT-shaped trees.

Supported: compilation units, classes/interfaces/enums/annotation types,
generics, annotations, all Java 8 statements and expressions including
lambdas and method references, try-with-resources and multi-catch.
Not supported (raises ``UnsupportedConstruct``): records, switch
expressions and arrow labels, pattern-matching ``instanceof``, receiver
parameters, module declarations, explicit constructor type arguments.
"""

from .lexer import PRIMITIVES, JavaSyntaxError, Token, UnsupportedConstruct, tokenize
from .nodes import AstNode

MODIFIER_WORDS = frozenset([
    "public", "protected", "private", "static", "abstract", "final", "native",
    "synchronized", "transient", "volatile", "strictfp", "default",
])

ASSIGN_OPS = frozenset(["=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<=", ">>=", ">>>="])

BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "instanceof": 7,
    "<<": 8, ">>": 8, ">>>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}

_LITERAL_KINDS = {
    "int": "NumberLiteral",
    "float": "NumberLiteral",
    "string": "StringLiteral",
    "textblock": "TextBlock",
    "char": "CharacterLiteral",
    "bool": "BooleanLiteral",
}

_NAME_KINDS = ("SimpleName", "QualifiedName")


class Parser:
    def __init__(self, source):
        self.source = source
        self.toks = tokenize(source)
        self.i = 0
        self.prev_end = 0
        self._patches = []  # (index, original token) for split '>>' tokens

    # -- token plumbing -------------------------------------------------

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value, k=0):
        t = self.peek(k) if k else self.tok
        return t.value == value and t.kind in ("op", "keyword")

    def next(self):
        t = self.tok
        if t.kind == "eof":
            self.error("unexpected end of input")
        self.i += 1
        self.prev_end = t.end
        return t

    def accept(self, value):
        if self.at(value):
            return self.next()
        return None

    def expect(self, value):
        if not self.at(value):
            self.error(f"expected {value!r} but found {self.tok.value or 'end of input'!r}")
        return self.next()

    def error(self, message, tok=None):
        tok = tok or self.tok
        raise JavaSyntaxError(message, tok.line, tok.column)

    def unsupported(self, what, tok=None):
        tok = tok or self.tok
        raise UnsupportedConstruct(f"unsupported construct: {what}", tok.line, tok.column)

    def mark(self):
        return (self.i, self.prev_end, len(self._patches))

    def reset(self, state):
        i, prev_end, npatch = state
        while len(self._patches) > npatch:
            idx, original = self._patches.pop()
            self.toks[idx] = original
        self.i, self.prev_end = i, prev_end

    def expect_gt(self):
        t = self.tok
        if t.kind == "op" and t.value == ">":
            return self.next()
        if t.kind == "op" and t.value.startswith(">") and len(t.value) > 1:
            self._patches.append((self.i, t))
            self.toks[self.i] = Token("op", t.value[1:], t.start + 1, t.end, t.line, t.column + 1)
            self.prev_end = t.start + 1
            return t
        self.error("expected '>'")

    def node(self, kind, start, content=None, operator=None):
        return AstNode(kind, content=content, start=start.start, operator=operator)

    def close(self, node):
        node.end = self.prev_end
        return node

    # -- names and types -------------------------------------------------

    def simple_name(self):
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected identifier but found {t.value or 'end of input'!r}")
        self.next()
        return AstNode("SimpleName", content=t.value, start=t.start, end=t.end)

    def qualified_name(self):
        start = self.tok
        name = self.simple_name()
        while self.at(".") and self.peek().kind == "ident":
            self.next()
            q = self.node("QualifiedName", start)
            q.add("qualifier", name)
            q.add("name", self.simple_name())
            name = self.close(q)
        return name

    def skip_type_annotations(self):
        while self.at("@") and not self.at("interface", 1):
            self.annotation()

    def type(self):
        self.skip_type_annotations()
        t = self.tok
        if t.kind == "keyword" and (t.value in PRIMITIVES or t.value == "void"):
            self.next()
            base = AstNode("PrimitiveType", content=t.value, start=t.start, end=t.end)
        elif t.kind == "ident":
            base = self.class_type()
        else:
            self.error(f"expected type but found {t.value or 'end of input'!r}")
        return self.dims_suffix(base, t)

    def dims_suffix(self, base, start):
        if not (self.at("[") and self.at("]", 1)):
            return base
        arr = self.node("ArrayType", start)
        arr.add("element-type", base)
        while self.at("[") and self.at("]", 1):
            d = self.node("Dimension", self.next())
            self.next()
            arr.add("dimension", self.close(d))
        return self.close(arr)

    def class_type(self):
        start = self.tok
        name = self.simple_name()
        while self.at(".") and self.peek().kind == "ident":
            self.next()
            q = self.node("QualifiedName", start)
            q.add("qualifier", name)
            q.add("name", self.simple_name())
            name = self.close(q)
        t = self.node("SimpleType", start)
        t.add("name", name)
        t = self.close(t)
        if self.at("<"):
            t = self.parameterized(t, start)
        while self.at(".") and self.peek().kind == "ident":
            self.next()
            qt = self.node("QualifiedType", start)
            qt.add("qualifier", t)
            qt.add("name", self.simple_name())
            t = self.close(qt)
            if self.at("<"):
                t = self.parameterized(t, start)
        return t

    def parameterized(self, base, start):
        pt = self.node("ParameterizedType", start)
        pt.add("type", base)
        for arg in self.type_arguments():
            pt.add("type-argument", arg)
        return self.close(pt)

    def type_arguments(self):
        self.expect("<")
        args = []
        if self.at(">"):
            self.expect_gt()
            return args
        while True:
            self.skip_type_annotations()
            if self.at("?"):
                w = self.node("WildcardType", self.next())
                if self.at("extends") or self.at("super"):
                    w.operator = self.next().value
                    w.add("bound", self.type())
                args.append(self.close(w))
            else:
                args.append(self.type())
            if not self.accept(","):
                break
        self.expect_gt()
        return args

    def type_parameters(self):
        self.expect("<")
        params = []
        while True:
            self.skip_type_annotations()
            tp = self.node("TypeParameter", self.tok)
            tp.add("name", self.simple_name())
            if self.accept("extends"):
                tp.add("bound", self.type())
                while self.accept("&"):
                    tp.add("bound", self.type())
            params.append(self.close(tp))
            if not self.accept(","):
                break
        self.expect_gt()
        return params

    # -- modifiers and annotations ----------------------------------------

    def modifiers(self, allow_default=False):
        mods = []
        while True:
            t = self.tok
            if t.kind == "keyword" and t.value in MODIFIER_WORDS:
                if t.value == "default" and (not allow_default or self.at(":", 1) or self.at("->", 1)):
                    break
                if t.value == "synchronized" and self.at("(", 1):
                    break
                self.next()
                mods.append(AstNode("Modifier", content=t.value, start=t.start, end=t.end))
            elif t.kind == "ident" and t.value in ("sealed", "non") and self.peek().kind in ("keyword", "ident", "op"):
                if t.value == "sealed" and self.peek().kind in ("keyword", "ident"):
                    self.unsupported("sealed types")
                break
            elif self.at("@") and not self.at("interface", 1):
                mods.append(self.annotation())
            else:
                break
        return mods

    def annotation(self):
        start = self.expect("@")
        name = self.qualified_name()
        if not self.at("("):
            a = self.node("MarkerAnnotation", start)
            a.add("type-name", name)
            return self.close(a)
        self.next()
        if self.at(")"):
            a = self.node("NormalAnnotation", start)
            a.add("type-name", name)
        elif self.tok.kind == "ident" and self.at("=", 1):
            a = self.node("NormalAnnotation", start)
            a.add("type-name", name)
            while True:
                pair = self.node("MemberValuePair", self.tok)
                pair.add("name", self.simple_name())
                self.expect("=")
                pair.add("value", self.element_value())
                a.add("value", self.close(pair))
                if not self.accept(","):
                    break
        else:
            a = self.node("SingleMemberAnnotation", start)
            a.add("type-name", name)
            a.add("value", self.element_value())
        self.expect(")")
        return self.close(a)

    def element_value(self):
        if self.at("@"):
            return self.annotation()
        if self.at("{"):
            start = self.next()
            init = self.node("ArrayInitializer", start)
            while not self.at("}"):
                init.add("expression", self.element_value())
                if not self.accept(","):
                    break
            self.expect("}")
            return self.close(init)
        return self.conditional()

    # -- declarations -------------------------------------------------------

    def compilation_unit(self):
        cu = self.node("CompilationUnit", self.tok)
        t = self.tok
        if t.kind == "ident" and t.value in ("module", "open") and self.peek().kind == "ident":
            self.unsupported("module declaration")
        state = self.mark()
        mods = self.modifiers()
        if self.at("package"):
            pkg = self.node("PackageDeclaration", t)
            for m in mods:
                pkg.add("annotation", m)
            self.next()
            pkg.add("name", self.qualified_name())
            self.expect(";")
            cu.add("package", self.close(pkg))
        else:
            self.reset(state)
        while self.at("import"):
            imp = self.node("ImportDeclaration", self.next())
            ops = []
            if self.accept("static"):
                ops.append("static")
            imp.add("name", self.qualified_name())
            if self.at(".") and self.at("*", 1):
                self.next()
                self.next()
                ops.append("*")
            imp.operator = " ".join(ops) or None
            self.expect(";")
            cu.add("import", self.close(imp))
        while self.tok.kind != "eof":
            if self.accept(";"):
                continue
            cu.add("type", self.type_declaration())
        return self.close(cu)

    def type_declaration(self, mods=None, start=None):
        start = start or self.tok
        if mods is None:
            mods = self.modifiers(allow_default=False)
        if self.at("class") or self.at("interface"):
            kw = self.next().value
            decl = self.node("TypeDeclaration", start, operator=kw)
            for m in mods:
                decl.add("modifier", m)
            decl.add("name", self.simple_name())
            if self.at("<"):
                for tp in self.type_parameters():
                    decl.add("type-parameter", tp)
            if self.accept("extends"):
                if kw == "class":
                    decl.add("superclass-type", self.type())
                else:
                    decl.add("super-interface-type", self.type())
                    while self.accept(","):
                        decl.add("super-interface-type", self.type())
            if self.accept("implements"):
                decl.add("super-interface-type", self.type())
                while self.accept(","):
                    decl.add("super-interface-type", self.type())
            if self.tok.kind == "ident" and self.tok.value == "permits":
                self.unsupported("sealed types")
            self.class_body(decl)
            return self.close(decl)
        if self.at("enum"):
            self.next()
            decl = self.node("EnumDeclaration", start)
            for m in mods:
                decl.add("modifier", m)
            decl.add("name", self.simple_name())
            if self.accept("implements"):
                decl.add("super-interface-type", self.type())
                while self.accept(","):
                    decl.add("super-interface-type", self.type())
            self.enum_body(decl)
            return self.close(decl)
        if self.at("@") and self.at("interface", 1):
            self.next()
            self.next()
            decl = self.node("AnnotationTypeDeclaration", start)
            for m in mods:
                decl.add("modifier", m)
            decl.add("name", self.simple_name())
            self.annotation_body(decl)
            return self.close(decl)
        if self.tok.kind == "ident" and self.tok.value == "record":
            self.unsupported("record declaration")
        self.error(f"expected type declaration but found {self.tok.value or 'end of input'!r}")

    def class_body(self, owner):
        self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated class body")
            member = self.member_declaration()
            if member is not None:
                owner.add("body-declaration", member)
        self.expect("}")

    def enum_body(self, decl):
        self.expect("{")
        while not (self.at(";") or self.at("}")):
            start = self.tok
            const = self.node("EnumConstantDeclaration", start)
            for m in self.modifiers():
                const.add("modifier", m)
            const.add("name", self.simple_name())
            if self.at("("):
                for arg in self.arguments():
                    const.add("argument", arg)
            if self.at("{"):
                anon = self.node("AnonymousClassDeclaration", self.tok)
                self.class_body(anon)
                const.add("anonymous-class", self.close(anon))
            decl.add("enum-constant", self.close(const))
            if not self.accept(","):
                break
        if self.accept(";"):
            while not self.at("}"):
                if self.tok.kind == "eof":
                    self.error("unterminated enum body")
                member = self.member_declaration()
                if member is not None:
                    decl.add("body-declaration", member)
        self.expect("}")

    def annotation_body(self, decl):
        self.expect("{")
        while not self.at("}"):
            if self.accept(";"):
                continue
            start = self.tok
            mods = self.modifiers()
            if self.at("class") or self.at("interface") or self.at("enum") or (self.at("@") and self.at("interface", 1)):
                decl.add("body-declaration", self.type_declaration(mods, start))
                continue
            typ = self.type()
            name = self.simple_name()
            if self.accept("("):
                self.expect(")")
                member = self.node("AnnotationTypeMemberDeclaration", start)
                for m in mods:
                    member.add("modifier", m)
                member.add("type", typ)
                member.add("name", name)
                if self.accept("default"):
                    member.add("default", self.element_value())
                self.expect(";")
                decl.add("body-declaration", self.close(member))
            else:
                decl.add("body-declaration", self.field_rest(start, mods, typ, name))
        self.expect("}")

    def member_declaration(self):
        if self.accept(";"):
            return None
        start = self.tok
        if self.at("{") or (self.at("static") and self.at("{", 1)):
            init = self.node("Initializer", start)
            if self.at("static"):
                t = self.next()
                init.add("modifier", AstNode("Modifier", content="static", start=t.start, end=t.end))
            init.add("body", self.block())
            return self.close(init)
        mods = self.modifiers(allow_default=True)
        if self.at("class") or self.at("interface") or self.at("enum") or (self.at("@") and self.at("interface", 1)):
            return self.type_declaration(mods, start)
        if self.tok.kind == "ident" and self.tok.value == "record" and self.peek().kind == "ident":
            self.unsupported("record declaration")
        type_params = self.type_parameters() if self.at("<") else []
        if self.tok.kind == "ident" and self.at("(", 1):
            method = self.node("MethodDeclaration", start, operator="constructor")
            for m in mods:
                method.add("modifier", m)
            for tp in type_params:
                method.add("type-parameter", tp)
            method.add("name", self.simple_name())
            return self.method_rest(method)
        typ = self.type()
        name = self.simple_name()
        if self.at("("):
            method = self.node("MethodDeclaration", start)
            for m in mods:
                method.add("modifier", m)
            for tp in type_params:
                method.add("type-parameter", tp)
            method.add("return-type", typ)
            method.add("name", name)
            return self.method_rest(method)
        if type_params:
            self.error("type parameters on a field")
        return self.field_rest(start, mods, typ, name)

    def field_rest(self, start, mods, typ, name):
        field = self.node("FieldDeclaration", start)
        for m in mods:
            field.add("modifier", m)
        field.add("type", typ)
        field.add("fragment", self.fragment(name))
        while self.accept(","):
            field.add("fragment", self.fragment())
        self.expect(";")
        return self.close(field)

    def method_rest(self, method):
        for p in self.formal_parameters():
            method.add("parameter", p)
        self.extra_dims(method)
        if self.accept("throws"):
            method.add("thrown-exception", self.type())
            while self.accept(","):
                method.add("thrown-exception", self.type())
        if self.at("{"):
            method.add("body", self.block())
        else:
            self.expect(";")
        return self.close(method)

    def extra_dims(self, owner):
        while self.at("[") and self.at("]", 1):
            d = self.node("Dimension", self.next())
            self.next()
            owner.add("extra-dimension", self.close(d))

    def formal_parameters(self):
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                params.append(self.formal_parameter())
                if not self.accept(","):
                    break
        self.expect(")")
        return params

    def formal_parameter(self):
        start = self.tok
        decl = self.node("SingleVariableDeclaration", start)
        for m in self.modifiers():
            decl.add("modifier", m)
        decl.add("type", self.type())
        if self.accept("..."):
            decl.operator = "..."
        if self.at("this"):
            self.unsupported("receiver parameter")
        decl.add("name", self.simple_name())
        self.extra_dims(decl)
        return self.close(decl)

    def fragment(self, name=None):
        start = self.tok
        frag = AstNode("VariableDeclarationFragment", start=(name.start if name else start.start))
        frag.add("name", name or self.simple_name())
        self.extra_dims(frag)
        if self.accept("="):
            frag.add("initializer", self.variable_initializer())
        return self.close(frag)

    def variable_initializer(self):
        if self.at("{"):
            return self.array_initializer()
        return self.expression()

    def array_initializer(self):
        init = self.node("ArrayInitializer", self.expect("{"))
        while not self.at("}"):
            init.add("expression", self.variable_initializer())
            if not self.accept(","):
                break
        self.expect("}")
        return self.close(init)

    # -- statements -------------------------------------------------------

    def block(self):
        b = self.node("Block", self.expect("{"))
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            b.add("statement", self.block_statement())
        self.expect("}")
        return self.close(b)

    def looks_like_declaration(self):
        """Speculatively check for ``[modifiers] Type Identifier``."""
        t = self.tok
        if t.kind == "keyword" and t.value in PRIMITIVES:
            return True
        if t.kind == "keyword" and t.value == "final":
            return True
        if self.at("@"):
            return True
        if t.kind != "ident":
            return False
        state = self.mark()
        try:
            self.type()
            nt, after = self.tok, self.peek()
            ok = nt.kind == "ident" and after.value in ("=", ";", ",", "[", ":", ")")
        except JavaSyntaxError:
            ok = False
        self.reset(state)
        return ok

    def block_statement(self):
        start = self.tok
        if self.at("class") or self.at("interface") or self.at("enum"):
            stmt = self.node("TypeDeclarationStatement", start)
            stmt.add("declaration", self.type_declaration())
            return self.close(stmt)
        if self.at("abstract") or self.at("static") or (self.at("final") and (self.at("class", 1) or self.at("abstract", 1))):
            mods = self.modifiers()
            stmt = self.node("TypeDeclarationStatement", start)
            stmt.add("declaration", self.type_declaration(mods, start))
            return self.close(stmt)
        if self.tok.kind == "ident" and self.tok.value == "record" and self.peek().kind == "ident":
            self.unsupported("local record")
        if self.looks_like_declaration():
            mods = self.modifiers()
            if self.at("class") or self.at("interface") or self.at("enum"):
                stmt = self.node("TypeDeclarationStatement", start)
                stmt.add("declaration", self.type_declaration(mods, start))
                return self.close(stmt)
            stmt = self.node("VariableDeclarationStatement", start)
            for m in mods:
                stmt.add("modifier", m)
            stmt.add("type", self.type())
            stmt.add("fragment", self.fragment())
            while self.accept(","):
                stmt.add("fragment", self.fragment())
            self.expect(";")
            return self.close(stmt)
        return self.statement()

    def par_expression(self):
        self.expect("(")
        e = self.expression()
        self.expect(")")
        return e

    def statement(self):
        start = self.tok
        t = start
        if self.at("{"):
            return self.block()
        if self.accept(";"):
            return self.close(self.node("EmptyStatement", start))
        if t.kind == "keyword":
            kw = t.value
            if kw == "if":
                self.next()
                s = self.node("IfStatement", start)
                s.add("expression", self.par_expression())
                s.add("then-statement", self.statement())
                if self.accept("else"):
                    s.add("else-statement", self.statement())
                return self.close(s)
            if kw == "while":
                self.next()
                s = self.node("WhileStatement", start)
                s.add("expression", self.par_expression())
                s.add("body", self.statement())
                return self.close(s)
            if kw == "do":
                self.next()
                s = self.node("DoStatement", start)
                s.add("body", self.statement())
                self.expect("while")
                s.add("expression", self.par_expression())
                self.expect(";")
                return self.close(s)
            if kw == "for":
                return self.for_statement()
            if kw == "try":
                return self.try_statement()
            if kw == "switch":
                return self.switch_statement()
            if kw == "return":
                self.next()
                s = self.node("ReturnStatement", start)
                if not self.at(";"):
                    s.add("expression", self.expression())
                self.expect(";")
                return self.close(s)
            if kw in ("break", "continue"):
                self.next()
                s = self.node("BreakStatement" if kw == "break" else "ContinueStatement", start)
                if self.tok.kind == "ident":
                    s.add("label", self.simple_name())
                self.expect(";")
                return self.close(s)
            if kw == "throw":
                self.next()
                s = self.node("ThrowStatement", start)
                s.add("expression", self.expression())
                self.expect(";")
                return self.close(s)
            if kw == "synchronized":
                self.next()
                s = self.node("SynchronizedStatement", start)
                s.add("expression", self.par_expression())
                s.add("body", self.block())
                return self.close(s)
            if kw == "assert":
                self.next()
                s = self.node("AssertStatement", start)
                s.add("expression", self.expression())
                if self.accept(":"):
                    s.add("message", self.expression())
                self.expect(";")
                return self.close(s)
        if t.kind == "ident" and self.at(":", 1):
            self.next()
            self.next()
            s = self.node("LabeledStatement", start)
            s.add("label", AstNode("SimpleName", content=t.value, start=t.start, end=t.end))
            s.add("body", self.statement())
            return self.close(s)
        e = self.expression()
        self.expect(";")
        if e.kind in ("ConstructorInvocation", "SuperConstructorInvocation"):
            return self.close(e)
        s = self.node("ExpressionStatement", start)
        s.add("expression", e)
        return self.close(s)

    def for_statement(self):
        start = self.expect("for")
        self.expect("(")
        state = self.mark()
        enhanced = False
        try:
            mods = self.modifiers()
            typ = self.type()
            name = self.simple_name()
            enhanced = self.at(":")
        except JavaSyntaxError:
            pass
        if enhanced:
            self.next()
            s = self.node("EnhancedForStatement", start)
            param = AstNode("SingleVariableDeclaration", start=mods[0].start if mods else typ.start)
            for m in mods:
                param.add("modifier", m)
            param.add("type", typ)
            param.add("name", name)
            param.end = name.end
            s.add("parameter", param)
            s.add("expression", self.expression())
            self.expect(")")
            s.add("body", self.statement())
            return self.close(s)
        self.reset(state)
        s = self.node("ForStatement", start)
        if not self.at(";"):
            if self.looks_like_declaration():
                s.add("initializer", self.declaration_expression())
            else:
                s.add("initializer", self.expression())
                while self.accept(","):
                    s.add("initializer", self.expression())
        self.expect(";")
        if not self.at(";"):
            s.add("expression", self.expression())
        self.expect(";")
        if not self.at(")"):
            s.add("updater", self.expression())
            while self.accept(","):
                s.add("updater", self.expression())
        self.expect(")")
        s.add("body", self.statement())
        return self.close(s)

    def declaration_expression(self, single=False):
        d = self.node("VariableDeclarationExpression", self.tok)
        for m in self.modifiers():
            d.add("modifier", m)
        d.add("type", self.type())
        d.add("fragment", self.fragment())
        while not single and self.accept(","):
            d.add("fragment", self.fragment())
        return self.close(d)

    def try_statement(self):
        start = self.expect("try")
        s = self.node("TryStatement", start)
        has_resources = False
        if self.accept("("):
            has_resources = True
            while not self.at(")"):
                if self.looks_like_declaration():
                    s.add("resource", self.declaration_expression(single=True))
                else:
                    s.add("resource", self.expression())
                if not self.accept(";"):
                    break
            self.expect(")")
        s.add("body", self.block())
        catches = 0
        while self.at("catch"):
            cstart = self.next()
            clause = self.node("CatchClause", cstart)
            self.expect("(")
            decl = self.node("SingleVariableDeclaration", self.tok)
            for m in self.modifiers():
                decl.add("modifier", m)
            tstart = self.tok
            types = [self.type()]
            while self.accept("|"):
                types.append(self.type())
            if len(types) == 1:
                decl.add("type", types[0])
            else:
                union = self.node("UnionType", tstart)
                for ty in types:
                    union.add("type", ty)
                decl.add("type", self.close(union))
            decl.add("name", self.simple_name())
            clause.add("exception", self.close(decl))
            self.expect(")")
            clause.add("body", self.block())
            s.add("catch-clause", self.close(clause))
            catches += 1
        if self.accept("finally"):
            s.add("finally", self.block())
        elif not catches and not has_resources:
            self.error("try without catch or finally")
        return self.close(s)

    def switch_statement(self):
        start = self.expect("switch")
        s = self.node("SwitchStatement", start)
        s.add("expression", self.par_expression())
        self.expect("{")
        while not self.at("}"):
            t = self.tok
            if t.kind == "eof":
                self.error("unterminated switch")
            if self.at("case"):
                self.next()
                case = self.node("SwitchCase", t)
                while True:
                    case.add("expression", self.conditional())
                    if not self.accept(","):
                        break
                if self.at("->"):
                    self.unsupported("arrow switch label")
                self.expect(":")
                s.add("statement", self.close(case))
            elif self.at("default") and (self.at(":", 1) or self.at("->", 1)):
                self.next()
                if self.at("->"):
                    self.unsupported("arrow switch label")
                self.next()
                s.add("statement", self.close(self.node("SwitchCase", t, operator="default")))
            else:
                s.add("statement", self.block_statement())
        self.expect("}")
        return self.close(s)

    # -- expressions ----------------------------------------------------------

    def lambda_ahead(self):
        t = self.tok
        if t.kind == "ident":
            return self.at("->", 1)
        if not self.at("("):
            return False
        depth = 0
        j = self.i
        while j < len(self.toks):
            tk = self.toks[j]
            if tk.kind == "op" and tk.value == "(":
                depth += 1
            elif tk.kind == "op" and tk.value == ")":
                depth -= 1
                if depth == 0:
                    nxt = self.toks[j + 1]
                    return nxt.kind == "op" and nxt.value == "->"
            elif tk.kind == "eof" or (tk.kind == "op" and tk.value in (";", "{", "}")):
                return False
            j += 1
        return False

    def lambda_expression(self):
        start = self.tok
        lam = self.node("LambdaExpression", start)
        if self.tok.kind == "ident":
            frag = AstNode("VariableDeclarationFragment", start=start.start)
            frag.add("name", self.simple_name())
            frag.end = self.prev_end
            lam.add("parameter", frag)
        else:
            self.expect("(")
            if not self.at(")"):
                inferred = self.tok.kind == "ident" and (self.at(",", 1) or self.at(")", 1))
                while True:
                    if inferred:
                        pt = self.tok
                        frag = AstNode("VariableDeclarationFragment", start=pt.start)
                        frag.add("name", self.simple_name())
                        frag.end = self.prev_end
                        lam.add("parameter", frag)
                    else:
                        lam.add("parameter", self.formal_parameter())
                    if not self.accept(","):
                        break
            self.expect(")")
        self.expect("->")
        lam.add("body", self.block() if self.at("{") else self.expression())
        return self.close(lam)

    def expression(self):
        if self.lambda_ahead():
            return self.lambda_expression()
        start = self.tok
        lhs = self.conditional()
        t = self.tok
        if t.kind == "op" and t.value in ASSIGN_OPS:
            self.next()
            a = self.node("Assignment", start, operator=t.value)
            a.add("left-hand-side", lhs)
            a.add("right-hand-side", self.expression())
            return self.close(a)
        return lhs

    def conditional(self):
        start = self.tok
        cond = self.binary(1)
        if not self.at("?"):
            return cond
        self.next()
        c = self.node("ConditionalExpression", start)
        c.add("expression", cond)
        c.add("then-expression", self.expression())
        self.expect(":")
        c.add("else-expression", self.lambda_expression() if self.lambda_ahead() else self.conditional())
        return self.close(c)

    def binary(self, min_prec):
        start = self.tok
        left = self.unary()
        while True:
            t = self.tok
            prec = BINARY_PRECEDENCE.get(t.value) if t.kind in ("op", "keyword") else None
            if prec is None or prec < min_prec:
                return left
            self.next()
            if t.value == "instanceof":
                inst = self.node("InstanceofExpression", start)
                inst.add("left-operand", left)
                if self.at("final"):
                    self.unsupported("pattern matching instanceof")
                inst.add("right-operand", self.type())
                if self.tok.kind == "ident":
                    self.unsupported("pattern matching instanceof")
                left = self.close(inst)
                continue
            right = self.binary(prec + 1)
            left = self.infix(t.value, left, right, start)

    def infix(self, op, left, right, start):
        if left.kind == "InfixExpression" and left.operator == op:
            left.add("extended-operand", right)
            left.end = right.end
            return left
        e = self.node("InfixExpression", start, operator=op)
        e.add("left-operand", left)
        e.add("right-operand", right)
        return self.close(e)

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.value in ("++", "--", "+", "-", "!", "~"):
            self.next()
            p = self.node("PrefixExpression", t, operator=t.value)
            p.add("operand", self.unary())
            return self.close(p)
        if self.at("("):
            cast = self.try_cast()
            if cast is not None:
                return cast
        return self.postfix()

    def try_cast(self):
        if self.lambda_ahead():
            return None
        state = self.mark()
        start = self.next()
        try:
            types = [self.type()]
            while self.accept("&"):
                types.append(self.type())
            if not self.at(")"):
                raise JavaSyntaxError("not a cast")
            self.next()
        except JavaSyntaxError:
            self.reset(state)
            return None
        nt = self.tok
        primitive = types[0].kind == "PrimitiveType" and len(types) == 1
        if primitive:
            is_cast = not (nt.kind == "op" and nt.value in (")", ";", ",", "]", "}", ".", "?", ":")
                           or nt.kind == "op" and nt.value in BINARY_PRECEDENCE and nt.value not in ("+", "-")
                           or nt.kind == "eof")
        else:
            is_cast = (
                nt.kind in ("ident", "int", "float", "char", "string", "textblock", "bool", "null")
                or (nt.kind == "op" and nt.value in ("(", "!", "~"))
                or (nt.kind == "keyword" and (nt.value in ("this", "super", "new", "void") or nt.value in PRIMITIVES))
            )
        if not is_cast:
            self.reset(state)
            return None
        c = self.node("CastExpression", start)
        if len(types) == 1:
            c.add("type", types[0])
        else:
            inter = AstNode("IntersectionType", start=types[0].start, end=types[-1].end)
            for ty in types:
                inter.add("type", ty)
            c.add("type", inter)
        if self.lambda_ahead():
            c.add("expression", self.lambda_expression())
        else:
            c.add("expression", self.unary())
        return self.close(c)

    def arguments(self):
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.expression())
                if not self.accept(","):
                    break
        self.expect(")")
        return args

    def invocation(self, start, receiver, name, type_args=()):
        mi = self.node("MethodInvocation", start)
        mi.add("receiver", receiver)
        for ta in type_args:
            mi.add("type-argument", ta)
        mi.add("method-name", name)
        for arg in self.arguments():
            mi.add("argument", arg)
        return self.close(mi)

    def as_type(self, e, start):
        if e.kind in _NAME_KINDS:
            st = AstNode("SimpleType", start=e.start, end=e.end)
            st.add("name", e)
            return st
        return e

    def postfix(self):
        start = self.tok
        e = self.primary()
        while True:
            if self.at("."):
                nt = self.peek()
                if nt.kind == "ident":
                    self.next()
                    name = self.simple_name()
                    if self.at("("):
                        e = self.invocation(start, e, name)
                    elif e.kind in _NAME_KINDS:
                        q = self.node("QualifiedName", start)
                        q.add("qualifier", e)
                        q.add("name", name)
                        e = self.close(q)
                    else:
                        fa = self.node("FieldAccess", start)
                        fa.add("expression", e)
                        fa.add("name", name)
                        e = self.close(fa)
                elif nt.value == "<":
                    self.next()
                    targs = self.type_arguments()
                    name = self.simple_name()
                    e = self.invocation(start, e, name, targs)
                elif nt.value == "new":
                    self.next()
                    e = self.creator(start, outer=e)
                elif nt.value == "this":
                    self.next()
                    self.next()
                    if e.kind not in _NAME_KINDS:
                        self.error("qualified this requires a type name")
                    th = self.node("ThisExpression", start)
                    th.add("qualifier", e)
                    e = self.close(th)
                elif nt.value == "class":
                    self.next()
                    self.next()
                    if e.kind not in _NAME_KINDS:
                        self.error("class literal requires a type")
                    tl = self.node("TypeLiteral", start)
                    tl.add("type", self.as_type(e, start))
                    e = self.close(tl)
                elif nt.value == "super":
                    self.next()
                    self.next()
                    e = self.super_suffix(start, qualifier=e)
                else:
                    self.error(f"unexpected {nt.value!r} after '.'", nt)
            elif self.at("["):
                if e.kind in _NAME_KINDS and self.at("]", 1):
                    typ = self.dims_suffix(self.as_type(e, start), start)
                    e = self.type_suffix(typ, start)
                    continue
                self.next()
                acc = self.node("ArrayAccess", start)
                acc.add("array", e)
                acc.add("index", self.expression())
                self.expect("]")
                e = self.close(acc)
            elif self.at("::"):
                e = self.method_reference(start, e)
            elif self.at("++") or self.at("--"):
                op = self.next().value
                p = self.node("PostfixExpression", start, operator=op)
                p.add("operand", e)
                e = self.close(p)
            else:
                return e

    def type_suffix(self, typ, start):
        """Continue after a type in expression position: ``T[].class`` or ``T[]::new``."""
        if self.at(".") and self.at("class", 1):
            self.next()
            self.next()
            tl = self.node("TypeLiteral", start)
            tl.add("type", typ)
            return self.close(tl)
        if self.at("::"):
            return self.method_reference(start, typ)
        self.error("expected '.class' or '::' after type")

    def method_reference(self, start, target):
        self.expect("::")
        targs = self.type_arguments() if self.at("<") else []
        if self.accept("new"):
            ref = self.node("CreationReference", start)
            ref.add("type", self.as_type(target, start))
        else:
            name = self.simple_name()
            if target.kind in ("ArrayType", "ParameterizedType", "PrimitiveType", "SimpleType", "QualifiedType"):
                ref = self.node("TypeMethodReference", start)
                ref.add("type", target)
            else:
                ref = self.node("ExpressionMethodReference", start)
                ref.add("expression", target)
            for ta in targs:
                ref.add("type-argument", ta)
            ref.add("name", name)
            return self.close(ref)
        for ta in targs:
            ref.add("type-argument", ta)
        return self.close(ref)

    def super_suffix(self, start, qualifier=None):
        if self.at("("):
            sc = self.node("SuperConstructorInvocation", start)
            sc.add("super-class-name", qualifier)
            for arg in self.arguments():
                sc.add("argument", arg)
            return self.close(sc)
        if self.accept("."):
            targs = self.type_arguments() if self.at("<") else []
            name = self.simple_name()
            if self.at("("):
                sm = self.node("SuperMethodInvocation", start)
                sm.add("super-class-name", qualifier)
                for ta in targs:
                    sm.add("type-argument", ta)
                sm.add("method-name", name)
                for arg in self.arguments():
                    sm.add("argument", arg)
                return self.close(sm)
            if targs:
                self.error("type arguments on field access")
            sf = self.node("SuperFieldAccess", start)
            sf.add("qualifier", qualifier)
            sf.add("name", name)
            return self.close(sf)
        if self.accept("::"):
            ref = self.node("SuperMethodReference", start)
            ref.add("qualifier", qualifier)
            ref.add("name", self.simple_name())
            return self.close(ref)
        self.error("expected '(', '.' or '::' after 'super'")

    def primary(self):
        t = self.tok
        kind = _LITERAL_KINDS.get(t.kind)
        if kind is not None:
            self.next()
            return AstNode(kind, content=t.value, start=t.start, end=t.end)
        if t.kind == "null":
            self.next()
            return AstNode("NullLiteral", start=t.start, end=t.end)
        if t.kind == "ident":
            if self.at("->", 1):
                return self.lambda_expression()
            name = self.simple_name()
            if self.at("("):
                return self.invocation(t, None, name)
            return name
        if self.at("("):
            if self.lambda_ahead():
                return self.lambda_expression()
            self.next()
            p = self.node("ParenthesizedExpression", t)
            p.add("expression", self.expression())
            self.expect(")")
            return self.close(p)
        if t.kind == "keyword":
            if t.value == "this":
                self.next()
                if self.at("("):
                    ci = self.node("ConstructorInvocation", t)
                    for arg in self.arguments():
                        ci.add("argument", arg)
                    return self.close(ci)
                return self.close(self.node("ThisExpression", t))
            if t.value == "super":
                self.next()
                return self.super_suffix(t)
            if t.value == "new":
                return self.creator(t)
            if t.value in PRIMITIVES or t.value == "void":
                self.next()
                typ = AstNode("PrimitiveType", content=t.value, start=t.start, end=t.end)
                return self.type_suffix(self.dims_suffix(typ, t), t)
            if t.value == "switch":
                self.unsupported("switch expression")
        if self.at("<"):
            self.unsupported("explicit generic invocation")
        self.error(f"expected expression but found {t.value or 'end of input'!r}")

    def creator(self, start, outer=None):
        self.expect("new")
        if self.at("<"):
            self.unsupported("constructor type arguments")
        self.skip_type_annotations()
        t = self.tok
        if t.kind == "keyword" and t.value in PRIMITIVES:
            self.next()
            base = AstNode("PrimitiveType", content=t.value, start=t.start, end=t.end)
        else:
            base = self.class_type()
        if self.at("["):
            creation = self.node("ArrayCreation", start)
            arr = AstNode("ArrayType", start=t.start)
            arr.add("element-type", base)
            dims = []
            while self.at("["):
                d = self.node("Dimension", self.next())
                if not self.at("]"):
                    dims.append(self.expression())
                self.expect("]")
                arr.add("dimension", self.close(d))
            arr.end = self.prev_end
            creation.add("type", arr)
            for d in dims:
                creation.add("dimension", d)
            if self.at("{"):
                creation.add("initializer", self.array_initializer())
            return self.close(creation)
        cic = self.node("ClassInstanceCreation", start)
        cic.add("expression", outer)
        cic.add("type", base)
        for arg in self.arguments():
            cic.add("argument", arg)
        if self.at("{"):
            anon = self.node("AnonymousClassDeclaration", self.tok)
            self.class_body(anon)
            cic.add("anonymous-class", self.close(anon))
        return self.close(cic)


_WRAPPERS = (
    ("", ""),
    ("class __Wrapper__ { void __body__() {\n", "\n} }"),
    ("class __Wrapper__ {\n", "\n}"),
)


def _parse_unit(source):
    p = Parser(source)
    return p.compilation_unit()


def parse_java(source):
    """Parse a compilation unit, a method body, or bare member declarations.

    The result is always a ``CompilationUnit``; bare members and bodies are
    wrapped in a synthetic ``__Wrapper__`` class. Parent links are set.
    Raises ``JavaSyntaxError`` / ``UnsupportedConstruct`` with line/column
    relative to ``source``; when every wrapping fails, the error that got
    furthest into the source is reported.
    """
    best = None
    for prefix, suffix in _WRAPPERS:
        try:
            root = _parse_unit(prefix + source + suffix)
        except (JavaSyntaxError, UnsupportedConstruct) as exc:
            line = exc.line - prefix.count("\n")
            if isinstance(exc, UnsupportedConstruct):
                # an unsupported construct was recognised; wrapping will not help
                raise type(exc)(exc.reason, line, exc.column) from None
            if best is None or (line, exc.column) > (best.line, best.column):
                best = type(exc)(exc.reason, line, exc.column)
            continue
        if prefix:
            shift = len(prefix)
            for node in root.walk():
                node.start = max(0, node.start - shift)
                node.end = max(node.start, min(len(source), node.end - shift))
        _fix_spans(root)
        return root
    raise best


def _fix_spans(root):
    for node in reversed(list(root.walk())):
        for c in node.children:
            node.end = max(node.end, c.end)


def iter_functions(unit):
    """Yield the MethodDeclaration nodes with bodies, in source order.

    Methods of member types are included; methods nested inside method
    bodies (anonymous or local classes) belong to their enclosing function.
    """
    stack = [c for c in unit.children if c.role == "type"]
    out = []
    while stack:
        decl = stack.pop()
        for member in decl.children:
            if member.role != "body-declaration":
                continue
            if member.kind == "MethodDeclaration":
                if member.child("body") is not None:
                    out.append(member)
            elif member.kind in ("TypeDeclaration", "EnumDeclaration", "AnnotationTypeDeclaration"):
                stack.append(member)
    out.sort(key=lambda n: n.start)
    return out
