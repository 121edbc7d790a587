"""Lexical variable resolution.

Marks each SimpleName that resolves to a parameter, local, loop/catch/
lambda/resource variable, or a field (or enum constant) declared in an
enclosing type of the same file. No inheritance or cross-file lookup.
"""

# (parent kind, role) slots where a SimpleName never names a variable
_NON_REFERENCE_PARENTS = frozenset([
    "SimpleType", "QualifiedType", "QualifiedName", "TypeParameter",
    "MarkerAnnotation", "NormalAnnotation", "PackageDeclaration",
    "ImportDeclaration", "LabeledStatement", "BreakStatement",
    "ContinueStatement", "MethodDeclaration", "TypeDeclaration",
    "EnumDeclaration", "AnnotationTypeDeclaration",
    "AnnotationTypeMemberDeclaration", "ThisExpression", "SuperFieldAccess",
    "SuperMethodInvocation", "SuperMethodReference", "TypeMethodReference",
])
_NON_REFERENCE_SLOTS = frozenset([
    ("MethodInvocation", "method-name"),
    ("ExpressionMethodReference", "name"),
    ("SingleMemberAnnotation", "type-name"),
    ("MemberValuePair", "name"),
    ("SuperConstructorInvocation", "super-class-name"),
])

_CLASS_BODIES = ("TypeDeclaration", "EnumDeclaration", "AnnotationTypeDeclaration", "AnonymousClassDeclaration")


class _Scope:
    __slots__ = ("names", "is_class")

    def __init__(self, is_class=False):
        self.names = {}
        self.is_class = is_class


class _Resolver:
    def __init__(self):
        self.scopes = []

    def push(self, is_class=False):
        scope = _Scope(is_class)
        self.scopes.append(scope)
        return scope

    def pop(self):
        self.scopes.pop()

    def declare(self, name):
        if name is None:
            return
        if self.scopes:
            self.scopes[-1].names[name.content] = name
        name.is_variable = True
        name.binding = name

    def lookup(self, text, fields_only=False):
        for scope in reversed(self.scopes):
            if fields_only and not scope.is_class:
                continue
            found = scope.names.get(text)
            if found is not None:
                return found
            if fields_only:
                return None
        return None

    def visit(self, node):
        handler = getattr(self, "visit_" + node.kind, None)
        if handler is None:
            for c in node.children:
                self.visit(c)
        else:
            handler(node)

    def visit_all(self, nodes):
        for c in nodes:
            self.visit(c)

    # -- names --------------------------------------------------------

    def visit_SimpleName(self, node):
        parent = node.parent
        if parent is not None and (parent.kind in _NON_REFERENCE_PARENTS
                                   or (parent.kind, node.role) in _NON_REFERENCE_SLOTS):
            return
        binding = self.lookup(node.content)
        node.is_variable = binding is not None
        node.binding = binding

    def visit_FieldAccess(self, node):
        target = node.child("expression")
        name = node.child("name")
        self.visit(target)
        if target.kind == "ThisExpression" and not target.children:
            binding = self.lookup(name.content, fields_only=True)
            name.is_variable = binding is not None
            name.binding = binding

    # -- declarations -------------------------------------------------

    def _declare_and_visit(self, decl):
        for c in decl.children:
            if c.role == "name":
                self.declare(c)
            else:
                self.visit(c)

    def visit_VariableDeclarationFragment(self, node):
        self._declare_and_visit(node)

    def visit_SingleVariableDeclaration(self, node):
        self._declare_and_visit(node)

    def visit_EnumConstantDeclaration(self, node):
        for c in node.children:
            if c.role == "name":
                c.is_variable = True
                c.binding = c
            else:
                self.visit(c)

    def _class_body(self, node):
        scope = self.push(is_class=True)
        for member in node.children:
            if member.kind == "FieldDeclaration":
                for frag in member.children_with("fragment"):
                    name = frag.child("name")
                    scope.names[name.content] = name
            elif member.kind == "EnumConstantDeclaration":
                name = member.child("name")
                scope.names[name.content] = name
        self.visit_all(node.children)
        self.pop()

    visit_TypeDeclaration = _class_body
    visit_EnumDeclaration = _class_body
    visit_AnnotationTypeDeclaration = _class_body
    visit_AnonymousClassDeclaration = _class_body

    # -- scopes -------------------------------------------------------

    def _scoped(self, node):
        self.push()
        self.visit_all(node.children)
        self.pop()

    visit_MethodDeclaration = _scoped
    visit_Block = _scoped
    visit_ForStatement = _scoped
    visit_CatchClause = _scoped
    visit_LambdaExpression = _scoped

    def visit_EnhancedForStatement(self, node):
        self.visit(node.child("expression"))
        self.push()
        self.visit(node.child("parameter"))
        self.visit(node.child("body"))
        self.pop()

    def visit_TryStatement(self, node):
        self.push()
        for c in node.children:
            if c.role in ("resource", "body"):
                self.visit(c)
        self.pop()
        for c in node.children:
            if c.role not in ("resource", "body"):
                self.visit(c)

    def visit_SwitchStatement(self, node):
        self.visit(node.child("expression"))
        self.push()
        self.visit_all(node.children_with("statement"))
        self.pop()


def resolve_variables(root):
    """Set ``is_variable``/``binding`` on every SimpleName under ``root``.

    Works on a compilation unit or any subtree; when given a subtree,
    fields of enclosing types (found through parent links) are visible.
    """
    for node in root.walk():
        if node.kind == "SimpleName":
            node.is_variable = False
            node.binding = None
    resolver = _Resolver()
    enclosing = []
    p = root.parent
    while p is not None:
        if p.kind in _CLASS_BODIES:
            enclosing.append(p)
        p = p.parent
    for decl in reversed(enclosing):
        scope = resolver.push(is_class=True)
        for member in decl.children:
            if member.kind == "FieldDeclaration":
                for frag in member.children_with("fragment"):
                    name = frag.child("name")
                    scope.names[name.content] = name
            elif member.kind == "EnumConstantDeclaration":
                name = member.child("name")
                scope.names[name.content] = name
    resolver.visit(root)
    return root
