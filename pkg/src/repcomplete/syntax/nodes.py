"""AST node type mirroring the Eclipse JDT DOM node kinds."""

# Nodes of these kinds carry text content and never have children.
CONTENT_KINDS = frozenset([
    "SimpleName",
    "NumberLiteral",
    "StringLiteral",
    "TextBlock",
    "CharacterLiteral",
    "BooleanLiteral",
    "PrimitiveType",
    "Modifier",
])

# Assigned to nodes built outside the parser whose kind is not modelled.
CATCH_ALL_KIND = "OtherNode"

NODE_KINDS = frozenset("""
    CompilationUnit PackageDeclaration ImportDeclaration TypeDeclaration
    EnumDeclaration EnumConstantDeclaration AnnotationTypeDeclaration
    AnnotationTypeMemberDeclaration AnonymousClassDeclaration FieldDeclaration
    MethodDeclaration Initializer SingleVariableDeclaration
    VariableDeclarationFragment VariableDeclarationStatement
    VariableDeclarationExpression TypeParameter MarkerAnnotation
    NormalAnnotation SingleMemberAnnotation MemberValuePair SimpleType
    QualifiedType ParameterizedType ArrayType WildcardType UnionType
    IntersectionType Dimension QualifiedName Block ExpressionStatement
    IfStatement ForStatement EnhancedForStatement WhileStatement DoStatement
    ReturnStatement BreakStatement ContinueStatement ThrowStatement
    TryStatement CatchClause SwitchStatement SwitchCase SynchronizedStatement
    LabeledStatement EmptyStatement AssertStatement TypeDeclarationStatement
    ConstructorInvocation SuperConstructorInvocation Assignment
    InfixExpression PrefixExpression PostfixExpression ConditionalExpression
    InstanceofExpression CastExpression ParenthesizedExpression
    MethodInvocation SuperMethodInvocation FieldAccess SuperFieldAccess
    ThisExpression ClassInstanceCreation ArrayCreation ArrayInitializer
    ArrayAccess TypeLiteral LambdaExpression ExpressionMethodReference
    TypeMethodReference SuperMethodReference CreationReference NullLiteral
""".split()) | CONTENT_KINDS | {CATCH_ALL_KIND}


class AstNode:
    """One syntax tree node.

    ``role`` names the structural slot the node occupies in its parent
    (``"method-name"``, ``"receiver"``, ``"argument"``, ``"super-class-name"``,
    ``"name"``, ``"type"``, ...). ``start``/``end`` are character offsets
    into the parsed source.
    """

    __slots__ = ("kind", "children", "content", "role", "start", "end",
                 "operator", "parent", "is_variable", "binding")

    def __init__(self, kind, content=None, role="", start=0, end=0, operator=None):
        self.kind = kind
        self.children = []
        self.content = content
        self.role = role
        self.start = start
        self.end = end
        self.operator = operator
        self.parent = None
        self.is_variable = False
        self.binding = None  # declaring SimpleName, set by resolve_variables

    @property
    def is_leaf(self):
        return self.kind in CONTENT_KINDS

    def add(self, role, child):
        if child is None:
            return None
        if self.is_leaf:
            raise ValueError(f"{self.kind} nodes cannot have children")
        child.role = role
        child.parent = self
        self.children.append(child)
        return child

    def child(self, role):
        for c in self.children:
            if c.role == role:
                return c
        return None

    def children_with(self, role):
        return [c for c in self.children if c.role == role]

    def walk(self):
        """Pre-order iteration over the subtree."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def __repr__(self):
        if self.content is not None:
            return f"{self.kind}({self.content!r})"
        return f"{self.kind}[{len(self.children)}]"


def leaf(kind, content, role=""):
    return AstNode(kind, content=content, role=role)


def internal(kind, *children, operator=None):
    """Build an internal node from ``(role, child)`` pairs (handy in tests)."""
    node = AstNode(kind, operator=operator)
    for role, c in children:
        node.add(role, c)
    return node
