"""Which SimpleName leaves the repetition head predicts ("cared" nodes).

A SimpleName is dropped when its (parent kind, role in parent) matches
one of the rules below; every other SimpleName is cared. Rules consult
nothing but those two attributes.
"""

from dataclasses import dataclass
from enum import Enum


class NodeClass(str, Enum):
    NOT_SIMPLE_NAME = "not-sn"
    FILTERED = "filtered"
    CARED = "cared"


@dataclass(frozen=True)
class FilterRule:
    parent_kind: str
    roles: frozenset = None  # None matches any child
    condition: str = "null"

    def matches(self, parent_kind, role):
        return parent_kind == self.parent_kind and (self.roles is None or role in self.roles)


class FilterRuleSet:
    def __init__(self, rules):
        self.rules = tuple(rules)
        self._by_parent = {}
        for rule in self.rules:
            self._by_parent.setdefault(rule.parent_kind, []).append(rule)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def matches(self, parent_kind, role):
        return any(r.matches(parent_kind, role) for r in self._by_parent.get(parent_kind, ()))


DEFAULT_RULES = FilterRuleSet([
    FilterRule("ContinueStatement"),
    FilterRule("SimpleType"),
    FilterRule("TypeParameter"),
    FilterRule("MarkerAnnotation"),
    FilterRule("NormalAnnotation"),
    FilterRule("MemberValuePair"),
    FilterRule("QualifiedType"),
    FilterRule("QualifiedName"),
    FilterRule("MethodDeclaration"),
    FilterRule("LabeledStatement"),
    FilterRule("BreakStatement"),
    FilterRule("ExpressionMethodReference"),
    FilterRule("SwitchCase"),
    FilterRule("MethodInvocation", frozenset({"method-name"}), "Node is method name"),
    FilterRule("SuperConstructorInvocation", frozenset({"super-class-name"}), "Node is super class"),
    FilterRule("SuperMethodInvocation", frozenset({"method-name", "super-class-name"}),
               "Node is method name or super class"),
])


def classify(node, parent=None, rules=DEFAULT_RULES):
    """Return the NodeClass of a leaf given its parent."""
    if node.kind != "SimpleName":
        return NodeClass.NOT_SIMPLE_NAME
    parent = parent if parent is not None else node.parent
    parent_kind = parent.kind if parent is not None else ""
    if rules.matches(parent_kind, node.role):
        return NodeClass.FILTERED
    return NodeClass.CARED
