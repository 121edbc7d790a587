"""Pre-order linearization of syntax trees into token events."""

import json
from dataclasses import dataclass

from .filters import DEFAULT_RULES, NodeClass, classify


@dataclass(frozen=True, slots=True)
class TokenEvent:
    text: str
    is_content: bool
    node_class: NodeClass = NodeClass.NOT_SIMPLE_NAME
    is_variable: bool = False
    function_id: str = ""
    position: int = 0
    parent_kind: str = ""

    def __post_init__(self):
        if self.is_variable and self.node_class is not NodeClass.CARED:
            raise ValueError("only cared tokens can be variables")
        if self.node_class is not NodeClass.NOT_SIMPLE_NAME and not self.is_content:
            raise ValueError("SimpleName classes apply to content tokens only")

    @property
    def is_cared(self):
        return self.node_class is NodeClass.CARED

    def to_json(self):
        return {
            "fn": self.function_id,
            "pos": self.position,
            "text": self.text,
            "content": self.is_content,
            "class": self.node_class.value,
            "var": self.is_variable,
            "parent": self.parent_kind,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            text=obj["text"],
            is_content=obj["content"],
            node_class=NodeClass(obj["class"]),
            is_variable=obj["var"],
            function_id=obj["fn"],
            position=obj["pos"],
            parent_kind=obj.get("parent", ""),
        )


def type_token(node):
    if node.operator and node.kind in ("InfixExpression", "Assignment", "PrefixExpression", "PostfixExpression"):
        return f"{node.kind}:{node.operator}"
    return node.kind


def linearize(root, function_id="", rules=DEFAULT_RULES):
    """Flatten a subtree in pre-order.

    Internal nodes emit one type token. Content leaves emit their type
    token followed by a content token, which carries the node class and
    variable mark.
    """
    events = []
    stack = [root]
    while stack:
        node = stack.pop()
        parent = node.parent
        parent_kind = parent.kind if parent is not None else ""
        events.append(TokenEvent(type_token(node), False, function_id=function_id,
                                 position=len(events), parent_kind=parent_kind))
        if node.is_leaf:
            cls = classify(node, parent, rules)
            events.append(TokenEvent(
                node.content,
                True,
                node_class=cls,
                is_variable=bool(node.is_variable) and cls is NodeClass.CARED,
                function_id=function_id,
                position=len(events),
                parent_kind=parent_kind,
            ))
        else:
            stack.extend(reversed(node.children))
    return events


def dumps_events(events):
    return "".join(json.dumps(e.to_json(), ensure_ascii=False) + "\n" for e in events)


def loads_events(text):
    return [TokenEvent.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]
