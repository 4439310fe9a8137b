"""Canonical, order-stable rendering of guest values.

canonical_form produces a deterministic one-line text for a whole object
graph: depth-first, fields in declared order, collections as Class[items],
dictionaries as key -> value pairs, and shared or cyclic references as @N
back-references where N is the first-visit number of the object. Two runs
that build equivalent heaps render identically, which is what the
differential tests compare.

preview is the shallow, size-capped variant used for display.
"""

from __future__ import annotations

from .values import (BlockClosure, GuestClass, GuestObject, HostBridge,
                     MethodHandle, Symbol, variant_of)


def _scalar(value) -> str:
    v = variant_of(value)
    if v == "nil":
        return "nil"
    if v == "boolean":
        return "true" if value else "false"
    if v == "integer":
        return str(value)
    if v == "string":
        return "'" + value.replace("'", "''") + "'"
    if v == "symbol":
        return "#" + value.name
    if v == "class":
        return value.name
    if v == "method":
        return value.method.display_name()
    if v == "block":
        return "<block>"
    return None


def _is_sequence(obj: GuestObject, classes: dict) -> bool:
    if obj.store is None:
        return False
    dictionary = classes.get("Dictionary")
    return dictionary is None or not obj.cls.descends_from(dictionary)


def canonical_form(value, classes: dict) -> str:
    """classes: the class table (execution.classes), used to tell
    dictionaries apart from sequence-like collections."""
    seen: dict = {}

    def render(v) -> str:
        scalar = _scalar(v)
        if scalar is not None:
            return scalar
        if isinstance(v, HostBridge):
            return f"<{v.guest_class_name}>"
        assert isinstance(v, GuestObject)
        if id(v) in seen:
            return f"@{seen[id(v)]}"
        seen[id(v)] = len(seen)
        name = v.cls.name
        if v.store is not None:
            if _is_sequence(v, classes):
                return name + "[" + ", ".join(render(x) for x in v.store) + "]"
            pairs = ", ".join(f"{render(k)} -> {render(val)}" for k, val in v.store)
            return name + "[" + pairs + "]"
        body = ", ".join(f"{f}={render(v.fields[i])}"
                         for i, f in enumerate(v.cls.all_fields))
        return name + "{" + body + "}"

    return render(value)


def preview(value, classes: dict, limit: int = 120) -> str:
    """One-level rendering for UIs: nested objects appear as class names."""

    def shallow(v) -> str:
        scalar = _scalar(v)
        if scalar is not None:
            return scalar
        if isinstance(v, HostBridge):
            return f"<{v.guest_class_name}>"
        name = v.cls.name
        article = "an" if name[0] in "AEIOU" else "a"
        return f"{article} {name}"

    scalar = _scalar(value)
    if scalar is not None:
        text = scalar
    elif isinstance(value, HostBridge):
        text = f"<{value.guest_class_name}>"
    else:
        name = value.cls.name
        if value.store is not None:
            if _is_sequence(value, classes):
                text = name + "[" + ", ".join(shallow(x) for x in value.store) + "]"
            else:
                pairs = ", ".join(f"{shallow(k)} -> {shallow(v)}"
                                  for k, v in value.store)
                text = name + "[" + pairs + "]"
        elif value.cls.all_fields:
            body = ", ".join(f"{f}={shallow(value.fields[i])}"
                             for i, f in enumerate(value.cls.all_fields))
            text = name + "{" + body + "}"
        else:
            text = shallow(value)
    if len(text) > limit:
        text = text[:limit - 1] + "…"
    return text
