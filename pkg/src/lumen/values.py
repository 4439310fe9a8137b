"""Guest value model.

Primitive variants map onto host types: integer -> int, string -> str,
boolean -> bool, nil -> None. Symbols, objects, classes, block closures and
method handles get small wrapper classes. Identity for handles is host
object identity; the numeric handle on objects exists for display and the
wire protocol only.

Note the bool-before-int ordering in every variant check: Python bools are
ints, guest booleans and integers are distinct variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Symbol:
    name: str

    def __str__(self) -> str:
        return "#" + self.name


class GuestClass:
    """A class reified as a guest value. Immutable once compiled."""

    def __init__(self, name: str, superclass: "GuestClass | None", field_names: tuple):
        self.name = name
        self.superclass = superclass
        self.own_fields = tuple(field_names)
        self.methods: dict = {}          # selector -> CompiledMethod
        inherited = superclass.all_fields if superclass else ()
        self.all_fields = inherited + self.own_fields
        self.field_slots = {n: i for i, n in enumerate(self.all_fields)}

    def lineage(self):
        cls = self
        while cls is not None:
            yield cls
            cls = cls.superclass

    def descends_from(self, other: "GuestClass") -> bool:
        return any(c is other for c in self.lineage())

    def __repr__(self) -> str:
        return f"<class {self.name}>"


class GuestObject:
    """Instance with declared field slots plus optional builtin storage."""

    __slots__ = ("cls", "handle", "fields", "store")

    def __init__(self, cls: GuestClass, handle: int):
        self.cls = cls
        self.handle = handle
        self.fields = [None] * len(cls.all_fields)
        self.store = None  # list for collections, assoc list for dictionaries

    def field_named(self, name: str):
        return self.fields[self.cls.field_slots[name]]

    def set_field(self, name: str, value):
        self.fields[self.cls.field_slots[name]] = value

    def __repr__(self) -> str:
        return f"<a {self.cls.name} #{self.handle}>"


class BlockClosure:
    """A block value: compiled body plus the captured home method frame."""

    __slots__ = ("method", "home_frame")

    def __init__(self, method, home_frame):
        self.method = method
        self.home_frame = home_frame

    def __repr__(self) -> str:
        return f"<block {self.method.display_name()}>"


class MethodHandle:
    """Reified compiled method, one shared handle per method object."""

    __slots__ = ("method",)

    def __init__(self, method):
        self.method = method

    def __repr__(self) -> str:
        return f"<method {self.method.display_name()}>"


def method_handle(method) -> MethodHandle:
    """The canonical handle for a compiled method (cached on the method)."""
    h = getattr(method, "_handle", None)
    if h is None:
        h = MethodHandle(method)
        method._handle = h
    return h


class HostBridge:
    """Base for host-implemented guest objects (debugger views, node proxies).

    Subclasses answer a fixed selector set host-side; everything else falls
    through to normal dispatch on their guest class.
    """

    guest_class_name = "Object"

    def can_handle(self, selector: str) -> bool:
        raise NotImplementedError

    def handle(self, selector: str, args: list, state):
        raise NotImplementedError


def variant_of(value) -> str:
    if value is None:
        return "nil"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, str):
        return "string"
    if isinstance(value, Symbol):
        return "symbol"
    if isinstance(value, BlockClosure):
        return "block"
    if isinstance(value, GuestClass):
        return "class"
    if isinstance(value, MethodHandle):
        return "method"
    if isinstance(value, (GuestObject, HostBridge)):
        return "object"
    raise TypeError(f"not a guest value: {value!r}")


def guest_equals(a, b) -> bool:
    """Built-in equality: value plus variant for primitives, identity otherwise."""
    va = variant_of(a)
    if va != variant_of(b):
        return False
    if va in ("nil", "boolean", "integer", "string", "symbol"):
        return a == b
    return a is b


def guest_identical(a, b) -> bool:
    va = variant_of(a)
    if va in ("nil", "boolean", "integer", "string", "symbol"):
        return va == variant_of(b) and a == b
    return a is b
