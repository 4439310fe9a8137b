"""Host primitives, keyed by (class name, selector).

Method lookup walks the receiver's class lineage checking guest methods
first, then this table, at each class. Primitives either answer a value,
answer PUSHED after pushing a frame themselves (block invocation), or raise
GuestError / SignalRequest, which the send dispatch turns into the guest
exception machinery — so a primitive failure is an ordinary, handleable
guest exception, not a host crash.
"""

from __future__ import annotations

import re

from .values import (BlockClosure, GuestClass, GuestObject, MethodHandle,
                     Symbol, guest_equals, guest_identical, method_handle,
                     variant_of)

# Answered by primitives that pushed a frame instead of producing a value.
PUSHED = object()


class GuestError(Exception):
    """Raise inside a primitive to signal a named guest exception."""

    def __init__(self, class_name: str, message: str):
        super().__init__(message)
        self.class_name = class_name
        self.message = message


class SignalRequest(Exception):
    """Raised by the signal primitive: run the handler search for this object."""

    def __init__(self, exc_obj):
        super().__init__("signal")
        self.exc_obj = exc_obj


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GuestError("Error", f"{what} expects an integer")
    return value


def _str(value, what: str) -> str:
    if not isinstance(value, str):
        raise GuestError("Error", f"{what} expects a string")
    return value


def _index(store, value, what: str) -> int:
    i = _int(value, what)
    if not 1 <= i <= len(store):
        raise GuestError("Error", f"index {i} out of bounds for size {len(store)}")
    return i - 1


def _block(value, what: str) -> BlockClosure:
    if not isinstance(value, BlockClosure):
        raise GuestError("Error", f"{what} expects a block")
    return value


# Rendering ------------------------------------------------------------------

def print_string(vm, value) -> str:
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
    if v == "block":
        return "a Block"
    if v == "method":
        return value.method.display_name()
    name = vm.class_of(value).name
    article = "an" if name[0] in "AEIOU" else "a"
    return f"{article} {name}"


def as_string(vm, value) -> str:
    v = variant_of(value)
    if v == "string":
        return value
    if v == "symbol":
        return value.name
    return print_string(vm, value)


def _glob_to_regex(pattern: str) -> str:
    # '*' matches any run, '#' any single character
    parts = []
    for ch in pattern:
        if ch == "*":
            parts.append(".*")
        elif ch == "#":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return "".join(parts)


# Primitive bodies -----------------------------------------------------------
# Each takes (vm, frame, receiver, args); frame is the sending frame, whose
# pc has already moved past the send.

def _obj_eq(vm, frame, recv, args):
    return guest_equals(recv, args[0])


def _obj_identical(vm, frame, recv, args):
    return guest_identical(recv, args[0])


def _obj_class(vm, frame, recv, args):
    return vm.class_of(recv)


def _obj_is_kind_of(vm, frame, recv, args):
    if not isinstance(args[0], GuestClass):
        raise GuestError("Error", "isKindOf: expects a class")
    return vm.class_of(recv).descends_from(args[0])


def _obj_print_string(vm, frame, recv, args):
    return print_string(vm, recv)


def _obj_as_string(vm, frame, recv, args):
    return as_string(vm, recv)


def _int_binary(fn):
    def prim(vm, frame, recv, args):
        a = _int(recv, "integer arithmetic")
        b = _int(args[0], "integer arithmetic")
        return fn(a, b)
    return prim


def _int_div(vm, frame, recv, args):
    a = _int(recv, "/")
    b = _int(args[0], "/")
    if b == 0:
        raise GuestError("ZeroDivide", "division by zero")
    q = abs(a) // abs(b)  # truncate toward zero
    return q if (a >= 0) == (b >= 0) else -q


def _int_mod(vm, frame, recv, args):
    a = _int(recv, "\\\\")
    b = _int(args[0], "\\\\")
    if b == 0:
        raise GuestError("ZeroDivide", "division by zero")
    return a % b


def _str_concat(vm, frame, recv, args):
    return recv + _str(args[0], "',' concatenation")


def _str_size(vm, frame, recv, args):
    return len(recv)


def _str_at(vm, frame, recv, args):
    return recv[_index(recv, args[0], "at:")]


def _str_lt(vm, frame, recv, args):
    return recv < _str(args[0], "'<'")


def _str_gt(vm, frame, recv, args):
    return recv > _str(args[0], "'>'")


def _str_includes(vm, frame, recv, args):
    return _str(args[0], "includesSubstring:") in recv


def _str_as_symbol(vm, frame, recv, args):
    return Symbol(recv)


def _str_match(vm, frame, recv, args):
    # symbols double as match targets (selector filtering)
    target = args[0].name if isinstance(args[0], Symbol) else _str(args[0], "match:")
    return re.fullmatch(_glob_to_regex(recv), target) is not None


def _block_value(vm, frame, recv, args):
    if recv.method.num_args != len(args):
        raise GuestError("Error", f"block expects {recv.method.num_args} "
                                  f"arguments, got {len(args)}")
    vm.push_block_frame(recv, list(args), sender=frame)
    return PUSHED


def _block_num_args(vm, frame, recv, args):
    return recv.method.num_args


def _block_on_do(vm, frame, recv, args):
    exc_class, handler = args
    if not isinstance(exc_class, GuestClass):
        raise GuestError("Error", "on:do: expects an exception class")
    if not exc_class.descends_from(vm.classes["Exception"]):
        raise GuestError("Error", "on:do: expects an Exception subclass")
    handler = _block(handler, "on:do:")
    if handler.method.num_args > 1:
        raise GuestError("Error", "on:do: handler takes at most one argument")
    if recv.method.num_args != 0:
        raise GuestError("Error", "on:do: receiver block takes no arguments")
    protected = vm.push_block_frame(recv, [], sender=frame)
    protected.handler = (exc_class, handler)
    return PUSHED


def _exc_signal(vm, frame, recv, args):
    if not isinstance(recv, GuestObject) or \
            not recv.cls.descends_from(vm.classes["Exception"]):
        raise GuestError("Error", "signal sent to a non-exception")
    raise SignalRequest(recv)


def _coll_store(recv, what: str) -> list:
    if not isinstance(recv, GuestObject) or recv.store is None:
        raise GuestError("Error", f"{what} sent to a malformed collection")
    return recv.store


def _oc_add(vm, frame, recv, args):
    _coll_store(recv, "add:").append(args[0])
    return args[0]


def _seq_at(vm, frame, recv, args):
    store = _coll_store(recv, "at:")
    return store[_index(store, args[0], "at:")]


def _seq_at_put(vm, frame, recv, args):
    store = _coll_store(recv, "at:put:")
    store[_index(store, args[0], "at:put:")] = args[1]
    return args[1]


def _seq_size(vm, frame, recv, args):
    return len(_coll_store(recv, "size"))


def _dict_find(store, key):
    for pair in store:
        if guest_equals(pair[0], key):
            return pair
    return None


def _dict_at_put(vm, frame, recv, args):
    store = _coll_store(recv, "at:put:")
    pair = _dict_find(store, args[0])
    if pair is None:
        store.append([args[0], args[1]])
    else:
        pair[1] = args[1]
    return args[1]


def _dict_basic_at(vm, frame, recv, args):
    pair = _dict_find(_coll_store(recv, "basicAt:"), args[0])
    return None if pair is None else pair[1]


def _dict_includes_key(vm, frame, recv, args):
    return _dict_find(_coll_store(recv, "includesKey:"), args[0]) is not None


def _dict_size(vm, frame, recv, args):
    return len(_coll_store(recv, "size"))


def _transcript_show(vm, frame, recv, args):
    vm.write_output(_str(args[0], "show:"))
    return recv


def _transcript_cr(vm, frame, recv, args):
    vm.write_output("\n")
    return recv


def _class_new(vm, frame, recv, args):
    return vm.instantiate(recv)


def _class_new_sized(vm, frame, recv, args):
    n = _int(args[0], "new:")
    if n < 0:
        raise GuestError("Error", "new: expects a non-negative size")
    obj = vm.instantiate(recv)
    if obj.store is not None and recv.descends_from(vm.classes["Array"]):
        obj.store.extend([None] * n)
    return obj


def _class_name(vm, frame, recv, args):
    return recv.name


def _class_superclass(vm, frame, recv, args):
    return recv.superclass


def _class_method_named(vm, frame, recv, args):
    sel = args[0]
    if isinstance(sel, Symbol):
        sel = sel.name
    sel = _str(sel, "methodNamed:")
    for cls in recv.lineage():
        if sel in cls.methods:
            return method_handle(cls.methods[sel])
    return None


def _method_eq(vm, frame, recv, args):
    other = args[0]
    if isinstance(other, BlockClosure):
        # a method handle equals a closure when it is that block's body
        return recv.method is other.method
    if not isinstance(other, MethodHandle):
        return False
    # a block body counts as the method it appears in
    return recv.method.home_method is other.method.home_method


def _method_selector(vm, frame, recv, args):
    return Symbol(recv.method.selector)


def _method_name(vm, frame, recv, args):
    return recv.method.display_name()


PRIMITIVES = {
    ("Object", "="): _obj_eq,
    ("Object", "=="): _obj_identical,
    ("Object", "class"): _obj_class,
    ("Object", "isKindOf:"): _obj_is_kind_of,
    ("Object", "printString"): _obj_print_string,
    ("Object", "asString"): _obj_as_string,

    ("Integer", "+"): _int_binary(lambda a, b: a + b),
    ("Integer", "-"): _int_binary(lambda a, b: a - b),
    ("Integer", "*"): _int_binary(lambda a, b: a * b),
    ("Integer", "/"): _int_div,
    ("Integer", "\\\\"): _int_mod,
    ("Integer", "<"): _int_binary(lambda a, b: a < b),
    ("Integer", "<="): _int_binary(lambda a, b: a <= b),
    ("Integer", ">"): _int_binary(lambda a, b: a > b),
    ("Integer", ">="): _int_binary(lambda a, b: a >= b),

    ("String", ","): _str_concat,
    ("String", "size"): _str_size,
    ("String", "at:"): _str_at,
    ("String", "<"): _str_lt,
    ("String", ">"): _str_gt,
    ("String", "includesSubstring:"): _str_includes,
    ("String", "asSymbol"): _str_as_symbol,
    ("String", "match:"): _str_match,

    ("Block", "value"): _block_value,
    ("Block", "value:"): _block_value,
    ("Block", "value:value:"): _block_value,
    ("Block", "value:value:value:"): _block_value,
    ("Block", "numArgs"): _block_num_args,
    ("Block", "on:do:"): _block_on_do,

    ("Exception", "signal"): _exc_signal,

    ("OrderedCollection", "add:"): _oc_add,
    ("OrderedCollection", "at:"): _seq_at,
    ("OrderedCollection", "at:put:"): _seq_at_put,
    ("OrderedCollection", "size"): _seq_size,

    ("Array", "at:"): _seq_at,
    ("Array", "at:put:"): _seq_at_put,
    ("Array", "size"): _seq_size,

    ("Dictionary", "at:put:"): _dict_at_put,
    ("Dictionary", "basicAt:"): _dict_basic_at,
    ("Dictionary", "includesKey:"): _dict_includes_key,
    ("Dictionary", "size"): _dict_size,

    ("TranscriptStream", "show:"): _transcript_show,
    ("TranscriptStream", "cr"): _transcript_cr,

    ("Class", "new"): _class_new,
    ("Class", "new:"): _class_new_sized,
    ("Class", "name"): _class_name,
    ("Class", "superclass"): _class_superclass,
    ("Class", "methodNamed:"): _class_method_named,

    ("CompiledMethod", "="): _method_eq,
    ("CompiledMethod", "selector"): _method_selector,
    ("CompiledMethod", "name"): _method_name,
}
