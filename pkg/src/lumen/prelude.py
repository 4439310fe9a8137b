'''Built-in classes, written in the guest language itself.

Control flow (ifTrue:, whileTrue:, do:, on:do:, ...) is ordinary message
sending of block values, so the debugger can step into it like any user
code. Only operations that genuinely need the host — arithmetic, storage
cells, output, signalling — are primitives, registered host-side against
(class name, selector) pairs and reached when method lookup finds no guest
method at that class.

The prelude is compiled once per process and shared by every program (see
compiler.shared_prelude), which is what makes a class or method object
obtained in one execution identical to the "same" one in the next.
'''

PRELUDE_SOURCE = r"""
class Object {
  method isNil { ^false }
  method notNil { ^true }
  method yourself { ^self }
  method species { ^self class }
  method isMemberOf: aClass { ^self class == aClass }
  method ~= anObject { ^(self = anObject) not }
  method ~~ anObject { ^(self == anObject) not }
  method ifNil: aBlock { ^self }
  method ifNotNil: aBlock { ^aBlock cull: self }
  method error: aString {
    | err |
    err := Error new.
    err signal: aString
  }
  method doesNotUnderstand: aMessage {
    | err |
    err := MessageNotUnderstood new.
    err setReceiver: self message: aMessage.
    err signal
  }
}

class UndefinedObject {
  method isNil { ^true }
  method notNil { ^false }
  method ifNil: aBlock { ^aBlock value }
  method ifNotNil: aBlock { ^nil }
}

class Boolean { }

class True extends Boolean {
  method ifTrue: aBlock { ^aBlock value }
  method ifFalse: aBlock { ^nil }
  method ifTrue: trueBlock ifFalse: falseBlock { ^trueBlock value }
  method ifFalse: falseBlock ifTrue: trueBlock { ^trueBlock value }
  method not { ^false }
  method and: aBlock { ^aBlock value }
  method or: aBlock { ^true }
  method & aBoolean { ^aBoolean }
}

class False extends Boolean {
  method ifTrue: aBlock { ^nil }
  method ifFalse: aBlock { ^aBlock value }
  method ifTrue: trueBlock ifFalse: falseBlock { ^falseBlock value }
  method ifFalse: falseBlock ifTrue: trueBlock { ^falseBlock value }
  method not { ^true }
  method and: aBlock { ^false }
  method or: aBlock { ^aBlock value }
  method & aBoolean { ^false }
}

class Integer {
  method timesRepeat: aBlock {
    | i |
    i := 0.
    [ i < self ] whileTrue: [ aBlock value. i := i + 1 ]
  }
  method to: stop do: aBlock {
    | i |
    i := self.
    [ i <= stop ] whileTrue: [ aBlock value: i. i := i + 1 ]
  }
  method max: other { self > other ifTrue: [ ^self ]. ^other }
  method min: other { self < other ifTrue: [ ^self ]. ^other }
  method between: lo and: hi { ^(self >= lo) & (self <= hi) }
  method abs { self < 0 ifTrue: [ ^0 - self ]. ^self }
  method negated { ^0 - self }
  method isZero { ^self = 0 }
  method even { ^self \\ 2 = 0 }
  method odd { ^self even not }
}

class String {
  method isEmpty { ^self size = 0 }
  method notEmpty { ^self size > 0 }
}

class Symbol { }

class Block {
  method cull: anObject {
    self numArgs = 0 ifTrue: [ ^self value ].
    ^self value: anObject
  }
  method whileTrue: aBlock {
    self value ifTrue: [ aBlock value. ^self whileTrue: aBlock ].
    ^nil
  }
  method whileFalse: aBlock {
    self value ifFalse: [ aBlock value. ^self whileFalse: aBlock ].
    ^nil
  }
}

class Exception {
  fields messageText.
  method messageText { ^messageText }
  method messageText: aString { messageText := aString }
  method signal: aString {
    messageText := aString.
    self signal
  }
  method description {
    messageText isNil ifTrue: [ ^self class name , ' signaled' ].
    ^messageText
  }
}

class Error extends Exception { }

class ZeroDivide extends Error { }

class BlockCannotReturn extends Error { }

class FileAlreadyOpen extends Error { }

class Message {
  fields selector arguments.
  method selector { ^selector }
  method arguments { ^arguments }
  method setSelector: aSymbol arguments: anArray {
    selector := aSymbol.
    arguments := anArray
  }
}

class MessageNotUnderstood extends Error {
  fields receiver message.
  method receiver { ^receiver }
  method message { ^message }
  method setReceiver: anObject message: aMessage {
    receiver := anObject.
    message := aMessage.
    messageText := 'doesNotUnderstand: #' , aMessage selector asString
  }
}

class Collection {
  method do: aBlock {
    | i |
    i := 1.
    [ i <= self size ] whileTrue: [ aBlock value: (self at: i). i := i + 1 ]
  }
  method collect: aBlock {
    | result |
    result := self species new.
    self do: [ :each | result add: (aBlock value: each) ].
    ^result
  }
  method select: aBlock {
    | result |
    result := self species new.
    self do: [ :each | (aBlock value: each) ifTrue: [ result add: each ] ].
    ^result
  }
  method anySatisfy: aBlock {
    self do: [ :each | (aBlock value: each) ifTrue: [ ^true ] ].
    ^false
  }
  method includes: anObject { ^self anySatisfy: [ :each | each = anObject ] }
  method detect: aBlock ifNone: noneBlock {
    self do: [ :each | (aBlock value: each) ifTrue: [ ^each ] ].
    ^noneBlock value
  }
  method inject: initialValue into: aBlock {
    | acc |
    acc := initialValue.
    self do: [ :each | acc := aBlock value: acc value: each ].
    ^acc
  }
  method isEmpty { ^self size = 0 }
  method notEmpty { ^self size > 0 }
  method first { ^self at: 1 }
  method last { ^self at: self size }
}

class OrderedCollection extends Collection {
  method addAll: aCollection {
    aCollection do: [ :each | self add: each ].
    ^aCollection
  }
}

class Array extends Collection {
  "Fixed size: at:put: only. collect: preserves the class without add:."
  method collect: aBlock {
    | result i |
    result := Array new: self size.
    i := 1.
    [ i <= self size ] whileTrue: [
      result at: i put: (aBlock value: (self at: i)).
      i := i + 1 ].
    ^result
  }
}

class CallStack extends OrderedCollection {
  "Answered by a debugger's stack; copying snapshots every context."
  method copy { ^self collect: [ :ctx | ctx copy ] }
}

class Dictionary {
  method at: key { ^self at: key ifAbsent: [ self error: 'key not found' ] }
  method at: key ifAbsent: aBlock {
    (self includesKey: key) ifTrue: [ ^self basicAt: key ].
    ^aBlock value
  }
  method at: key ifPresent: presentBlock ifAbsentPut: absentBlock {
    (self includesKey: key) ifTrue: [ | v |
      v := self basicAt: key.
      presentBlock cull: v.
      ^v ].
    ^self at: key put: absentBlock value
  }
  method isEmpty { ^self size = 0 }
  method notEmpty { ^self size > 0 }
}

class TranscriptStream {
  method showln: aString {
    self show: aString.
    self cr
  }
}

class File {
  "An in-memory stand-in: open marks a flag, opening twice signals."
  fields name openFlag.
  method setName: aString {
    name := aString.
    openFlag := false
  }
  method name { ^name }
  method isOpen { ^openFlag = true }
  method open {
    self isOpen ifTrue: [ | err |
      err := FileAlreadyOpen new.
      err signal: 'file already open: ' , name ].
    openFlag := true
  }
  method close { openFlag := false }
}

class Random {
  "Deterministic linear congruential generator."
  fields state.
  method setSeed: anInteger { state := anInteger \\ 2147483648 }
  method next {
    state := ((state * 1103515245) + 12345) \\ 2147483648.
    ^state
  }
  method nextInt: n { ^(self next \\ n) + 1 }
}

class Class { }

class CompiledMethod { }

class Debugger { }

class Context { }

class SyntaxNode { }

class NodeVisitor {
  method visitProgramNode: aNode { ^nil }
  method visitClassNode: aNode { ^nil }
  method visitMethodNode: aNode { ^nil }
  method visitBlockNode: aNode { ^nil }
  method visitSequenceNode: aNode { ^nil }
  method visitReturnNode: aNode { ^nil }
  method visitAssignmentNode: aNode { ^nil }
  method visitMessageNode: aNode { ^nil }
  method visitVariableNode: aNode { ^nil }
  method visitLiteralNode: aNode { ^nil }
  method visitTempDeclNode: aNode { ^nil }
  method visitSelfNode: aNode { ^nil }
}

class Breakpoint { }

class Watch { }

class Hit { }
"""
