// entente harness prelude, version 1.
// Assertion failures print one line starting with ENTENTE_ASSERT_FAIL: and throw.
var __entente = (function (global) {
  var sink = typeof global.print === "function" ? global.print
    : typeof console !== "undefined" ? function (s) { console.log(s); }
    : function () {};
  var buffered = [];
  function flush() {
    while (buffered.length > 0) {
      sink(buffered.shift());
    }
  }
  function log() {
    buffered.push(Array.prototype.join.call(arguments, " "));
    flush();
  }
  function show(v) {
    try {
      return typeof v === "string" ? JSON.stringify(v) : String(v);
    } catch (e) {
      return "<unprintable>";
    }
  }
  function fail(message) {
    flush();
    sink("ENTENTE_ASSERT_FAIL: " + message);
    throw new Error("ENTENTE_ASSERT_FAIL: " + message);
  }
  function same(a, b) {
    if (a === b) {
      return a !== 0 || 1 / a === 1 / b;
    }
    return a !== a && b !== b;
  }
  return { log: log, show: show, fail: fail, same: same };
})(this);

var print = __entente.log;

function assert(condition, message) {
  if (!condition) {
    __entente.fail(message === undefined ? "assertion failed" : String(message));
  }
}

function assertEq(actual, expected, message) {
  if (!__entente.same(actual, expected)) {
    __entente.fail("got " + __entente.show(actual) + ", expected " + __entente.show(expected) +
      (message === undefined ? "" : ": " + message));
  }
}

function assertEqArray(actual, expected, message) {
  var suffix = message === undefined ? "" : ": " + message;
  if (actual.length !== expected.length) {
    __entente.fail("length " + actual.length + ", expected " + expected.length + suffix);
  }
  for (var i = 0; i < expected.length; i++) {
    if (!__entente.same(actual[i], expected[i])) {
      __entente.fail("at index " + i + ": got " + __entente.show(actual[i]) +
        ", expected " + __entente.show(expected[i]) + suffix);
    }
  }
}

function assertThrowsInstanceOf(fn, ctor, message) {
  var suffix = message === undefined ? "" : ": " + message;
  try {
    fn();
  } catch (e) {
    if (e instanceof ctor) {
      return;
    }
    __entente.fail("expected " + ctor.name + ", got " + __entente.show(e) + suffix);
  }
  __entente.fail("expected " + ctor.name + ", nothing was thrown" + suffix);
}

function getPromiseResult(promise) {
  return undefined;
}

function drainMicrotasks() {}
