function assert(mustBeTrue, message) {
  if (mustBeTrue === true) {
    return;
  }
  if (message === undefined) {
    message = "Expected true but got " + String(mustBeTrue);
  }
  throw new Test262Error(message);
}

assert._isSameValue = function (a, b) {
  if (a === b) {
    return a !== 0 || 1 / a === 1 / b;
  }
  return a !== a && b !== b;
};

assert.sameValue = function (actual, expected, message) {
  if (assert._isSameValue(actual, expected)) {
    return;
  }
  throw new Test262Error((message ? message + " " : "") +
    "Expected SameValue(«" + String(actual) + "», «" + String(expected) + "») to be true");
};

assert.notSameValue = function (actual, unexpected, message) {
  if (!assert._isSameValue(actual, unexpected)) {
    return;
  }
  throw new Test262Error((message ? message + " " : "") +
    "Expected «" + String(actual) + "» to be different from «" + String(unexpected) + "»");
};

assert.throws = function (expectedErrorConstructor, func, message) {
  try {
    func();
  } catch (thrown) {
    if (thrown === null || typeof thrown !== "object" || thrown.constructor !== expectedErrorConstructor) {
      throw new Test262Error("Expected a " + expectedErrorConstructor.name + " to be thrown");
    }
    return;
  }
  throw new Test262Error("Expected a " + expectedErrorConstructor.name + " but no exception was thrown");
};
