function compareArray(a, b) {
  if (b.length !== a.length) {
    return false;
  }
  for (var i = 0; i < a.length; i++) {
    if (!assert._isSameValue(b[i], a[i])) {
      return false;
    }
  }
  return true;
}

assert.compareArray = function (actual, expected, message) {
  assert(compareArray(actual, expected), message || "Expected arrays to have the same contents");
};
