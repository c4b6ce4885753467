//!mock v8 crash:11
var t = new Int8Array(4);
t.fill(7);
assertEq(t[3], 7);
