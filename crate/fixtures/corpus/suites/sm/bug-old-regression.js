//!mock sm assert-fail:got 2, expected 3
var x = 1 + 1;
assertEq(x, 2);
