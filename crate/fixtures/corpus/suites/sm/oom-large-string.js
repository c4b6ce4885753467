//!mock sm oom
var s = "x";
assertEq(s.length, 1);
