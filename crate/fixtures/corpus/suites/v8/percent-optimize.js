//!mock jsc throw:TypeError:undefined is not a function
function f() { return 1; }
f();
assertEq(f(), 1);
