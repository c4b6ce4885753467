function f() { return arguments.length; }
assertEq(f(1, 2, 3), 3);
