assertEq(Math.max(1, 5, 3), 5);
assertEq(Math.min(), Infinity);
