var s = new Set([1, 1, 2]);
assertEq(s.size, 2);
