assertEq([1, 2, 3].indexOf(2), 1);
assertEq([1, 2, 3].indexOf(9), -1);
