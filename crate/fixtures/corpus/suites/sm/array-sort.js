var a = [3, 1, 2];
a.sort();
assertEqArray(a, [1, 2, 3]);
