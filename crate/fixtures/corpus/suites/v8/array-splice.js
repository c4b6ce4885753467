var a = [1, 2, 3, 4, 5];
var removed = a.splice(1, 2);
assertEqArray(removed, [2, 3]);
assertEqArray(a, [1, 4, 5]);
