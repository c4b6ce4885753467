var a = [1, 2, 3];
a.push(4);
assertEq(a.length, 4);
assertEq(a[3], 4);
