var a = [1, 2, 3, 4];
a.length = 2;
assert(a.length === 2);
assert(a[3] === undefined);
