var keys = Object.keys({ b: 1, a: 2 });
assertEqArray(keys, ["b", "a"]);
