var m = new Map();
m.set("k", 1);
assertEq(m.get("k"), 1);
assertEq(m.size, 1);
