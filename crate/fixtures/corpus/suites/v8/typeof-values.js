assertEq(typeof 1, "number");
assertEq(typeof "s", "string");
assertEq(typeof undefined, "undefined");
assertEq(typeof null, "object");
