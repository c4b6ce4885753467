var o = { a: 1, b: [true, null, "x"] };
var back = JSON.parse(JSON.stringify(o));
assertEq(back.a, 1);
assertEqArray(back.b, [true, null, "x"]);
