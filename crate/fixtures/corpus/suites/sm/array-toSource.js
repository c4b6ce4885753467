//!mock v8 throw:RangeError:Invalid array length
var a = new Array(3);
assertEq(a.length, 3);
