//!mock sm pass
//!mock * throw:ReferenceError:newGlobal is not defined
var g = newGlobal();
assertEq(typeof g, "object");
