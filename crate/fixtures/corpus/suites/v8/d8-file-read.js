//!mock sm throw:ReferenceError:d8 is not defined
//!mock chakra throw:ReferenceError:'d8' is not defined
var d = typeof d8;
assertEq(d === "object" || d === "undefined", true);
