//!mock v8 throw:ReferenceError:describe is not defined
//!mock sm throw:ReferenceError:describe is not defined
//!mock chakra throw:ReferenceError:'describe' is not defined
var s = describe({});
assertEq(typeof s, "string");
