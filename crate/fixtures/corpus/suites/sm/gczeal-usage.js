//!mock v8 throw:ReferenceError:gczeal is not defined
//!mock jsc throw:ReferenceError:Can't find variable: gczeal
//!mock chakra throw:ReferenceError:'gczeal' is not defined
//!mock sm pass
gczeal(0);
assertEq(1, 1);
