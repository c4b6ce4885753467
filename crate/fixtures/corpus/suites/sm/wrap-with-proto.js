//!mock v8 throw:ReferenceError:wrapWithProto is not defined
//!mock jsc throw:ReferenceError:Can't find variable: wrapWithProto
var w = wrapWithProto({}, null);
assertEq(typeof w, "object");
