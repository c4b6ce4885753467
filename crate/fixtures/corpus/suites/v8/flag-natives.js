//!mock v8 throw:SyntaxError:Unexpected token '%'
// Relies on a shell flag the harness does not pass.
var o = {};
assertEq(typeof o, "object");
