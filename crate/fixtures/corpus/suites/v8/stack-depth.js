//!mock sm throw:InternalError:too much recursion
function r(n) { return n === 0 ? 0 : 1 + r(n - 1); }
assertEq(r(100), 100);
