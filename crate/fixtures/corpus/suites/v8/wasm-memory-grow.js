//!mock v8 crash:11
var pages = 1;
assertEq(pages * 65536, 65536);
