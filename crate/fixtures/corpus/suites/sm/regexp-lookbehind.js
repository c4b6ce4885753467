//!mock chakra syntax-error:Invalid regular expression: unsupported lookbehind
var m = /(?<=a)b/.exec("ab");
assertEq(m[0], "b");
