//!mock chakra throw:TypeError:Object doesn't support property or method 'transfer'
var b = new ArrayBuffer(8);
assertEq(b.byteLength, 8);
