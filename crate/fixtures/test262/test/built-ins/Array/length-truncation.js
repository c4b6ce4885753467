//!mock * throw:Test262Error:Expected SameValue(«4», «2») to be true
/*---
esid: sec-arraysetlength
description: Setting length truncates the array
---*/

var a = [1, 2, 3, 4];
a.length = 2;
assert.sameValue(a.length, 2);
