//!mock jsc exit:1
for (var i = 0; i < 10; i++) {}
assertEq(i, 10);
