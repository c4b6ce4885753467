assertEq("ab".repeat(3), "ababab");
assertEq("".repeat(10), "");
