assertEq("A".charCodeAt(0), 65);
assertEq(String.fromCharCode(66), "B");
