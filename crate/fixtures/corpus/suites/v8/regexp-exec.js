var m = /(\d+)-(\d+)/.exec("10-20");
assertEq(m[1], "10");
assertEq(m[2], "20");
