assertEqArray("a,b,c".split(","), ["a", "b", "c"]);
