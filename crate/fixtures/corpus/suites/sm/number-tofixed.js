assertEq((1.005).toFixed(1), "1.0");
assertEq((25).toString(16), "19");
