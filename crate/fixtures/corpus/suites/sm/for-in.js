var seen = [];
for (var k in { x: 1, y: 2 }) {
  seen.push(k);
}
assertEqArray(seen, ["x", "y"]);
