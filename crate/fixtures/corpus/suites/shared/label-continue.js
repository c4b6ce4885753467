//!mock jsc assert-fail:label continue skipped an iteration
var n = 0;
outer: for (var i = 0; i < 3; i++) {
  for (var j = 0; j < 3; j++) {
    if (j === 1) continue outer;
    n++;
  }
}
assert(n === 3);
