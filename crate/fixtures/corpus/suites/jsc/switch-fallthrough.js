function f(x) {
  var r = 0;
  switch (x) {
    case 1: r += 1;
    case 2: r += 2; break;
    default: r = -1;
  }
  return r;
}
assertEq(f(1), 3);
assertEq(f(5), -1);
