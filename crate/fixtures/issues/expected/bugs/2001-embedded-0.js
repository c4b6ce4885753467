function* g() {
  var x = yield 1;
  try {
    yield x;
  } finally {
    return 3;
  }
}
var it = g();
it.next();
it.next(2);
print(it.return(5).value);
