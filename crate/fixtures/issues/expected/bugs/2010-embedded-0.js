var arr = [];
try {
  Object.defineProperty(arr, "length", { get: function () { return 1; } });
  print("no exception");
} catch (e) {
  print(e instanceof TypeError);
}
