var t = new Float64Array(8);
for (var i = 0; i < t.length; i++) {
  t[i] = i * 0.5;
}
print(t[7]);
