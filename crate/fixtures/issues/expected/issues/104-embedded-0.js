function f(x) {
  return x?.y ?? 1;
}
for (var i = 0; i < 100000; i++) f(undefined);
print(f({ y: 2 }));
