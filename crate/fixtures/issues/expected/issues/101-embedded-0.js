var a = [1, 2, 3];
var r = a.splice(0, 4294967296);
print(r.length);
