gczeal(4);
var a = [];
for (var i = 0; i < 100; i++) a.push({});
