var log = [];
var p = new Proxy({ a: 1 }, {
  ownKeys: function (t) { log.push("ownKeys"); return Reflect.ownKeys(t); },
  getOwnPropertyDescriptor: function (t, k) { log.push("gopd:" + k); return Reflect.getOwnPropertyDescriptor(t, k); }
});
Object.keys(p);
print(log.join(","));
