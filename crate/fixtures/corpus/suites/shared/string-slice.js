var s = "hello world";
assert(s.slice(-5) === "world");
assert(s.slice(0, 5) === "hello");
