function sign(x) { return x > 0 ? 1 : x < 0 ? -1 : 0; }
assert(sign(-3) === -1);
assert(sign(0) === 0);
