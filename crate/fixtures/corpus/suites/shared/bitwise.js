assert((5 & 3) === 1);
assert((5 | 3) === 7);
assert((-1 >>> 28) === 15);
