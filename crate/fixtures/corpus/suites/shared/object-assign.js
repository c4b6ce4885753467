var t = Object.assign({}, { a: 1 }, { b: 2 });
assert(t.a === 1 && t.b === 2);
