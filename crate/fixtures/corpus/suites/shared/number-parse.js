assert(parseInt("42px", 10) === 42);
assert(isNaN(parseFloat("abc")));
