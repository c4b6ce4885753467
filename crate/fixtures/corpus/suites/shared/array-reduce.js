var sum = [1, 2, 3, 4].reduce(function (acc, x) { return acc + x; }, 0);
assert(sum === 10);
