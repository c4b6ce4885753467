//!mock chakra assert-fail:got NaN, expected 0
assertEq(Date.parse("1970-01-01T00:00:00Z"), 0);
